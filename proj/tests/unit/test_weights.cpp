/**
 * Copyright 2026 The mmnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "mmnet/weights.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"

using namespace mmnet;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

WeightStore<float> sample_store() {
  WeightStore<float> store;
  store.creation_seed = 1234;
  Rng rng(8);
  store.entries.emplace(
      "a.weight", tensor_filled<float>(Shape{2, 3}, rng, Dist::normal(0, 1)));
  store.entries.emplace(
      "b.gamma", tensor_filled<float>(Shape{5}, rng, Dist::uniform(0, 2)));
  store.entries.emplace("c.weight", tensor_filled<float>(Shape{3, 3, 2, 4},
                                                         rng,
                                                         Dist::normal(0, 1)));
  return store;
}

std::vector<char> read_all(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>());
}

void write_all(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("weight container round trip is bit exact") {
  TempFile f("weights_rt.mmnw");
  auto store = sample_store();
  save_weights(store, f.path);
  auto loaded = load_weights(f.path);

  CHECK(loaded.creation_seed == store.creation_seed);
  REQUIRE(loaded.entries.size() == store.entries.size());
  for (const auto& [name, t] : store.entries) {
    REQUIRE(loaded.has(name));
    const auto& lt = loaded.at(name);
    REQUIRE(lt.shape() == t.shape());
    for (Index i = 0; i < t.size(); ++i) CHECK(lt[i] == t[i]);
  }

  // byte-identical when saved again
  TempFile g("weights_rt2.mmnw");
  save_weights(loaded, g.path);
  CHECK(read_all(f.path) == read_all(g.path));
}

TEST_CASE("corrupt magic is a distinct error") {
  TempFile f("weights_magic.mmnw");
  save_weights(sample_store(), f.path);
  auto bytes = read_all(f.path);
  bytes[0] = 'X';
  write_all(f.path, bytes);
  CHECK_THROWS_AS(load_weights(f.path), BadMagicError);
}

TEST_CASE("unsupported version is a distinct error") {
  TempFile f("weights_version.mmnw");
  save_weights(sample_store(), f.path);
  auto bytes = read_all(f.path);
  bytes[4] = 99;  // version field
  write_all(f.path, bytes);
  CHECK_THROWS_AS(load_weights(f.path), VersionError);
}

TEST_CASE("truncation is a distinct error") {
  TempFile f("weights_trunc.mmnw");
  save_weights(sample_store(), f.path);
  auto bytes = read_all(f.path);
  bytes.resize(bytes.size() - 7);
  write_all(f.path, bytes);
  CHECK_THROWS_AS(load_weights(f.path), TruncationError);
}

TEST_CASE("duplicate entry names are a distinct error") {
  // two identical single-entry files concatenated after patching the count
  TempFile f("weights_dup.mmnw");
  WeightStore<float> store;
  Rng rng(1);
  store.entries.emplace("dup.weight",
                        tensor_filled<float>(Shape{2}, rng, Dist::constant(1)));
  save_weights(store, f.path);
  auto bytes = read_all(f.path);
  // header: magic(4) version(4) seed(8) count(4) -> entries start at 20
  std::vector<char> doubled(bytes.begin(), bytes.end());
  doubled.insert(doubled.end(), bytes.begin() + 20, bytes.end());
  doubled[16] = 2;  // entry count
  write_all(f.path, doubled);
  CHECK_THROWS_AS(load_weights(f.path), DuplicateNameError);
}

TEST_CASE("extra entries load fine and surface in the binding report") {
  auto spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::BaselineFC, 3);
  auto store = init_weights<float>(spec, 3);
  CHECK(check_binding(spec, store).missing.empty());
  CHECK(check_binding(spec, store).extra.empty());

  Rng rng(2);
  store.entries.emplace("future.block",
                        tensor_filled<float>(Shape{4}, rng, Dist::constant(0)));
  TempFile f("weights_extra.mmnw");
  save_weights(store, f.path);
  auto loaded = load_weights(f.path);
  auto report = check_binding(spec, loaded);
  CHECK(report.missing.empty());
  REQUIRE(report.extra.size() == 1);
  CHECK(report.extra[0] == "future.block");

  loaded.entries.erase("head_fc.weight");
  auto broken = check_binding(spec, loaded);
  REQUIRE(broken.missing.size() == 1);
  CHECK(broken.missing[0] == "head_fc.weight");
}

TEST_CASE("init_weights is deterministic and complete") {
  auto spec = build_model(Shape{32, 32, 3}, 0.5, HeadKind::ReducedHead, 4);
  auto a = init_weights<float>(spec, 99);
  auto b = init_weights<float>(spec, 99);
  REQUIRE(a.entries.size() == b.entries.size());
  for (const auto& [name, t] : a.entries) {
    const auto& bt = b.at(name);
    for (Index i = 0; i < t.size(); ++i) CHECK(t[i] == bt[i]);
  }
  CHECK(check_binding(spec, a).missing.empty());

  auto c = init_weights<float>(spec, 100);
  CHECK(c.at("conv0.weight")[0] != a.at("conv0.weight")[0]);
}
