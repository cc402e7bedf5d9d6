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
#include "mmnet/fishdb.hpp"

#include <cstdio>
#include <fstream>

#include "doctest.h"

using namespace mmnet;

namespace {

const std::string kFixture =
    std::string(MMNET_TEST_DATA_DIR) + "/fish_fixture.csv";

struct TempCsv {
  std::string path;
  explicit TempCsv(const std::string& name, const std::string& content)
      : path(name) {
    std::ofstream os(path);
    os << content;
  }
  ~TempCsv() { std::remove(path.c_str()); }
};

const char* kGoodHeader =
    "ID,Order,Family,Genus,Species,Occurrence,Foreign name,Local Name,"
    "Description,Category\n";

}  // namespace

TEST_CASE("fixture ingests all forty rows") {
  auto db = FishDb::ingest_csv(kFixture);
  CHECK(db.records().size() == 40);
}

TEST_CASE("category maps straight to the verdict") {
  auto db = FishDb::ingest_csv(kFixture);
  auto stellaris = db.lookup_species("Abalistes stellaris");
  REQUIRE(stellaris.has_value());
  CHECK(stellaris->label == VerdictLabel::Consumable);
  CHECK(stellaris->basis == VerdictBasis::SpeciesMatch);
  CHECK(stellaris->matched_ids == std::vector<int>{0});

  auto hispidus = db.lookup_species("Arothron hispidus");
  REQUIRE(hispidus.has_value());
  CHECK(hispidus->label == VerdictLabel::Unconsumable);

  auto undulatus = db.lookup_species("Balistapus undulatus");
  REQUIRE(undulatus.has_value());
  CHECK(undulatus->label == VerdictLabel::Unconsumable);
}

TEST_CASE("blank family and genus cells inherit downward") {
  auto db = FishDb::ingest_csv(kFixture);
  for (const auto& r : db.records()) {
    CHECK(!r.family.empty());
    CHECK(!r.genus.empty());
    if (r.species == "Acanthurus olivaceus" ||
        r.species == "Acanthurus pyroferus") {
      CHECK(r.family == "Acanthuridae");
      CHECK(r.genus == "Acanthurus");
    }
    if (r.species == "Balistoides viridescens") {
      // family blank in the source, genus explicit
      CHECK(r.family == "Balistidae");
      CHECK(r.genus == "Balistoides");
    }
  }
}

TEST_CASE("ingestion is idempotent") {
  auto a = FishDb::ingest_csv(kFixture);
  auto b = FishDb::ingest_csv(kFixture);
  REQUIRE(a.records().size() == b.records().size());
  for (size_t i = 0; i < a.records().size(); ++i) {
    CHECK(a.records()[i].species == b.records()[i].species);
    CHECK(a.records()[i].genus == b.records()[i].genus);
    CHECK(a.records()[i].category == b.records()[i].category);
  }
}

TEST_CASE("unknown category is rejected") {
  TempCsv csv("bad_category.csv",
              std::string(kGoodHeader) +
                  "1,O,F,G,Some species,native,x,y,desc,Edible\n");
  CHECK_THROWS_WITH_AS(FishDb::ingest_csv(csv.path),
                       doctest::Contains("Edible"), FormatError);
}

TEST_CASE("missing header is rejected") {
  TempCsv csv("bad_header.csv",
              "ID,Order,Family\n1,O,F\n");
  CHECK_THROWS_WITH_AS(FishDb::ingest_csv(csv.path),
                       doctest::Contains("header"), FormatError);
}

TEST_CASE("duplicate species are rejected") {
  TempCsv csv("dup_species.csv",
              std::string(kGoodHeader) +
                  "1,O,F,G,Same species,native,x,y,d,Commercial\n"
                  "2,O,F,G,Same species,native,x,y,d,Danger\n");
  CHECK_THROWS_AS(FishDb::ingest_csv(csv.path), DuplicateNameError);
}

TEST_CASE("unknown species is a miss signal, not an error") {
  auto db = FishDb::ingest_csv(kFixture);
  CHECK(!db.lookup_species("Nonexistus fishus").has_value());
}

TEST_CASE("genus fallback resolves uniform genera") {
  auto db = FishDb::ingest_csv(kFixture);

  auto arothron = db.lookup_genus("Arothron");
  REQUIRE(std::holds_alternative<ConsumabilityVerdict>(arothron));
  const auto& v = std::get<ConsumabilityVerdict>(arothron);
  CHECK(v.label == VerdictLabel::Unconsumable);
  CHECK(v.basis == VerdictBasis::GenusFallback);
  CHECK(v.matched_ids.size() == 9);  // every Arothron row in the fixture

  auto acanthurus = db.lookup_genus("Acanthurus");
  REQUIRE(std::holds_alternative<ConsumabilityVerdict>(acanthurus));
  CHECK(std::get<ConsumabilityVerdict>(acanthurus).label ==
        VerdictLabel::Consumable);

  CHECK_THROWS_AS(db.lookup_genus("Squalus"), LookupError);
}

TEST_CASE("a mixed genus produces an ambiguity report") {
  std::vector<FishRecord> recs(2);
  recs[0].id = 1;
  recs[0].genus = "Mixed";
  recs[0].species = "Mixed one";
  recs[0].family = "F";
  recs[0].category = FishCategory::Commercial;
  recs[1].id = 2;
  recs[1].genus = "Mixed";
  recs[1].species = "Mixed two";
  recs[1].family = "F";
  recs[1].category = FishCategory::Danger;
  auto db = FishDb::from_records(recs);

  auto result = db.lookup_genus("Mixed");
  REQUIRE(std::holds_alternative<GenusAmbiguity>(result));
  const auto& amb = std::get<GenusAmbiguity>(result);
  CHECK(amb.commercial_ids == std::vector<int>{1});
  CHECK(amb.danger_ids == std::vector<int>{2});
}

TEST_CASE("species lookup agrees with its genus whenever both resolve") {
  auto db = FishDb::ingest_csv(kFixture);
  for (const auto& r : db.records()) {
    auto sp = db.lookup_species(r.species);
    REQUIRE(sp.has_value());
    auto ge = db.lookup_genus(r.genus);
    if (const auto* gv = std::get_if<ConsumabilityVerdict>(&ge))
      CHECK(gv->label == sp->label);
  }
}

TEST_CASE("verdict json line carries all four fields") {
  ConsumabilityVerdict v;
  v.label = VerdictLabel::Unconsumable;
  v.basis = VerdictBasis::GenusFallback;
  v.confidence = 0.75;
  std::string line = verdict_json("Arothron mappa", v);
  CHECK(line.find("\"species\":\"Arothron mappa\"") != std::string::npos);
  CHECK(line.find("\"verdict\":\"Unconsumable\"") != std::string::npos);
  CHECK(line.find("\"basis\":\"genus-fallback\"") != std::string::npos);
  CHECK(line.find("0.75") != std::string::npos);
}

TEST_CASE("pipeline verdicts follow the predicted species") {
  auto db = FishDb::ingest_csv(kFixture);
  ClassifierModel model;
  model.class_names = {"Abalistes stellaris", "Arothron hispidus",
                       "Balistapus undulatus"};
  model.spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::ReducedHead, 3);
  model.store = init_weights<float>(model.spec, 44);
  validate_model_db(model, db);

  Rng rng(12);
  auto img = tensor_filled<float>(Shape{32, 32, 3}, rng, Dist::uniform(0, 1));
  auto result = classify_pipeline(img, model, db);

  auto expected = db.lookup_species(result.species);
  REQUIRE(expected.has_value());
  CHECK(result.verdict.label == expected->label);
  CHECK(result.verdict.basis == VerdictBasis::SpeciesMatch);
  CHECK(result.verdict.confidence >= 0.0);
  CHECK(result.verdict.confidence <= 1.0);
}

TEST_CASE("pipeline falls back to the genus for unlisted species") {
  auto db = FishDb::ingest_csv(kFixture);
  ClassifierModel model;
  // second class: a real puffer that is not a fixture row
  model.class_names = {"Abalistes stellaris", "Arothron firmamentum"};
  model.spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::ReducedHead, 2);
  model.store = init_weights<float>(model.spec, 44);
  validate_model_db(model, db);

  // pin the argmax to the fallback class
  model.store.at("head_fc2.bias")[1] = 100.0f;
  Rng rng(13);
  auto img = tensor_filled<float>(Shape{32, 32, 3}, rng, Dist::uniform(0, 1));
  auto result = classify_pipeline(img, model, db);
  CHECK(result.species == "Arothron firmamentum");
  CHECK(result.verdict.basis == VerdictBasis::GenusFallback);
  CHECK(result.verdict.label == VerdictLabel::Unconsumable);
}

TEST_CASE("model/db mismatch is caught at load time") {
  auto db = FishDb::ingest_csv(kFixture);
  ClassifierModel model;
  model.class_names = {"Abalistes stellaris", "Martianus invader"};
  model.spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::ReducedHead, 2);
  model.store = init_weights<float>(model.spec, 1);
  CHECK_THROWS_AS(validate_model_db(model, db), ConfigError);

  // class resolving only to a mixed genus is also a load-time error
  std::vector<FishRecord> recs(2);
  recs[0] = {1, "O", "F", "Mixed", "Mixed one", "", "", "", "",
             FishCategory::Commercial};
  recs[1] = {2, "O", "F", "Mixed", "Mixed two", "", "", "", "",
             FishCategory::Danger};
  auto mixed_db = FishDb::from_records(recs);
  ClassifierModel m2;
  m2.class_names = {"Mixed one", "Mixed unknown"};
  m2.spec = model.spec;
  m2.store = model.store;
  CHECK_THROWS_AS(validate_model_db(m2, mixed_db), ConfigError);
}

TEST_CASE("split arithmetic reproduces the reference counts") {
  auto [train, test] = split_sizes(37462, 0.8);
  CHECK(train == 29970);
  CHECK(test == 7492);
  CHECK_THROWS_AS(split_sizes(10, 1.0), ConfigError);
  CHECK_THROWS_AS(split_sizes(10, 0.0), ConfigError);
}

TEST_CASE("stratified split of two balanced classes") {
  DatasetManifest m;
  m.class_names = {"a", "b"};
  for (int i = 0; i < 10; ++i)
    m.items.push_back({"img" + std::to_string(i), i < 5 ? 0 : 1});
  auto out = dataset_split(m, 0.8, 7);
  int train_a = 0, train_b = 0, test_a = 0, test_b = 0;
  for (const auto& item : out.items) {
    if (item.label == 0)
      (item.split == SplitSide::Train ? train_a : test_a) += 1;
    else
      (item.split == SplitSide::Train ? train_b : test_b) += 1;
  }
  CHECK(train_a == 4);
  CHECK(test_a == 1);
  CHECK(train_b == 4);
  CHECK(test_b == 1);
}

TEST_CASE("split is disjoint, exhaustive, and deterministic") {
  Rng rng(3);
  DatasetManifest m;
  m.class_names = {"a", "b", "c"};
  int id = 0;
  for (int c = 0; c < 3; ++c) {
    int count = 5 + static_cast<int>(rng.uniform(0, 20));
    for (int i = 0; i < count; ++i)
      m.items.push_back({"f" + std::to_string(id++), c});
  }
  auto s1 = dataset_split(m, 0.8, 11);
  auto s2 = dataset_split(m, 0.8, 11);
  auto [want_train, want_test] =
      split_sizes(static_cast<int64_t>(m.items.size()), 0.8);
  CHECK(s1.count(SplitSide::Train) == static_cast<size_t>(want_train));
  CHECK(s1.count(SplitSide::Test) == static_cast<size_t>(want_test));
  for (size_t i = 0; i < s1.items.size(); ++i)
    CHECK(s1.items[i].split == s2.items[i].split);

  auto s3 = dataset_split(m, 0.8, 12);
  bool differs = false;
  for (size_t i = 0; i < s1.items.size() && !differs; ++i)
    differs = s1.items[i].split != s3.items[i].split;
  CHECK(differs);
}

TEST_CASE("singleton classes break stratification with named offenders") {
  DatasetManifest m;
  m.class_names = {"fine", "lonely"};
  m.items.push_back({"a", 0});
  m.items.push_back({"b", 0});
  m.items.push_back({"c", 1});
  CHECK_THROWS_WITH_AS(dataset_split(m, 0.8, 1), doctest::Contains("lonely"),
                       ConfigError);
}

TEST_CASE("genus remapping collapses species of one genus") {
  DatasetManifest m;
  m.class_names = {"Arothron hispidus", "Arothron mappa",
                   "Abalistes stellaris"};
  m.items.push_back({"1", 0});
  m.items.push_back({"2", 1});
  m.items.push_back({"3", 2});
  auto g = m.remap_to_genus();
  REQUIRE(g.class_names.size() == 2);
  CHECK(g.class_names[0] == "Arothron");
  CHECK(g.class_names[1] == "Abalistes");
  CHECK(g.items[0].label == g.items[1].label);
  CHECK(g.items[0].label != g.items[2].label);

  // underscore directory names behave like spaces
  DatasetManifest u;
  u.class_names = {"Arothron_hispidus", "Arothron_mappa"};
  u.items.push_back({"1", 0});
  u.items.push_back({"2", 1});
  CHECK(u.remap_to_genus().class_names ==
        std::vector<std::string>{"Arothron"});
}
