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
#include "mmnet/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mmnet/model.hpp"
#include "mmnet/synthetic.hpp"
#include "mmnet/telemetry.hpp"
#include "mmnet/weights.hpp"

using namespace mmnet;

namespace {

const std::string kFixture =
    std::string(MMNET_TEST_DATA_DIR) + "/fish_fixture.csv";

struct CapturedRun {
  int exit_code = 0;
  std::string out;
};

CapturedRun run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv;
  argv.push_back("mmnet");
  for (const auto& a : args) argv.push_back(a.c_str());

  std::ostringstream captured;
  auto* old = std::cout.rdbuf(captured.rdbuf());
  int code = cli::dispatch(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return {code, captured.str()};
}

}  // namespace

TEST_CASE("params reports the head-reduction arithmetic") {
  auto r = run_cli({"params", "--head", "reduced"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("1025000") != std::string::npos);
  CHECK(r.out.find("530944") != std::string::npos);
  CHECK(r.out.find("0.518") != std::string::npos);
}

TEST_CASE("split prints the reference sizes") {
  auto r = run_cli({"split", "--n", "37462", "--ratio", "0.8"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("train 29970 / test 7492") != std::string::npos);
}

TEST_CASE("db lookup resolves species from the fixture") {
  auto r = run_cli({"db", "lookup", "--db", kFixture, "--species",
                    "Arothron mappa"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("Unconsumable") != std::string::npos);
  CHECK(r.out.find("species-match") != std::string::npos);

  auto g = run_cli({"db", "lookup", "--db", kFixture, "--genus", "Arothron"});
  CHECK(g.exit_code == 0);
  CHECK(g.out.find("Unconsumable") != std::string::npos);
  CHECK(g.out.find("genus-fallback") != std::string::npos);
}

TEST_CASE("unknown subcommand and missing args are usage errors") {
  CHECK(run_cli({"frobnicate"}).exit_code == 1);
  CHECK(run_cli({}).exit_code == 1);
  CHECK(run_cli({"--help"}).exit_code == 0);
  CHECK(run_cli({"db", "lookup", "--db", kFixture}).exit_code == 1);
}

TEST_CASE("missing paths exit with the validation code") {
  auto r = run_cli({"db", "lookup", "--db", "/no/such/file.csv", "--species",
                    "Arothron mappa"});
  CHECK(r.exit_code == 1);
}

TEST_CASE("flops subcommand prints the total") {
  auto r = run_cli({"flops", "--image-size", "32", "--classes", "4"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("multiply-accumulates") != std::string::npos);
}

TEST_CASE("train on a tiny synthetic set writes the run artifacts") {
  namespace fs = std::filesystem;
  fs::remove_all("cli_test_run");
  auto r = run_cli({"train",      "--synthetic",  "--classes",  "2",
                    "--per-class", "4",           "--image-size", "32",
                    "--width",     "0.25",        "--epochs",   "1",
                    "--batch-size", "2",          "--seed",     "5",
                    "--out",       "cli_test_run"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"command\":\"train\"") != std::string::npos);
  CHECK(r.out.find("\"seed\":5") != std::string::npos);
  CHECK(fs::exists("cli_test_run/weights.mmnw"));
  CHECK(fs::exists("cli_test_run/report.ndjson"));
  CHECK(fs::exists("cli_test_run/classes.txt"));

  auto store = load_weights("cli_test_run/weights.mmnw");
  CHECK(store.entries.count("head_fc2.weight") == 1);
  fs::remove_all("cli_test_run");
}

TEST_CASE("config file values apply and flags win") {
  namespace fs = std::filesystem;
  {
    std::ofstream os("cli_test.cfg");
    os << "epochs=1\n";
    os << "lr=0.5\n";
    os << "classes=2\n";
    os << "per-class=4\n";
    os << "image-size=32\n";
    os << "width=0.25\n";
    os << "batch-size=2\n";
  }
  fs::remove_all("cli_cfg_run");
  auto r = run_cli({"train", "--synthetic", "--config", "cli_test.cfg",
                    "--lr", "0.25", "--out", "cli_cfg_run", "--seed", "9"});
  CHECK(r.exit_code == 0);
  // echo shows the flag value, not the config one
  CHECK(r.out.find("\"learning_rate\":0.25") != std::string::npos);
  CHECK(r.out.find("\"epochs\":1") != std::string::npos);
  fs::remove_all("cli_cfg_run");
  std::remove("cli_test.cfg");
}

TEST_CASE("MMNET_SEED provides the seed when no flag is given") {
  namespace fs = std::filesystem;
  setenv("MMNET_SEED", "1234", 1);
  fs::remove_all("cli_env_run");
  auto r = run_cli({"train",      "--synthetic",  "--classes",  "2",
                    "--per-class", "4",           "--image-size", "32",
                    "--width",     "0.25",        "--epochs",   "1",
                    "--batch-size", "2",          "--out",      "cli_env_run"});
  unsetenv("MMNET_SEED");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"seed\":1234") != std::string::npos);
  fs::remove_all("cli_env_run");
}

TEST_CASE("telemetry record fields are populated and non-negative") {
  auto spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::ReducedHead, 3);
  auto store = init_weights<float>(spec, 4);
  Rng rng(5);
  auto batch = tensor_filled<float>(Shape{2, 32, 32, 3}, rng,
                                    Dist::uniform(0, 1));
  auto rec = measure_forward(spec, store, batch, "test-phase", 2);
  CHECK(rec.phase == "test-phase");
  CHECK(rec.batch_size == 2);
  CHECK(rec.wall_ms_per_forward > 0.0);
  CHECK(rec.peak_transient_bytes > 0);
  CHECK(rec.param_count ==
        count_params(spec, ParamScope::All, ParamCounting::Total));
  CHECK(rec.flop_estimate == count_flops(spec) * 2);

  auto line = telemetry_json(rec);
  CHECK(line.find("\"phase\":\"test-phase\"") != std::string::npos);
  CHECK(line.find("\"schema\":1") != std::string::npos);
}

TEST_CASE("the reduced trunk undercuts the baseline head of the figure") {
  auto baseline =
      build_model(Shape{224, 224, 3}, 1.0, HeadKind::BaselineFC, 1000);
  auto reduced =
      build_model(Shape{224, 224, 3}, 1.0, HeadKind::ReducedHead, 1000);
  CHECK(head_trunk_params(reduced) <
        count_params(baseline, ParamScope::Head, ParamCounting::Total));
}
