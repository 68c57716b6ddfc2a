#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "tadam/bench.hpp"
#include "tadam/csv.hpp"

using namespace tadam;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.noise_settings = {{1.0, 0.05}};
  c.p_values = {0, 50};
  c.seeds = {0, 1};
  c.epochs = 3;
  c.n_train = 64;
  c.batch_size = 16;
  c.eval_points = 20;
  c.workers = 2;
  return c;
}

RunRecord fake_record(Algorithm alg, int p, std::uint64_t seed, double mse) {
  RunRecord r;
  r.optimizer = alg;
  r.noise = {1.0, 0.05, p};
  r.seed = seed;
  r.epochs = 1;
  r.final_clean_mse = mse;
  return r;
}

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("quantile uses linear interpolation") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(quantile({7.0}, 0.75) == 7.0);
}

TEST_CASE("aggregation is independent of record order") {
  std::vector<RunRecord> records;
  std::mt19937_64 rng(3);
  for (int p : {0, 50})
    for (std::uint64_t s = 0; s < 7; ++s)
      for (auto alg : {Algorithm::Adam, Algorithm::TAdam})
        records.push_back(fake_record(alg, p, s, std::ldexp(1.0, -static_cast<int>(rng() % 20))));
  records.back().failure = "diverged";
  records.back().final_clean_mse = std::nan("");
  auto a = aggregate(records);
  std::shuffle(records.begin(), records.end(), rng);
  auto b = aggregate(records);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].optimizer == b[i].optimizer);
    CHECK(a[i].noise == b[i].noise);
    CHECK(a[i].median == b[i].median);
    CHECK(a[i].q25 == b[i].q25);
    CHECK(a[i].runs == b[i].runs);
  }
  std::size_t failed = 0;
  for (const auto& row : a) failed += row.failed;
  CHECK(failed == 1);
}

TEST_CASE("results csv round trip") {
  std::vector<RunRecord> records{fake_record(Algorithm::Adam, 30, 4, 0.125),
                                 fake_record(Algorithm::TAdam, 30, 4, 1.0 / 3.0)};
  std::stringstream ss;
  write_results_csv(ss, records);
  auto rows = read_results_csv(ss);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == to_result_row(records[0]));
  CHECK(rows[1].final_clean_mse == 1.0 / 3.0);
  CHECK(rows[1].optimizer == "tadam");
}

TEST_CASE("single run emits one results row") {
  auto dir = scratch("tadam_emit_test");
  auto cfg = tiny_config();
  auto record = train_regression(cfg, Algorithm::TAdam, {1.0, 0.05, 0}, 0);
  CHECK(record.ok());
  CHECK(record.history.size() == 3);
  CHECK(record.key() == "tadam_nu1_s0.05_p0_seed0");
  auto files = emit_results({record}, cfg, dir);
  std::stringstream ss(read_file(dir / "results.csv"));
  auto table = read_csv(ss);
  CHECK(table.rows.size() == 1);
  CHECK(std::find(files.begin(), files.end(), "manifest.json") != files.end());
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is deterministic and pairs data across optimizers") {
  auto cfg = tiny_config();
  auto a = train_regression(cfg, Algorithm::Adam, {1.0, 0.05, 50}, 1);
  auto b = train_regression(cfg, Algorithm::Adam, {1.0, 0.05, 50}, 1);
  CHECK(a.final_clean_mse == b.final_clean_mse);
  CHECK(a.predictions == b.predictions);
  CHECK(std::isnan(a.mean_weight));
  auto t = train_regression(cfg, Algorithm::TAdam, {1.0, 0.05, 50}, 1);
  CHECK(t.mean_weight > 0.0);
  CHECK(t.min_weight <= t.mean_weight);
  CHECK(t.history.front().mean_beta_w > 0.0);
}

TEST_CASE("sweep order and content do not depend on worker count") {
  auto cfg = tiny_config();
  cfg.workers = 1;
  auto serial = run_regression_sweep(cfg);
  cfg.workers = 3;
  auto parallel = run_regression_sweep(cfg);
  REQUIRE(serial.size() == 8);
  REQUIRE(parallel.size() == 8);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].key() == parallel[i].key());
    CHECK(serial[i].final_clean_mse == parallel[i].final_clean_mse);
  }
  CHECK(serial[0].key() == "adam_nu1_s0.05_p0_seed0");
  CHECK(serial[1].key() == "tadam_nu1_s0.05_p0_seed0");
}

TEST_CASE("epoch permutation is a permutation") {
  auto rng = make_stream(0, Stream::Shuffle);
  auto perm = epoch_permutation(100, rng);
  auto sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  auto grid = evaluation_grid(5);
  CHECK(grid == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("equivalence check with zero steps reports no divergence") {
  auto cfg = tiny_config();
  cfg.equivalence_steps = 0;
  auto r = run_equivalence_check(cfg);
  CHECK(r.max_relative_divergence == 0.0);
  CHECK(r.divergence.empty());
}

TEST_CASE("equivalence check detects the non-limit case") {
  auto cfg = tiny_config();
  cfg.equivalence_steps = 200;
  cfg.equivalence_nu = 1.0;
  cfg.equivalence_noise = {1.0, 0.05, 50};
  auto r = run_equivalence_check(cfg);
  CHECK(r.max_relative_divergence > 1e-2);
  CHECK(r.divergence.size() == 200);
}

TEST_CASE("parallel_for propagates exceptions") {
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}
