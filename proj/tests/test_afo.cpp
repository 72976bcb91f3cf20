#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "avlab/afo.hpp"
#include "avlab/error.hpp"
#include "avlab/theory.hpp"

using namespace avlab;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

AfoRunConfig short_run() {
  AfoRunConfig cfg;
  cfg.steps = 300;
  cfg.train_size = 200;
  return cfg;
}

}  // namespace

TEST_CASE("worst-case linear delta") {
  const std::vector<double> w{1.0, -2.0};
  const auto d0 = worst_case_delta_linear(w, 1, 0.0);
  CHECK(d0 == std::vector<double>{0.0, 0.0});
  const auto d = worst_case_delta_linear(w, 1, 0.3);
  CHECK(d == std::vector<double>{-0.3, 0.3});
  CHECK(worst_case_delta_linear(w, -1, 0.3) == std::vector<double>{0.3, -0.3});
}

TEST_CASE("worst-case delta dominates random search") {
  Rng rng = make_rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 7;
    const double eps = 0.05 + 0.01 * trial;
    std::vector<double> w(d), x(d), tmp(d);
    for (auto& v : w) v = n(rng);
    for (auto& v : x) v = n(rng);
    const int y = trial % 2 ? 1 : -1;
    const auto delta = worst_case_delta_linear(w, y, eps);
    double l1 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      CHECK(std::abs(delta[j]) <= eps);
      tmp[j] = x[j] + delta[j];
      l1 += std::abs(w[j]);
    }
    const double best = y * dot(w, tmp);
    CHECK(best == doctest::Approx(y * dot(w, x) - eps * l1).epsilon(1e-12));
    bool dominated = true;
    for (int r = 0; r < 10000; ++r) {
      for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + eps * u(rng);
      dominated = dominated && best <= y * dot(w, tmp) + 1e-12;
    }
    CHECK(dominated);
  }
}

TEST_CASE("config validation") {
  AfoRunConfig cfg;
  cfg.eps = 0.05;  // below eta = 0.1
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.eps = 0.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.eps = 0.2;
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.steps = 10;
  cfg.label_lambda = 0.4;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("trajectory shape and feasibility") {
  for (std::size_t train_size : {200, 0}) {
    auto cfg = short_run();
    cfg.train_size = train_size;
    cfg.batch_size = 64;
    const auto traj = adversarial_train_linear(cfg);
    CHECK(traj.records.size() == cfg.steps + 1);
    for (std::size_t i = 0; i < traj.records.size(); ++i) CHECK(traj.records[i].step == i);
    const auto& w = traj.final_w;
    CHECK(w.size() == cfg.spec.dim());
    for (double v : w) CHECK(v >= -1e-12);
    CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-9);
    // Initialization is the uniform point.
    const double u = 1.0 / static_cast<double>(cfg.spec.dim());
    CHECK(traj.records[0].wb_l1 == doctest::Approx(u * (cfg.spec.d - cfg.spec.c)));
    CHECK(traj.records[0].wa_mean == doctest::Approx(u));
    // Recorded errors are the closed forms of the recorded weights.
    const auto& last = traj.records.back();
    CHECK(last.true_robust_err ==
          doctest::Approx(psi_robust_error(w, cfg.spec, PsiLaw::kTrue, cfg.eps)).epsilon(1e-12));
    CHECK(last.true_std_err ==
          doctest::Approx(psi_standard_error(w, cfg.spec, PsiLaw::kTrue)).epsilon(1e-12));
  }
}

TEST_CASE("adversarial training drives the non-robust block to zero") {
  auto cfg = short_run();
  cfg.steps = 2000;
  const auto traj = adversarial_train_linear(cfg);
  CHECK(traj.records.back().wb_l1 < 1e-3);
  CHECK(traj.records.back().wb_l1 < traj.records.front().wb_l1);
}

TEST_CASE("runs are deterministic") {
  const auto a = adversarial_train_linear(short_run());
  const auto b = adversarial_train_linear(short_run());
  CHECK(a.final_w == b.final_w);
  auto other = short_run();
  other.seed = 1;
  CHECK(adversarial_train_linear(other).final_w != a.final_w);
}

TEST_CASE("afo report") {
  Trajectory flat;
  for (std::size_t i = 0; i < 5; ++i) {
    AfoRecord r;
    r.step = i;
    r.wb_l1 = 0.3;
    r.true_robust_err = 0.2;
    r.true_std_err = 0.1;
    flat.records.push_back(r);
  }
  PsiSpec spec;
  auto s = afo_report(flat, spec, 0.3 / static_cast<double>(spec.d - spec.c));
  CHECK(s.robust_gap == 0.0);
  CHECK(s.best_step == 0);
  CHECK_FALSE(s.robust_overshoot());
  CHECK(s.closest_distance == doctest::Approx(0.0).epsilon(1e-15));

  Trajectory dip = flat;
  dip.records[2].true_robust_err = 0.1;
  dip.records[3].wb_l1 = 0.0;
  s = afo_report(dip, spec, 0.0);
  CHECK(s.best_step == 2);
  CHECK(s.robust_gap == doctest::Approx(0.1));
  CHECK(s.robust_overshoot());
  CHECK(s.closest_step == 3);
  CHECK(s.weight_overshoot());
  CHECK_THROWS_AS(afo_report(Trajectory{}, spec, 0.0), InvalidArgument);
}

TEST_CASE("zero budget reduces to standard training") {
  auto cfg = short_run();
  cfg.eps = 0.0;
  const auto traj = adversarial_train_linear(cfg);
  for (const auto& r : traj.records) CHECK(r.true_robust_err == r.true_std_err);
}

TEST_CASE("trajectory csv") {
  auto cfg = short_run();
  cfg.steps = 3;
  const auto traj = adversarial_train_linear(cfg);
  const auto path = (std::filesystem::temp_directory_path() / "avlab_traj.csv").string();
  write_trajectory_csv(traj, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,wb_l1,wa_mean,adv_loss,true_robust_err,true_std_err");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  std::filesystem::remove(path);
}
