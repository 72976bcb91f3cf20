#include <doctest.h>

#include <cmath>
#include <numeric>

#include "avlab/avmixup.hpp"
#include "avlab/error.hpp"
#include "support.hpp"

using namespace avlab;
using avlab::testing::random_tensor;
using avlab::testing::random_uniform;

namespace {

double row_sum(const Tensor& t, std::size_t r) {
  double s = 0.0;
  for (std::size_t j = 0; j < t.cols(); ++j) s += t.at(r, j);
  return s;
}

}  // namespace

TEST_CASE("smooth labels") {
  const auto v = smooth_labels(3, 10, 0.9);
  CHECK(v[3] == 0.9);
  for (std::size_t j = 0; j < 10; ++j)
    if (j != 3) CHECK(v[j] == doctest::Approx(0.1 / 9.0).epsilon(1e-15));
  const auto hard = smooth_labels(1, 4, 1.0);
  CHECK(hard == std::vector<double>{0, 1, 0, 0});
  Rng rng = make_rng(3);
  std::uniform_real_distribution<double> lam(1e-3, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + t % 30;
    const auto s = smooth_labels(t % static_cast<int>(k), k, lam(rng));
    CHECK(std::abs(std::accumulate(s.begin(), s.end(), 0.0) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(smooth_labels(0, 10, 0.0), InvalidArgument);
  CHECK_THROWS_AS(smooth_labels(0, 10, 1.1), InvalidArgument);
  CHECK_THROWS_AS(smooth_labels(0, 1, 0.5), InvalidArgument);
}

TEST_CASE("mixup") {
  const Tensor xi = Tensor::matrix({{0, 2}}), xj = Tensor::matrix({{2, 0}});
  const Tensor yi = Tensor::matrix({{1, 0}}), yj = Tensor::matrix({{0, 1}});
  const auto mid = mixup(xi, yi, xj, yj, 0.5);
  CHECK(mid.x.at(0, 0) == 1.0);
  CHECK(mid.x.at(0, 1) == 1.0);
  CHECK(mid.y_soft.at(0, 0) == 0.5);
  const auto end = mixup(xi, yi, xj, yj, 1.0);
  CHECK(end.x.at(0, 1) == 2.0);
  CHECK(end.y_soft.at(0, 0) == 1.0);
  CHECK_THROWS_AS(mixup(xi, yi, Tensor::matrix({{1, 2, 3}}), yj, 0.5), InvalidArgument);
  CHECK_THROWS_AS(mixup(xi, yi, xj, yj, 1.5), InvalidArgument);

  Rng rng = make_rng(4);
  const auto a = smooth_labels(std::vector<int>{0, 1, 2}, 3, 0.7);
  const auto b = smooth_labels(std::vector<int>{2, 2, 1}, 3, 0.9);
  const auto r = mixup(random_tensor({3, 5}, rng), a, random_tensor({3, 5}, rng), b,
                       std::vector<double>{0.1, 0.5, 0.93});
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(row_sum(r.y_soft, i) - 1.0) <= 1e-12);
}

TEST_CASE("adversarial vertex") {
  const Tensor x = Tensor::matrix({{0.5, 0.5}});
  const Tensor d = Tensor::matrix({{0.1, -0.1}});
  const Tensor v1 = adversarial_vertex(x, d, 1.0);
  CHECK(v1.at(0, 0) == 0.6);
  const Tensor v2 = adversarial_vertex(x, d, 2.0);
  CHECK(v2.at(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(v2.at(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(adversarial_vertex(x, d, 0.5), InvalidArgument);

  // Not clipped to the ball: gamma * eps bounds the offset.
  Rng rng = make_rng(5);
  const double eps = 0.03, gamma = 2.5;
  const Tensor xs = random_uniform({50, 6}, rng, 0.0, 1.0);
  const Tensor ds = random_uniform({50, 6}, rng, -eps, eps);
  const Tensor av = adversarial_vertex(xs, ds, gamma);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(std::abs(av.data()[i] - xs.data()[i]) <= gamma * eps + 1e-15);
}

TEST_CASE("avmixup endpoints and labels") {
  const Tensor x = Tensor::matrix({{0.2, 0.4}, {0.6, 0.8}});
  const Tensor d = Tensor::matrix({{0.01, -0.02}, {0.03, 0.0}});
  const std::vector<int> y{3, 7};
  AvmixupConfig cfg;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 0.1;

  const auto raw = avmixup(x, y, d, 10, cfg, std::vector<double>{1.0, 1.0});
  CHECK(raw.x.at(0, 0) == 0.2);
  CHECK(raw.y_soft.at(0, 3) == 1.0);
  CHECK(raw.y_soft.at(1, 0) == 0.0);

  const auto vert = avmixup(x, y, d, 10, cfg, std::vector<double>{0.0, 0.0});
  const Tensor av = adversarial_vertex(x, d, cfg.gamma);
  CHECK(vert.x.at(0, 1) == av.at(0, 1));
  CHECK(vert.y_soft.at(1, 7) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(vert.y_soft.at(1, 2) == doctest::Approx(0.1).epsilon(1e-15));

  const auto q = avmixup(x, y, d, 10, cfg, std::vector<double>{0.25, 0.25});
  CHECK(q.y_soft.at(0, 3) == doctest::Approx(0.325).epsilon(1e-15));
  CHECK(q.y_soft.at(0, 0) == doctest::Approx(0.075).epsilon(1e-15));

  cfg.lambda2 = 0.0;
  CHECK_THROWS_AS(avmixup(x, y, d, 10, cfg, std::vector<double>{0.5, 0.5}), InvalidArgument);
}

TEST_CASE("avmixup geometry and normalization") {
  Rng rng = make_rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4, d = 5, k = 6;
    const Tensor x = random_uniform({n, d}, rng, 0.0, 1.0);
    const Tensor delta = random_uniform({n, d}, rng, -0.03, 0.03);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(u(rng) * k) % static_cast<int>(k);
    AvmixupConfig cfg;
    cfg.gamma = 1.0 + 2.0 * u(rng);
    cfg.lambda1 = lam(rng);
    cfg.lambda2 = lam(rng);
    const auto alpha = draw_alphas(n, rng);
    const auto out = avmixup(x, y, delta, k, cfg, alpha);
    const Tensor av = adversarial_vertex(x, delta, cfg.gamma);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(row_sum(out.y_soft, i) - 1.0) <= 1e-12);
      // Recover t from the widest coordinate; x_hat = x + t (x_av - x).
      std::size_t j = 0;
      for (std::size_t c = 1; c < d; ++c)
        if (std::abs(av.at(i, c) - x.at(i, c)) > std::abs(av.at(i, j) - x.at(i, j))) j = c;
      const double t = (out.x.at(i, j) - x.at(i, j)) / (av.at(i, j) - x.at(i, j));
      CHECK(std::abs(t - (1.0 - alpha[i])) <= 1e-12);
      for (std::size_t c = 0; c < d; ++c)
        CHECK(std::abs(out.x.at(i, c) - (x.at(i, c) + t * (av.at(i, c) - x.at(i, c)))) <= 1e-12);
    }
  }
}

TEST_CASE("avmixup degenerates to adversarial examples") {
  Rng rng = make_rng(7);
  const Tensor x = random_uniform({5, 3}, rng, 0.0, 1.0);
  const Tensor delta = random_uniform({5, 3}, rng, -0.03, 0.03);
  const std::vector<int> y{0, 1, 2, 1, 0};
  AvmixupConfig cfg;
  cfg.gamma = 1.0;
  cfg.lambda1 = cfg.lambda2 = 1.0;
  const auto out = avmixup(x, y, delta, 3, cfg, std::vector<double>(5, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(out.x.data()[i] == x.data()[i] + delta.data()[i]);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.y_soft.at(i, y[i]) == 1.0);
}

TEST_CASE("optional final clip") {
  const Tensor x = Tensor::matrix({{0.99, 0.01}});
  const Tensor d = Tensor::matrix({{0.03, -0.03}});
  AvmixupConfig cfg;
  cfg.clip_to_range = true;
  const auto out = avmixup(x, std::vector<int>{0}, d, 2, cfg, std::vector<double>{0.0});
  CHECK(out.x.at(0, 0) == 1.0);
  CHECK(out.x.at(0, 1) == 0.0);
  cfg.clip_to_range = false;
  const auto raw = avmixup(x, std::vector<int>{0}, d, 2, cfg, std::vector<double>{0.0});
  CHECK(raw.x.at(0, 0) > 1.0);
}

TEST_CASE("alpha draws") {
  Rng rng = make_rng(8);
  const auto a = draw_alphas(100000, rng);
  double m = 0.0;
  for (double v : a) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    m += v;
  }
  m /= 1e5;
  CHECK(std::abs(m - 0.5) <= 4.0 * std::sqrt(1.0 / 12.0 / 1e5));
}

TEST_CASE("gaussian noise augment") {
  Rng rng = make_rng(9);
  const Tensor x = random_uniform({10, 4}, rng, 0.0, 1.0);
  const Tensor same = gaussian_noise_augment(x, 0.0, rng);
  CHECK(std::equal(same.data().begin(), same.data().end(), x.data().begin()));

  // Far from the clip boundaries the std is untouched.
  const Tensor mid = Tensor::full({1000, 1000}, 0.5);
  const Tensor noisy = gaussian_noise_augment(mid, 0.05, rng);
  double s2 = 0.0;
  for (double v : noisy.data()) s2 += (v - 0.5) * (v - 0.5);
  CHECK(std::abs(std::sqrt(s2 / 1e6) / 0.05 - 1.0) <= 0.02);

  const Tensor wide = gaussian_noise_augment(x, 5.0, rng);
  for (double v : wide.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(gaussian_noise_augment(x, -1.0, rng), InvalidArgument);
}
