#include "avlab/monte_carlo.hpp"

#include <cmath>
#include <vector>

#include "avlab/error.hpp"
#include "avlab/parallel.hpp"

namespace avlab {

namespace {

constexpr std::size_t kChunk = 1 << 16;

// Runs draw(rng, x) -> (label) over `samples` draws in fixed-size chunks and
// accumulates per-chunk sums of f(x, y) and f(x, y)^2.
template <typename Draw, typename F>
McEstimate chunked_mean(std::size_t samples, std::size_t dim, std::uint64_t seed, Draw draw, F f) {
  if (samples < 2) throw InvalidArgument("monte carlo: need at least 2 samples");
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<double> s1(chunks, 0.0), s2(chunks, 0.0);
  parallel_chunks(chunks, default_workers(), [&](std::size_t c) {
    Rng rng = make_rng(seed, {c});
    std::vector<double> x(dim);
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(samples, begin + kChunk);
    double a = 0.0, b = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const int y = draw(rng, std::span<double>(x));
      const double v = f(x, y);
      a += v;
      b += v * v;
    }
    s1[c] = a;
    s2[c] = b;
  });
  double a = 0.0, b = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    a += s1[c];
    b += s2[c];
  }
  const double n = static_cast<double>(samples);
  const double m = a / n;
  const double var = std::max(0.0, (b - n * m * m) / (n - 1.0));
  return McEstimate{m, std::sqrt(var / n), samples};
}

double adversarial_error(std::span<const double> w, const std::vector<double>& x, int y,
                         double eps) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double sw = w[j] > 0.0 ? 1.0 : (w[j] < 0.0 ? -1.0 : 0.0);
    s += w[j] * (x[j] - eps * y * sw);
  }
  const int pred = s >= 0.0 ? 1 : -1;
  return pred != y ? 1.0 : 0.0;
}

}  // namespace

McEstimate mc_robust_error(const LinearModel& model, const GaussianSpec& spec, double eps,
                           std::size_t samples, std::uint64_t seed) {
  model.validate();
  spec.validate();
  if (model.w.size() != spec.dim()) throw InvalidArgument("mc_robust_error: dimension mismatch");
  return chunked_mean(
      samples, spec.dim(), seed,
      [&](Rng& rng, std::span<double> x) { return draw_gaussian(spec, rng, x); },
      [&](const std::vector<double>& x, int y) { return adversarial_error(model.w, x, y, eps); });
}

McEstimate mc_psi_robust_error(std::span<const double> w, const PsiSpec& spec, PsiLaw law,
                               double eps, std::size_t samples, std::uint64_t seed) {
  spec.validate();
  if (w.size() != spec.dim()) throw InvalidArgument("mc_psi_robust_error: dimension mismatch");
  return chunked_mean(
      samples, spec.dim(), seed,
      [&](Rng& rng, std::span<double> x) { return draw_psi(spec, law, rng, x); },
      [&](const std::vector<double>& x, int y) { return adversarial_error(w, x, y, eps); });
}

McEstimate mc_psi_score_variance(std::span<const double> w, const PsiSpec& spec, PsiLaw law,
                                 std::size_t samples, std::uint64_t seed) {
  spec.validate();
  if (w.size() != spec.dim()) throw InvalidArgument("mc_psi_score_variance: dimension mismatch");
  // First pass: mean of y w^T x; second pass: squared deviations. Both passes
  // replay the same stream.
  auto score = [&](const std::vector<double>& x, int y) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
    return y * s;
  };
  auto draw = [&](Rng& rng, std::span<double> x) { return draw_psi(spec, law, rng, x); };
  const McEstimate m = chunked_mean(samples, spec.dim(), seed, draw, score);
  const McEstimate v = chunked_mean(samples, spec.dim(), seed, draw,
                                    [&](const std::vector<double>& x, int y) {
                                      const double dev = score(x, y) - m.mean;
                                      return dev * dev;
                                    });
  const double n = static_cast<double>(samples);
  return McEstimate{v.mean * n / (n - 1.0), v.std_err, samples};
}

}  // namespace avlab
