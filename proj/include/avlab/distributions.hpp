#pragma once

// Samplers for the binary Gaussian models used by the theory bench and
// dataset plumbing (CSV / IDX / synthetic mixtures) for the neural bench.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avlab/rng.hpp"
#include "avlab/tensor.hpp"

namespace avlab {

// x ~ N(y * theta_star, sigma^2 I), y uniform on {-1, +1}.
struct GaussianSpec {
  std::vector<double> theta_star;
  double sigma = 1.0;

  std::size_t dim() const { return theta_star.size(); }
  void validate() const;

  // All-ones theta_star, so that ||theta_star||_2 = sqrt(d).
  static GaussianSpec canonical(std::size_t d, double sigma);
};

// Robust / non-robust feature model with d + 1 features.
//   true law:    x1 ~ N(y, sa^2), x2..x_{d+1} ~ N(eta y, sb^2)
//   sample law:  x1..x_{c+1} ~ N(y, sa^2), x_{c+2}..x_{d+1} ~ N(eta y, sb^2)
struct PsiSpec {
  std::size_t d = 20;
  std::size_t c = 5;
  double eta = 0.1;
  double sigma_a = 0.1;
  double sigma_b = 1.0;

  std::size_t dim() const { return d + 1; }
  void validate() const;
};

enum class PsiLaw { kTrue, kSample };

// Per-feature means (times y) and variances of a Psi law.
std::vector<double> psi_means(const PsiSpec& spec, PsiLaw law);
std::vector<double> psi_variances(const PsiSpec& spec, PsiLaw law);

struct LabeledBatch {
  Tensor x;                     // [n x dim]
  std::vector<int> y;           // {-1,+1} on the theory bench, {0..k-1} otherwise
  std::optional<Tensor> y_soft;  // [n x k], rows on the simplex

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }
  void validate() const;
};

// Streaming per-sample draw shared by the batch samplers and MC oracles.
int draw_gaussian(const GaussianSpec& spec, Rng& rng, std::span<double> x);
int draw_psi(const PsiSpec& spec, PsiLaw law, Rng& rng, std::span<double> x);

LabeledBatch sample_gaussian(const GaussianSpec& spec, std::size_t n, std::uint64_t seed);
LabeledBatch sample_psi_true(const PsiSpec& spec, std::size_t n, std::uint64_t seed);
LabeledBatch sample_psi_sample(const PsiSpec& spec, std::size_t n, std::uint64_t seed);

// {-1,+1} <-> {0,1}; -1 maps to class 0.
std::vector<int> pm1_to_class(std::span<const int> y);
std::vector<int> class_to_pm1(std::span<const int> y);

// Per-column affine map into [0, 1]. Constant columns map to 0.
struct MinMaxScaler {
  std::vector<double> lo;
  std::vector<double> hi;

  static MinMaxScaler fit(const Tensor& x);
  // Applies the fitted map and clips to [0, 1].
  Tensor apply(const Tensor& x) const;
};

// Rows `label,feat0,feat1,...`; features returned unscaled.
LabeledBatch load_csv_raw(const std::string& path, int num_classes);
// As above, with features min-max scaled into [0, 1] per column.
LabeledBatch load_csv(const std::string& path, int num_classes);
void save_csv(const LabeledBatch& batch, const std::string& path);

// IDX pair (big-endian magic + dims, unsigned bytes). Pixels scaled by 1/255.
LabeledBatch load_idx(const std::string& images_path, const std::string& labels_path,
                      int num_classes);

// k-class Gaussian mixture. Class c has mean separation * e_c in the first k
// coordinates; optional weak features add eta * s_c on the remaining
// coordinates, with s_c a fixed random sign pattern per class. Those weak
// coordinates carry label information but are cheap to flip under an
// l_inf budget.
struct MixtureSpec {
  int num_classes = 10;
  std::size_t dim = 64;
  double separation = 1.0;
  double sigma = 1.0;
  double weak_eta = 0.0;
  std::uint64_t layout_seed = 0;  // seed of the weak sign patterns

  void validate() const;
};

// Unscaled draw; use MinMaxScaler to map into [0, 1].
LabeledBatch sample_mixture_raw(const MixtureSpec& spec, std::size_t n, std::uint64_t seed);
// Scaled into [0, 1] by a scaler fitted on the drawn batch itself.
LabeledBatch make_kclass_mixture(int num_classes, std::size_t dim, double separation, double sigma,
                                 std::size_t n, std::uint64_t seed);

// Rows [begin, end) of a batch.
LabeledBatch slice(const LabeledBatch& batch, std::size_t begin, std::size_t end);
// Selects the given row indices in order.
LabeledBatch gather(const LabeledBatch& batch, std::span<const std::size_t> rows);

}  // namespace avlab
