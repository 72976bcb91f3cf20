#include "avlab/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "avlab/error.hpp"

namespace avlab {

namespace {

int draw_label_pm1(Rng& rng) { return (rng() >> 63) ? 1 : -1; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void GaussianSpec::validate() const {
  if (theta_star.empty()) throw InvalidArgument("GaussianSpec: empty theta_star");
  if (!(sigma > 0.0)) throw InvalidArgument("GaussianSpec: sigma must be positive");
}

GaussianSpec GaussianSpec::canonical(std::size_t d, double sigma) {
  GaussianSpec spec{std::vector<double>(d, 1.0), sigma};
  spec.validate();
  return spec;
}

void PsiSpec::validate() const {
  if (!(c > 0 && c < d)) throw InvalidArgument("PsiSpec: need 0 < c < d");
  if (!(eta >= 0.0 && eta < 1.0)) throw InvalidArgument("PsiSpec: need 0 <= eta < 1");
  if (!(sigma_a > 0.0)) throw InvalidArgument("PsiSpec: sigma_a must be positive");
  if (!(sigma_a < sigma_b)) throw InvalidArgument("PsiSpec: need sigma_a < sigma_b");
}

std::vector<double> psi_means(const PsiSpec& spec, PsiLaw law) {
  spec.validate();
  std::vector<double> m(spec.dim(), spec.eta);
  m[0] = 1.0;
  if (law == PsiLaw::kSample)
    for (std::size_t j = 1; j <= spec.c; ++j) m[j] = 1.0;
  return m;
}

std::vector<double> psi_variances(const PsiSpec& spec, PsiLaw law) {
  spec.validate();
  const double va = spec.sigma_a * spec.sigma_a;
  std::vector<double> v(spec.dim(), spec.sigma_b * spec.sigma_b);
  v[0] = va;
  if (law == PsiLaw::kSample)
    for (std::size_t j = 1; j <= spec.c; ++j) v[j] = va;
  return v;
}

void LabeledBatch::validate() const {
  if (x.rank() != 2 || x.rows() != y.size()) {
    throw InvalidArgument("LabeledBatch: x has shape " + shape_str(x.shape()) + " but " +
                          std::to_string(y.size()) + " labels");
  }
  if (y_soft) {
    if (y_soft->rank() != 2 || y_soft->rows() != y.size())
      throw InvalidArgument("LabeledBatch: y_soft row count mismatch");
    const std::size_t k = y_soft->cols();
    auto s = y_soft->data();
    for (std::size_t i = 0; i < y.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (s[i * k + j] < 0.0) throw InvalidArgument("LabeledBatch: negative soft label");
        acc += s[i * k + j];
      }
      if (std::abs(acc - 1.0) > 1e-9)
        throw InvalidArgument("LabeledBatch: soft label row " + std::to_string(i) +
                              " does not sum to 1");
    }
  }
}

int draw_gaussian(const GaussianSpec& spec, Rng& rng, std::span<double> x) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int y = draw_label_pm1(rng);
  for (std::size_t j = 0; j < x.size(); ++j)
    x[j] = y * spec.theta_star[j] + spec.sigma * normal(rng);
  return y;
}

int draw_psi(const PsiSpec& spec, PsiLaw law, Rng& rng, std::span<double> x) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int y = draw_label_pm1(rng);
  const std::size_t robust_end = law == PsiLaw::kSample ? spec.c + 1 : 1;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j < robust_end) {
      x[j] = y + spec.sigma_a * normal(rng);
    } else {
      x[j] = spec.eta * y + spec.sigma_b * normal(rng);
    }
  }
  return y;
}

namespace {

template <typename Draw>
LabeledBatch sample_batch(std::size_t n, std::size_t dim, std::uint64_t seed, Draw draw) {
  if (n == 0) throw InvalidArgument("sampler: n must be at least 1");
  Rng rng = make_rng(seed);
  std::vector<double> x(n * dim);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = draw(rng, std::span<double>(x.data() + i * dim, dim));
  return LabeledBatch{Tensor({n, dim}, std::move(x)), std::move(y), std::nullopt};
}

}  // namespace

LabeledBatch sample_gaussian(const GaussianSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  return sample_batch(n, spec.dim(), seed,
                      [&](Rng& rng, std::span<double> x) { return draw_gaussian(spec, rng, x); });
}

LabeledBatch sample_psi_true(const PsiSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  return sample_batch(n, spec.dim(), seed, [&](Rng& rng, std::span<double> x) {
    return draw_psi(spec, PsiLaw::kTrue, rng, x);
  });
}

LabeledBatch sample_psi_sample(const PsiSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  return sample_batch(n, spec.dim(), seed, [&](Rng& rng, std::span<double> x) {
    return draw_psi(spec, PsiLaw::kSample, rng, x);
  });
}

std::vector<int> pm1_to_class(std::span<const int> y) {
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1 && y[i] != -1) throw InvalidArgument("pm1_to_class: label not in {-1,+1}");
    out[i] = y[i] > 0 ? 1 : 0;
  }
  return out;
}

std::vector<int> class_to_pm1(std::span<const int> y) {
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw InvalidArgument("class_to_pm1: label not in {0,1}");
    out[i] = y[i] ? 1 : -1;
  }
  return out;
}

MinMaxScaler MinMaxScaler::fit(const Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0) throw InvalidArgument("MinMaxScaler: empty data");
  MinMaxScaler s;
  s.lo.assign(d, 0.0);
  s.hi.assign(d, 0.0);
  auto v = x.data();
  for (std::size_t j = 0; j < d; ++j) {
    double lo = v[j], hi = v[j];
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, v[i * d + j]);
      hi = std::max(hi, v[i * d + j]);
    }
    s.lo[j] = lo;
    s.hi[j] = hi;
  }
  return s;
}

Tensor MinMaxScaler::apply(const Tensor& x) const {
  const std::size_t n = x.rows(), d = x.cols();
  if (d != lo.size()) throw InvalidArgument("MinMaxScaler: column count mismatch");
  auto v = x.data();
  std::vector<double> out(n * d);
  for (std::size_t j = 0; j < d; ++j) {
    const double range = hi[j] - lo[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double t = range > 0.0 ? (v[i * d + j] - lo[j]) / range : 0.0;
      out[i * d + j] = std::clamp(t, 0.0, 1.0);
    }
  }
  return Tensor({n, d}, std::move(out));
}

LabeledBatch load_csv_raw(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);
  std::vector<double> x;
  std::vector<int> y;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = std::string::npos;
      }
      if (used != tok.size() || tok.empty() || !std::isfinite(v)) {
        throw IoError(path + ":" + std::to_string(lineno) + ": malformed field '" + tok + "'");
      }
      fields.push_back(v);
    }
    if (fields.size() < 2)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected label and features");
    const double lab = fields[0];
    if (lab != std::floor(lab) || lab < 0)
      throw IoError(path + ":" + std::to_string(lineno) + ": label must be a nonnegative integer");
    if (lab >= num_classes)
      throw IoError(path + ":" + std::to_string(lineno) + ": label " +
                    std::to_string(static_cast<long>(lab)) + " >= class count " +
                    std::to_string(num_classes));
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                    " features, got " + std::to_string(fields.size() - 1));
    y.push_back(static_cast<int>(lab));
    x.insert(x.end(), fields.begin() + 1, fields.end());
  }
  if (y.empty()) throw IoError("load_csv: " + path + " contains no samples");
  const std::size_t n = y.size();
  return LabeledBatch{Tensor({n, dim}, std::move(x)), std::move(y), std::nullopt};
}

LabeledBatch load_csv(const std::string& path, int num_classes) {
  LabeledBatch raw = load_csv_raw(path, num_classes);
  raw.x = MinMaxScaler::fit(raw.x).apply(raw.x);
  return raw;
}

void save_csv(const LabeledBatch& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_csv: cannot open " + path);
  out.precision(17);
  const std::size_t d = batch.dim();
  auto v = batch.x.data();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out << batch.y[i];
    for (std::size_t j = 0; j < d; ++j) out << ',' << v[i * d + j];
    out << '\n';
  }
  if (!out) throw IoError("save_csv: write failed for " + path);
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw IoError(path + ": truncated header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::vector<unsigned char> read_idx(const std::string& path, std::vector<std::uint32_t>& dims) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_idx: cannot open " + path);
  const std::uint32_t magic = read_be32(in, path);
  // 0x00 0x00 <type 0x08 = unsigned byte> <rank>
  if ((magic >> 8) != 0x08) throw IoError(path + ": unsupported IDX magic (need unsigned byte)");
  const std::uint32_t rank = magic & 0xFF;
  if (rank == 0) throw IoError(path + ": rank 0");
  dims.clear();
  std::size_t total = 1;
  for (std::uint32_t r = 0; r < rank; ++r) {
    dims.push_back(read_be32(in, path));
    total *= dims.back();
  }
  std::vector<unsigned char> bytes(total);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(total)))
    throw IoError(path + ": truncated payload");
  return bytes;
}

}  // namespace

LabeledBatch load_idx(const std::string& images_path, const std::string& labels_path,
                      int num_classes) {
  std::vector<std::uint32_t> idims, ldims;
  auto pixels = read_idx(images_path, idims);
  auto labels = read_idx(labels_path, ldims);
  if (ldims.size() != 1 || idims[0] != ldims[0])
    throw IoError("load_idx: image/label counts differ");
  const std::size_t n = idims[0];
  if (n == 0) throw IoError("load_idx: no samples");
  const std::size_t dim = pixels.size() / n;
  std::vector<double> x(pixels.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = pixels[i] / 255.0;
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= num_classes)
      throw IoError("load_idx: label " + std::to_string(labels[i]) + " >= class count at sample " +
                    std::to_string(i));
    y[i] = labels[i];
  }
  return LabeledBatch{Tensor({n, dim}, std::move(x)), std::move(y), std::nullopt};
}

void MixtureSpec::validate() const {
  if (num_classes < 2) throw InvalidArgument("mixture: need at least 2 classes");
  if (dim < static_cast<std::size_t>(num_classes))
    throw InvalidArgument("mixture: dim must be >= class count");
  if (!(sigma > 0.0)) throw InvalidArgument("mixture: sigma must be positive");
  if (!(weak_eta >= 0.0)) throw InvalidArgument("mixture: weak_eta must be nonnegative");
}

LabeledBatch sample_mixture_raw(const MixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw InvalidArgument("mixture: n must be at least 1");
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  const std::size_t d = spec.dim;
  std::vector<double> means(k * d, 0.0);
  Rng layout = make_rng(spec.layout_seed, {0x1a7});
  for (std::size_t c = 0; c < k; ++c) {
    means[c * d + c] = spec.separation;
    for (std::size_t j = k; j < d; ++j)
      means[c * d + j] = spec.weak_eta * ((layout() >> 63) ? 1.0 : -1.0);
  }
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, spec.num_classes - 1);
  std::vector<double> x(n * d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = label(rng);
    const double* mu = means.data() + static_cast<std::size_t>(y[i]) * d;
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = mu[j] + spec.sigma * normal(rng);
  }
  return LabeledBatch{Tensor({n, d}, std::move(x)), std::move(y), std::nullopt};
}

LabeledBatch make_kclass_mixture(int num_classes, std::size_t dim, double separation, double sigma,
                                 std::size_t n, std::uint64_t seed) {
  MixtureSpec spec;
  spec.num_classes = num_classes;
  spec.dim = dim;
  spec.separation = separation;
  spec.sigma = sigma;
  LabeledBatch b = sample_mixture_raw(spec, n, seed);
  b.x = MinMaxScaler::fit(b.x).apply(b.x);
  return b;
}

LabeledBatch slice(const LabeledBatch& batch, std::size_t begin, std::size_t end) {
  if (begin > end || end > batch.size()) throw InvalidArgument("slice: bad range");
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  return gather(batch, rows);
}

LabeledBatch gather(const LabeledBatch& batch, std::span<const std::size_t> rows) {
  const std::size_t d = batch.dim();
  auto xv = batch.x.data();
  std::vector<double> x(rows.size() * d);
  std::vector<int> y(rows.size());
  std::optional<Tensor> soft;
  std::vector<double> sv;
  const std::size_t k = batch.y_soft ? batch.y_soft->cols() : 0;
  if (batch.y_soft) sv.resize(rows.size() * k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= batch.size()) throw InvalidArgument("gather: row out of range");
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(r * d), d, x.begin() + static_cast<std::ptrdiff_t>(i * d));
    y[i] = batch.y[r];
    if (batch.y_soft) {
      auto s = batch.y_soft->data();
      std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(r * k), k, sv.begin() + static_cast<std::ptrdiff_t>(i * k));
    }
  }
  if (batch.y_soft) soft = Tensor({rows.size(), k}, std::move(sv));
  return LabeledBatch{Tensor({rows.size(), d}, std::move(x)), std::move(y), std::move(soft)};
}

}  // namespace avlab
