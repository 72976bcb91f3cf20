#include "avlab/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "avlab/error.hpp"
#include "avlab/parallel.hpp"
#include "avlab/rng.hpp"

namespace avlab {

namespace {

// Seed streams of one experiment.
enum Stream : std::uint64_t {
  kInit = 1,
  kBatches = 2,
  kTrainAttack = 3,
  kInterp = 4,
  kNoise = 5,
  kValidation = 6,
  kNoisyTrain = 7,
  kNoisyTest = 8,
};

std::uint64_t name_stream(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw InvalidArgument(what + ": expected a number, got '" + text + "'");
  return v;
}

std::pair<std::string, std::string> split_arg(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {text, ""};
  return {text.substr(0, colon), text.substr(colon + 1)};
}

std::string format_param(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Data

void DatasetConfig::validate() const {
  if (val_size == 0) throw InvalidArgument("dataset: val_size must be positive");
  if (source == "mixture") {
    mixture.validate();
    if (train_size == 0 || test_size == 0)
      throw InvalidArgument("dataset: train_size and test_size must be positive");
  } else if (source == "csv" || source == "idx") {
    if (train_path.empty() || test_path.empty())
      throw InvalidArgument("dataset: " + source + " source needs train_path and test_path");
    if (num_classes < 2) throw InvalidArgument("dataset: num_classes must be >= 2");
  } else {
    throw InvalidArgument("dataset: unknown source '" + source + "' (mixture, csv, idx)");
  }
}

namespace {

LabeledBatch load_file_split(const DatasetConfig& cfg, const std::string& path) {
  if (cfg.source == "csv") return load_csv_raw(path, cfg.num_classes);
  const auto comma = path.find(',');
  if (comma == std::string::npos)
    throw InvalidArgument("dataset: idx path must be 'images,labels', got '" + path + "'");
  return load_idx(path.substr(0, comma), path.substr(comma + 1), cfg.num_classes);
}

}  // namespace

Dataset load_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  Dataset ds;
  LabeledBatch train_all, test;
  if (cfg.source == "mixture") {
    const std::size_t n = cfg.train_size + cfg.val_size + cfg.test_size;
    LabeledBatch all = sample_mixture_raw(cfg.mixture, n, cfg.seed);
    train_all = slice(all, 0, cfg.train_size + cfg.val_size);
    test = slice(all, cfg.train_size + cfg.val_size, n);
    ds.num_classes = cfg.mixture.num_classes;
  } else {
    train_all = load_file_split(cfg, cfg.train_path);
    test = load_file_split(cfg, cfg.test_path);
    if (test.dim() != train_all.dim())
      throw InvalidArgument("dataset: train and test feature counts differ");
    ds.num_classes = cfg.num_classes;
  }
  if (train_all.size() <= cfg.val_size)
    throw InvalidArgument("dataset: val_size leaves no training rows");
  const std::size_t n_train = train_all.size() - cfg.val_size;
  ds.train = slice(train_all, 0, n_train);
  ds.val = slice(train_all, n_train, train_all.size());
  ds.test = test;
  if (cfg.source != "idx") {
    const MinMaxScaler scaler = MinMaxScaler::fit(ds.train.x);
    ds.train.x = scaler.apply(ds.train.x);
    ds.val.x = scaler.apply(ds.val.x);
    ds.test.x = scaler.apply(ds.test.x);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Config

Defense Defense::parse(const std::string& text) {
  const auto [head, arg] = split_arg(text);
  Defense d;
  if (head == "standard") {
    d.kind = DefenseKind::kStandard;
  } else if (head == "pgd-at" || head == "pgd") {
    d.kind = DefenseKind::kPgdAt;
  } else if (head == "ls") {
    d.kind = DefenseKind::kLabelSmoothing;
    if (!arg.empty()) d.ls_lambda = parse_number(arg, "defense ls");
  } else if (head == "mixup") {
    d.kind = DefenseKind::kMixup;
  } else if (head == "avmixup") {
    d.kind = DefenseKind::kAvmixup;
  } else if (head == "noisy-mixup") {
    d.kind = DefenseKind::kNoisyMixup;
    if (!arg.empty()) d.noise_sigma = parse_number(arg, "defense noisy-mixup");
  } else if (head == "gvrm") {
    d.kind = DefenseKind::kGvrm;
    if (!arg.empty()) d.noise_sigma = parse_number(arg, "defense gvrm");
  } else {
    throw InvalidArgument("unknown defense '" + text +
                          "' (standard, pgd-at, ls:<lambda>, mixup, avmixup, "
                          "noisy-mixup:<sigma>, gvrm:<sigma>)");
  }
  if (!arg.empty() && (d.kind == DefenseKind::kStandard || d.kind == DefenseKind::kPgdAt ||
                       d.kind == DefenseKind::kMixup || d.kind == DefenseKind::kAvmixup))
    throw InvalidArgument("defense '" + head + "' takes no parameter");
  d.validate();
  return d;
}

std::string Defense::name() const {
  switch (kind) {
    case DefenseKind::kStandard: return "standard";
    case DefenseKind::kPgdAt: return "pgd-at";
    case DefenseKind::kLabelSmoothing: return "ls:" + format_param(ls_lambda);
    case DefenseKind::kMixup: return "mixup";
    case DefenseKind::kAvmixup: return "avmixup";
    case DefenseKind::kNoisyMixup: return "noisy-mixup:" + format_param(noise_sigma);
    case DefenseKind::kGvrm: return "gvrm:" + format_param(noise_sigma);
  }
  return "?";
}

bool Defense::adversarial() const {
  return kind == DefenseKind::kPgdAt || kind == DefenseKind::kLabelSmoothing ||
         kind == DefenseKind::kAvmixup;
}

void Defense::validate() const {
  if (kind == DefenseKind::kLabelSmoothing && !(ls_lambda > 0.0 && ls_lambda <= 1.0))
    throw InvalidArgument("defense ls: lambda must lie in (0,1]");
  if (kind == DefenseKind::kAvmixup) avmixup.validate();
  if ((kind == DefenseKind::kNoisyMixup || kind == DefenseKind::kGvrm) && !(noise_sigma >= 0.0))
    throw InvalidArgument("defense " + name() + ": sigma must be >= 0");
}

void ExperimentConfig::validate() const {
  data.validate();
  if (hidden.empty()) throw InvalidArgument("model: need at least one hidden layer");
  for (std::size_t h : hidden)
    if (h == 0) throw InvalidArgument("model: hidden widths must be positive");
  train.validate();
  attack.validate();
  if (defense.adversarial() && attack.iters == 0)
    throw InvalidArgument("attack: adversarial defenses need iters >= 1");
  defense.validate();
  if (eval_attacks.empty()) throw InvalidArgument("eval: attack list is empty");
  for (const auto& a : eval_attacks) AttackSpec::parse(a);
  if (val_pgd_iters == 0) throw InvalidArgument("eval: val_pgd_iters must be >= 1");
}

std::size_t ExperimentConfig::validation_interval() const {
  return eval_every > 0 ? eval_every : std::max<std::size_t>(1, train.total_steps / 100);
}

AttackConfig ExperimentConfig::eval_attack() const {
  AttackConfig a = attack;
  if (eval_eps >= 0.0) {
    if (attack.eps > 0.0) a.step_size = attack.step_size * eval_eps / attack.eps;
    a.eps = eval_eps;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Attacks over a dataset

AttackSpec AttackSpec::parse(const std::string& name) {
  AttackSpec s;
  std::string lower;
  for (char ch : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  auto iters_after = [&](std::size_t prefix) {
    const std::string digits = lower.substr(prefix);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw InvalidArgument("attack '" + name + "': expected an iteration count suffix");
    const std::size_t n = std::stoul(digits);
    if (n == 0) throw InvalidArgument("attack '" + name + "': iteration count must be >= 1");
    return n;
  };
  if (lower == "clean") {
    s.kind = Kind::kClean;
  } else if (lower == "fgsm") {
    s.kind = Kind::kFgsm;
  } else if (lower.rfind("pgd", 0) == 0) {
    s.kind = Kind::kPgd;
    s.iters = iters_after(3);
  } else if (lower.rfind("cw", 0) == 0) {
    s.kind = Kind::kCw;
    s.iters = iters_after(2);
  } else {
    throw InvalidArgument("unknown attack '" + name + "' (clean, fgsm, pgd<N>, cw<N>)");
  }
  return s;
}

std::string AttackSpec::name() const {
  switch (kind) {
    case Kind::kClean: return "clean";
    case Kind::kFgsm: return "fgsm";
    case Kind::kPgd: return "pgd" + std::to_string(iters);
    case Kind::kCw: return "cw" + std::to_string(iters);
  }
  return "?";
}

double EvalReport::at(const std::string& attack) const {
  for (const auto& [name, acc] : accuracy)
    if (name == attack) return acc;
  throw InvalidArgument("EvalReport: no entry for attack '" + attack + "'");
}

namespace {

void check_compatible(const MlpModel& model, const LabeledBatch& data) {
  if (model.input_dim() != data.dim())
    throw InvalidArgument("model expects " + std::to_string(model.input_dim()) +
                          " features, data has " + std::to_string(data.dim()));
  const int k = static_cast<int>(model.num_classes());
  for (int y : data.y)
    if (y < 0 || y >= k)
      throw InvalidArgument("label " + std::to_string(y) + " outside the model's " +
                            std::to_string(k) + " classes");
}

std::size_t shard_count(std::size_t n) { return (n + kEvalShard - 1) / kEvalShard; }

double sharded_accuracy(const MlpModel& model, const Tensor& x, std::span<const int> y,
                        std::size_t workers) {
  const std::size_t n = y.size();
  const std::size_t d = x.cols();
  std::vector<std::size_t> correct(shard_count(n), 0);
  parallel_chunks(correct.size(), workers, [&](std::size_t c) {
    const std::size_t b = c * kEvalShard, e = std::min(n, b + kEvalShard);
    auto xv = x.data();
    Tensor part({e - b, d}, std::vector<double>(xv.begin() + b * d, xv.begin() + e * d));
    const auto pred = predict(model, part);
    for (std::size_t i = 0; i < pred.size(); ++i) correct[c] += pred[i] == y[b + i];
  });
  return static_cast<double>(std::accumulate(correct.begin(), correct.end(), std::size_t{0})) /
         static_cast<double>(n);
}

}  // namespace

Tensor generate_adversarial(const MlpModel& model, const LabeledBatch& data, const AttackSpec& spec,
                            const AttackConfig& base, std::uint64_t seed, std::size_t workers) {
  check_compatible(model, data);
  base.validate();
  if (spec.kind == AttackSpec::Kind::kClean) return data.x;
  const std::size_t n = data.size(), d = data.dim();
  std::vector<double> out(n * d);
  AttackConfig cfg = base;
  cfg.iters = spec.iters;
  parallel_chunks(shard_count(n), workers, [&](std::size_t c) {
    const std::size_t b = c * kEvalShard, e = std::min(n, b + kEvalShard);
    const LabeledBatch part = slice(data, b, e);
    const std::uint64_t s = derive_seed(seed, {c});
    Tensor adv;
    switch (spec.kind) {
      case AttackSpec::Kind::kFgsm: adv = fgsm(model, part.x, part.y, cfg); break;
      case AttackSpec::Kind::kPgd: adv = pgd(model, part.x, part.y, cfg, s); break;
      case AttackSpec::Kind::kCw: adv = cw_pgd(model, part.x, part.y, cfg, s); break;
      case AttackSpec::Kind::kClean: break;
    }
    std::copy(adv.data().begin(), adv.data().end(), out.begin() + b * d);
  });
  return Tensor({n, d}, std::move(out));
}

EvalReport evaluate(const MlpModel& model, const std::vector<std::string>& attacks,
                    const LabeledBatch& test, const AttackConfig& base, std::uint64_t seed,
                    std::size_t workers) {
  check_compatible(model, test);
  if (attacks.empty()) throw InvalidArgument("evaluate: attack list is empty");
  EvalReport report;
  report.eps = base.eps;
  report.seed = seed;
  for (const auto& name : attacks) {
    const AttackSpec spec = AttackSpec::parse(name);
    const Tensor adv =
        generate_adversarial(model, test, spec, base, derive_seed(seed, {name_stream(spec.name())}),
                             workers);
    report.accuracy.emplace_back(spec.name(), sharded_accuracy(model, adv, test.y, workers));
  }
  return report;
}

double TransferMatrix::black_box(std::size_t defender) const {
  double best = 1.0;
  bool any = false;
  for (std::size_t a = 0; a < names.size(); ++a) {
    if (a == defender) continue;
    best = any ? std::min(best, accuracy.at(defender).at(a)) : accuracy.at(defender).at(a);
    any = true;
  }
  if (!any) throw InvalidArgument("TransferMatrix: need at least two models");
  return best;
}

TransferMatrix transfer_matrix(const std::vector<std::pair<std::string, MlpModel>>& models,
                               const std::string& attack, const LabeledBatch& test,
                               const AttackConfig& base, std::uint64_t seed, std::size_t workers) {
  if (models.size() < 2) throw InvalidArgument("transfer_matrix: need at least two models");
  const auto& ref = models.front().second;
  for (const auto& [name, m] : models) {
    if (m.input_dim() != ref.input_dim() || m.num_classes() != ref.num_classes())
      throw InvalidArgument("transfer_matrix: model '" + name +
                            "' does not share input dim and class count with '" +
                            models.front().first + "'");
    check_compatible(m, test);
  }
  const AttackSpec spec = AttackSpec::parse(attack);
  TransferMatrix tm;
  const std::size_t m = models.size();
  tm.accuracy.assign(m, std::vector<double>(m, 0.0));
  for (const auto& [name, model] : models) tm.names.push_back(name);
  for (std::size_t a = 0; a < m; ++a) {
    const Tensor adv = generate_adversarial(models[a].second, test, spec, base,
                                            derive_seed(seed, {name_stream(spec.name())}),
                                            workers);
    for (std::size_t d = 0; d < m; ++d)
      tm.accuracy[d][a] = sharded_accuracy(models[d].second, adv, test.y, workers);
  }
  return tm;
}

// ---------------------------------------------------------------------------
// Training

std::vector<std::size_t> validation_steps(std::size_t total_steps, std::size_t interval) {
  if (interval == 0) throw InvalidArgument("validation_steps: interval must be positive");
  std::vector<std::size_t> steps;
  for (std::size_t t = interval; t <= total_steps; t += interval) steps.push_back(t);
  if (steps.empty() || steps.back() != total_steps) steps.push_back(total_steps);
  return steps;
}

namespace {

// Epoch-wise shuffled minibatch indices; the last partial batch of an epoch
// is dropped.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed)
      : perm_(n), batch_(std::min(batch, n)), rng_(make_rng(seed)), pos_(n) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  }

  std::vector<std::size_t> next() {
    if (pos_ + batch_ > perm_.size()) {
      std::shuffle(perm_.begin(), perm_.end(), rng_);
      pos_ = 0;
    }
    std::vector<std::size_t> idx(perm_.begin() + pos_, perm_.begin() + pos_ + batch_);
    pos_ += batch_;
    return idx;
  }

 private:
  std::vector<std::size_t> perm_;
  std::size_t batch_;
  Rng rng_;
  std::size_t pos_;
};

Tensor noisy_copy(const Tensor& x, double sigma, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return gaussian_noise_augment(x, sigma, rng);
}

}  // namespace

TrainResult train(const ExperimentConfig& config, const Dataset& data) {
  config.validate();
  const LabeledBatch& tr = data.train;
  tr.validate();
  if (tr.size() == 0) throw InvalidArgument("train: empty training split");
  const std::size_t k = static_cast<std::size_t>(data.num_classes);
  const std::uint64_t seed = config.seed;

  std::vector<std::size_t> sizes{tr.dim()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(k);
  TrainResult result;
  result.model = MlpModel::init(sizes, derive_seed(seed, {kInit}));
  MlpModel& model = result.model;
  check_compatible(model, tr);
  check_compatible(model, data.val);

  const Defense& def = config.defense;
  const TrainConfig& tc = config.train;
  BatchSampler sampler(tr.size(), tc.batch_size, derive_seed(seed, {kBatches}));
  SgdState sgd;

  Tensor noisy_train;
  if (def.kind == DefenseKind::kNoisyMixup)
    noisy_train = noisy_copy(tr.x, def.noise_sigma, derive_seed(seed, {kNoisyTrain}));

  AttackConfig val_attack = config.attack;
  val_attack.iters = config.val_pgd_iters;
  const auto checkpoints = validation_steps(tc.total_steps, config.validation_interval());
  std::size_t next_cp = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  for (std::size_t t = 1; t <= tc.total_steps; ++t) {
    const auto idx = sampler.next();
    LabeledBatch batch = gather(tr, idx);
    const std::size_t n = batch.size();
    Tensor x = batch.x;
    std::optional<Tensor> soft;

    try {
      switch (def.kind) {
        case DefenseKind::kStandard:
          break;
        case DefenseKind::kPgdAt:
          x = pgd(model, batch.x, batch.y, config.attack, derive_seed(seed, {kTrainAttack, t}));
          break;
        case DefenseKind::kLabelSmoothing:
          x = pgd(model, batch.x, batch.y, config.attack, derive_seed(seed, {kTrainAttack, t}));
          soft = smooth_labels(batch.y, k, def.ls_lambda);
          break;
        case DefenseKind::kAvmixup: {
          const Tensor adv =
              pgd(model, batch.x, batch.y, config.attack, derive_seed(seed, {kTrainAttack, t}));
          const Tensor delta = sub(adv, batch.x);
          Rng rng = make_rng(seed, {kInterp, t});
          const auto alphas = draw_alphas(n, rng);
          VirtualBatch vb = avmixup(batch.x, batch.y, delta, k, def.avmixup, alphas);
          x = vb.x;
          soft = vb.y_soft;
          break;
        }
        case DefenseKind::kMixup:
        case DefenseKind::kNoisyMixup: {
          const Tensor base_x =
              def.kind == DefenseKind::kNoisyMixup ? gather(LabeledBatch{noisy_train, tr.y, {}}, idx).x
                                                   : batch.x;
          Rng rng = make_rng(seed, {kInterp, t});
          std::vector<std::size_t> partner(n);
          std::iota(partner.begin(), partner.end(), std::size_t{0});
          std::shuffle(partner.begin(), partner.end(), rng);
          const auto alphas = draw_alphas(n, rng);
          const Tensor yi = one_hot(batch.y, k);
          std::vector<int> yj_labels(n);
          for (std::size_t i = 0; i < n; ++i) yj_labels[i] = batch.y[partner[i]];
          const Tensor xj = gather(LabeledBatch{base_x, batch.y, {}}, partner).x;
          VirtualBatch vb = mixup(base_x, yi, xj, one_hot(yj_labels, k), alphas);
          x = vb.x;
          soft = vb.y_soft;
          break;
        }
        case DefenseKind::kGvrm: {
          Rng rng = make_rng(seed, {kNoise, t});
          x = gaussian_noise_augment(batch.x, def.noise_sigma, rng);
          break;
        }
      }

      const Tensor logits = model.forward(x);
      const Tensor loss = soft ? soft_cross_entropy(logits, *soft) : cross_entropy(logits, batch.y);
      loss_sum += loss.item();
      ++loss_count;
      loss.backward();
      sgd_step(model, t, tc, &sgd);
    } catch (const NumericError& e) {
      throw NumericError("train: non-finite value at step " + std::to_string(t) + ": " + e.what());
    }

    if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
      CurvePoint p;
      p.step = t;
      p.train_loss = loss_sum / static_cast<double>(loss_count);
      EvalReport r;
      try {
        r = evaluate(model, {"clean", "pgd" + std::to_string(config.val_pgd_iters)}, data.val,
                     val_attack, derive_seed(seed, {kValidation}), default_workers());
      } catch (const NumericError& e) {
        throw NumericError("train: non-finite value in validation at step " + std::to_string(t) +
                           ": " + e.what());
      }
      p.clean_val_acc = r.accuracy[0].second;
      p.pgd_val_acc = r.accuracy[1].second;
      result.curve.push_back(p);
      if (result.curve.size() == 1 || p.pgd_val_acc > result.best_pgd_val()) {
        result.best_index = result.curve.size() - 1;
        result.best_model = model.clone();
      }
      loss_sum = 0.0;
      loss_count = 0;
      ++next_cp;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Clean vs noise comparison of Mixup variants

std::vector<AppendixERow> appendix_e_experiment(const ExperimentConfig& base, const Dataset& data,
                                                double noise_sigma, std::size_t workers) {
  if (!(noise_sigma > 0.0)) throw InvalidArgument("appendix-e: noise sigma must be positive");
  const Tensor noisy_test = noisy_copy(data.test.x, noise_sigma, derive_seed(base.seed, {kNoisyTest}));
  const LabeledBatch noise_split{noisy_test, data.test.y, {}};

  std::vector<std::pair<std::string, Defense>> settings;
  Defense d;
  d.kind = DefenseKind::kStandard;
  settings.emplace_back("standard", d);
  d.kind = DefenseKind::kMixup;
  settings.emplace_back("mixup", d);
  d.kind = DefenseKind::kGvrm;
  d.noise_sigma = noise_sigma;
  settings.emplace_back("gvrm", d);
  d.kind = DefenseKind::kNoisyMixup;
  settings.emplace_back("noisy-mixup", d);

  std::vector<AppendixERow> rows;
  for (const auto& [label, defense] : settings) {
    ExperimentConfig cfg = base;
    cfg.defense = defense;
    cfg.name = base.name + "-" + label;
    const TrainResult tr = train(cfg, data);
    AppendixERow row;
    row.setting = label;
    row.clean = evaluate(tr.model, {"clean"}, data.test, cfg.eval_attack(), base.seed, workers)
                    .accuracy[0]
                    .second;
    row.noise = evaluate(tr.model, {"clean"}, noise_split, cfg.eval_attack(), base.seed, workers)
                    .accuracy[0]
                    .second;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace avlab
