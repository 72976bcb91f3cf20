#include "avlab/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "avlab/afo.hpp"
#include "avlab/config.hpp"
#include "avlab/error.hpp"
#include "avlab/harness.hpp"
#include "avlab/parallel.hpp"
#include "avlab/report.hpp"
#include "avlab/theory.hpp"
#include "avlab/theory_checks.hpp"

namespace fs = std::filesystem;

namespace avlab {

namespace {

// Usage or configuration problems detected before any work starts.
struct UsageError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t workers = 0;
  std::string out;
  std::vector<std::string> argv;
};

std::string output_dir(const Globals& g) {
  std::string dir = g.out;
  if (dir.empty()) {
    const char* env = std::getenv("AVLAB_OUT");
    dir = env && *env ? env : "avlab_out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path);
}

nlohmann::json run_record(const Globals& g) { return nlohmann::json(g.argv); }

// ---------------------------------------------------------------------------
// theory

struct TheoryArgs {
  std::string check;
  int theorem = 0;
  std::size_t n = 10;
  std::optional<std::size_t> d;
  double sigma_s = 1.0, nu = 0.5;
  PsiSpec psi;
  TheoryCheckOptions opt;
};

int cmd_theory(const TheoryArgs& a, const Globals& g) {
  if (a.check.empty() == (a.theorem == 0))
    throw UsageError("theory: give exactly one of --check or --theorem");
  if (a.theorem != 0) {
    switch (a.theorem) {
      case 1: {
        if (!(a.nu >= 0.0 && a.nu <= 1.0))
          throw UsageError("theory: --nu must lie in [0,1], got " + format_double(a.nu));
        if (!(a.sigma_s > 0.0)) throw UsageError("theory: --sigma-s must be positive");
        if (a.n == 0) throw UsageError("theory: --n must be >= 1");
        std::printf("eps_bound %.10g\n", theorem1_eps_bound(a.n, a.sigma_s, a.nu));
        const std::size_t d = a.d.value_or(100);
        std::printf("probability %.10g\n", theorem1_probability(d, a.sigma_s, a.nu));
        std::printf("standard_error_bound %.10g\n", schmidt_standard_bound(a.n, d, a.sigma_s));
        std::printf("corollary1_slope %.10g\n", corollary1_slope(a.n, a.sigma_s));
        return kExitOk;
      }
      case 2:
      case 3: {
        PsiSpec spec = a.psi;
        spec.d = a.d.value_or(spec.d);
        try {
          spec.validate();
        } catch (const InvalidArgument& e) {
          throw UsageError(std::string("theory: ") + e.what());
        }
        const double wb = a.theorem == 2 ? theorem2_optimal_wb(spec) : theorem3_optimal_wb(spec);
        std::printf("optimal_wb %.10g\n", wb);
        if (a.theorem == 3) std::printf("approx_wb %.10g\n", theorem3_approx_wb(spec));
        return kExitOk;
      }
      default:
        throw UsageError("theory: --theorem must be 1, 2 or 3");
    }
  }
  TheoryCheckOptions opt = a.opt;
  opt.seed = g.seed;
  std::vector<CheckRow> rows;
  try {
    rows = run_theory_checks(a.check, opt);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("theory: ") + e.what());
  }
  const std::string dir = output_dir(g);
  write_check_csv(rows, join(dir, "theory.csv"));
  nlohmann::json cfg = {{"check", a.check},
                        {"closed_form_configs", opt.closed_form_configs},
                        {"mc_samples", opt.mc_samples},
                        {"mc_sigmas", opt.mc_sigmas},
                        {"theorem1_trials", opt.theorem1_trials},
                        {"optima_specs", opt.optima_specs}};
  auto manifest = make_manifest("theory", cfg, g.seed);
  manifest["argv"] = run_record(g);
  write_json(manifest, join(dir, "theory_manifest.json"));
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.pass;
  std::printf("theory checks: %zu rows, %zu failed -> %s\n", rows.size(), failed,
              join(dir, "theory.csv").c_str());
  for (const auto& r : rows)
    if (!r.pass)
      std::printf("  FAIL %s %s expected %.6g observed %.6g tol %.3g\n", r.check.c_str(),
                  r.item.c_str(), r.expected, r.observed, r.tolerance);
  return failed == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// afo

struct AfoArgs {
  AfoRunConfig run;
  std::string labels = "hard";
  std::string loss = "logistic";
};

double parse_smoothed(const std::string& labels) {
  if (labels == "hard") return 1.0;
  const std::string prefix = "smoothed:";
  if (labels.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string v = labels.substr(prefix.size());
      const double lam = std::stod(v, &used);
      if (used == v.size()) return lam;
    } catch (const std::exception&) {
    }
  }
  throw UsageError("afo: --labels must be 'hard' or 'smoothed:<lambda>', got '" + labels + "'");
}

nlohmann::json summary_json(const AfoSummary& s, const AfoRunConfig& c) {
  return {{"label_lambda", c.label_lambda},
          {"eps", c.eps},
          {"final_step", s.final_step},
          {"final_wb_l1", s.final_wb_l1},
          {"best_robust_step", s.best_step},
          {"best_robust_err", s.best_robust_err},
          {"final_robust_err", s.final_robust_err},
          {"robust_gap", s.robust_gap},
          {"best_std_step", s.best_std_step},
          {"best_std_err", s.best_std_err},
          {"final_std_err", s.final_std_err},
          {"target_wb", s.target_wb},
          {"closest_step", s.closest_step},
          {"closest_distance", s.closest_distance},
          {"final_distance", s.final_distance}};
}

void print_summary(const char* label, const AfoSummary& s) {
  std::printf(
      "%s: final ||w_B||_1 %.6g | robust err best %.6g at step %zu, final %.6g (gap %.3g) | "
      "|w_B - w*_B| min %.4g at step %zu, final %.4g\n",
      label, s.final_wb_l1, s.best_robust_err, s.best_step, s.final_robust_err, s.robust_gap,
      s.closest_distance, s.closest_step, s.final_distance);
}

int cmd_afo(AfoArgs a, const Globals& g) {
  if (a.loss == "logistic") {
    a.run.loss = AfoLoss::kLogistic;
  } else if (a.loss == "softplus-margin") {
    a.run.loss = AfoLoss::kSoftplusMargin;
  } else {
    throw UsageError("afo: --loss must be logistic or softplus-margin");
  }
  const double lam = parse_smoothed(a.labels);
  a.run.seed = g.seed;
  AfoRunConfig hard = a.run;
  hard.label_lambda = 1.0;
  AfoRunConfig soft = a.run;
  soft.label_lambda = lam < 1.0 ? lam : 0.8;
  try {
    hard.validate();
    soft.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("afo: ") + e.what());
  }
  const double target = theorem3_optimal_wb(a.run.spec);
  const Trajectory th = adversarial_train_linear(hard);
  const Trajectory ts = adversarial_train_linear(soft);
  const AfoSummary sh = afo_report(th, hard.spec, target);
  const AfoSummary ss = afo_report(ts, soft.spec, target);

  const bool collapsed = sh.final_wb_l1 < 1e-3;
  const bool signature = collapsed && sh.robust_overshoot();
  const bool mitigated =
      ss.final_wb_l1 > sh.final_wb_l1 && ss.final_robust_err <= sh.final_robust_err;

  const std::string dir = output_dir(g);
  write_trajectory_csv(th, join(dir, "afo_hard.csv"));
  write_trajectory_csv(ts, join(dir, "afo_soft.csv"));
  const auto& sp = a.run.spec;
  nlohmann::json cfg = {{"d", sp.d},          {"c", sp.c},
                        {"eta", sp.eta},      {"sigma_a", sp.sigma_a},
                        {"sigma_b", sp.sigma_b}, {"eps", a.run.eps},
                        {"steps", a.run.steps}, {"lr", a.run.lr},
                        {"loss", a.loss},     {"labels", a.labels},
                        {"train_size", a.run.train_size}, {"batch_size", a.run.batch_size}};
  auto manifest = make_manifest("afo", cfg, g.seed);
  manifest["argv"] = run_record(g);
  manifest["hard"] = summary_json(sh, hard);
  manifest["soft"] = summary_json(ss, soft);
  manifest["afo_signature"] = signature;
  manifest["mitigated"] = mitigated;
  write_json(manifest, join(dir, "afo_summary.json"));

  print_summary("hard", sh);
  std::string soft_label = "soft(" + format_double(soft.label_lambda) + ")";
  print_summary(soft_label.c_str(), ss);
  std::printf("w*_B per coordinate (true law) %.6g\n", target);
  std::printf("AFO signature (w_B collapsed, robust error best before final): %s\n",
              signature ? "detected" : "not detected");
  std::printf("soft-label mitigation (larger ||w_B||_1, robust error no worse): %s\n",
              mitigated ? "yes" : "no");
  return signature && mitigated ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// harness commands

struct ExperimentArgs {
  std::string config_path;
  std::optional<std::string> defense;
  std::optional<double> gamma, lambda1, lambda2, eps, lr, noise_sigma;
  std::optional<std::size_t> steps, batch_size;
  std::optional<std::string> name, attacks;
  std::vector<std::string> checkpoints;
  std::string attack = "pgd20";
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : text) {
    if (ch == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (ch != ' ') {
      item.push_back(ch);
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

ExperimentConfig resolve_config(const ExperimentArgs& a, const Globals& g,
                                const std::string& fallback_config = "") {
  ExperimentConfig cfg;
  try {
    std::string path = a.config_path.empty() ? fallback_config : a.config_path;
    if (!path.empty()) {
      require_file(path, "config file");
      nlohmann::json j = read_config_file(path);
      // A run manifest embeds its resolved config.
      if (j.contains("config") && j.contains("version")) j = j["config"];
      cfg = config_from_json(j);
    }
    if (g.seed_given) cfg.seed = g.seed;
    if (a.defense) {
      const Defense parsed = Defense::parse(*a.defense);
      const AvmixupConfig keep = cfg.defense.avmixup;
      cfg.defense = parsed;
      cfg.defense.avmixup = keep;
    }
    if (a.gamma) cfg.defense.avmixup.gamma = *a.gamma;
    if (a.lambda1) cfg.defense.avmixup.lambda1 = *a.lambda1;
    if (a.lambda2) cfg.defense.avmixup.lambda2 = *a.lambda2;
    if (a.noise_sigma) cfg.defense.noise_sigma = *a.noise_sigma;
    if (a.eps) {
      if (cfg.attack.eps > 0.0) cfg.attack.step_size *= *a.eps / cfg.attack.eps;
      cfg.attack.eps = *a.eps;
    }
    if (a.lr) cfg.train.lr0 = *a.lr;
    if (a.steps) cfg.train.total_steps = *a.steps;
    if (a.batch_size) cfg.train.batch_size = *a.batch_size;
    if (a.name) cfg.name = *a.name;
    if (a.attacks) cfg.eval_attacks = split_list(*a.attacks);
    cfg.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void print_report(const EvalReport& r) {
  for (const auto& [name, acc] : r.accuracy) std::printf("  %-6s %.4f\n", name.c_str(), acc);
}

int cmd_train(const ExperimentArgs& a, const Globals& g) {
  const ExperimentConfig cfg = resolve_config(a, g);
  const Dataset data = load_dataset(cfg.data);
  const TrainResult tr = train(cfg, data);
  const std::string dir = join(output_dir(g), cfg.name);
  fs::create_directories(dir);
  tr.model.save(join(dir, "model.bin"));
  tr.best_model.save(join(dir, "best_model.bin"));
  write_curve_csv(tr.curve, join(dir, "curve.csv"));
  const EvalReport r = evaluate(tr.model, cfg.eval_attacks, data.test, cfg.eval_attack(),
                                derive_seed(cfg.seed, {0xe7a1}), default_workers());
  write_report_csv(report_rows(cfg.name, cfg.defense.name(), r, cfg.train.total_steps),
                   join(dir, "report.csv"));
  auto manifest = make_manifest("train", config_to_json(cfg), cfg.seed);
  manifest["argv"] = run_record(g);
  write_json(manifest, join(dir, "manifest.json"));
  std::printf("trained %s (%s), %zu steps; best PGD val %.4f at step %zu, final %.4f\n",
              cfg.name.c_str(), cfg.defense.name().c_str(), cfg.train.total_steps,
              tr.best_pgd_val(), tr.curve[tr.best_index].step, tr.final_pgd_val());
  print_report(r);
  std::printf("artifacts in %s\n", dir.c_str());
  return kExitOk;
}

// Config saved next to a checkpoint by `train`, if any.
std::string sibling_manifest(const std::string& checkpoint) {
  const fs::path p = fs::path(checkpoint).parent_path() / "manifest.json";
  return fs::is_regular_file(p) ? p.string() : "";
}

MlpModel load_checkpoint(const std::string& path) {
  require_file(path, "checkpoint");
  return MlpModel::load(path);
}

std::string model_label(const std::string& checkpoint) {
  const fs::path p(checkpoint);
  const std::string parent = p.parent_path().filename().string();
  return parent.empty() ? p.stem().string() : parent + "/" + p.stem().string();
}

int cmd_eval(const ExperimentArgs& a, const Globals& g) {
  if (a.checkpoints.size() != 1) throw UsageError("eval: give exactly one --checkpoint");
  const std::string ckpt = a.checkpoints.front();
  require_file(ckpt, "checkpoint");
  const ExperimentConfig cfg = resolve_config(a, g, sibling_manifest(ckpt));
  const MlpModel model = load_checkpoint(ckpt);
  const Dataset data = load_dataset(cfg.data);
  const EvalReport r = evaluate(model, cfg.eval_attacks, data.test, cfg.eval_attack(),
                                derive_seed(cfg.seed, {0xe7a1}), default_workers());
  const std::string dir = output_dir(g);
  write_report_csv(report_rows(model_label(ckpt), cfg.defense.name(), r, cfg.train.total_steps),
                   join(dir, "eval_report.csv"));
  auto manifest = make_manifest("eval", config_to_json(cfg), cfg.seed);
  manifest["argv"] = run_record(g);
  manifest["checkpoint"] = ckpt;
  write_json(manifest, join(dir, "eval_manifest.json"));
  std::printf("eval %s (eps %.6g):\n", ckpt.c_str(), r.eps);
  print_report(r);
  return kExitOk;
}

int cmd_transfer(const ExperimentArgs& a, const Globals& g) {
  if (a.checkpoints.size() < 2) throw UsageError("transfer: give at least two --checkpoint");
  for (const auto& c : a.checkpoints) require_file(c, "checkpoint");
  const ExperimentConfig cfg = resolve_config(a, g, sibling_manifest(a.checkpoints.front()));
  try {
    AttackSpec::parse(a.attack);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  std::vector<std::pair<std::string, MlpModel>> models;
  for (const auto& c : a.checkpoints) models.emplace_back(model_label(c), load_checkpoint(c));
  const Dataset data = load_dataset(cfg.data);
  const TransferMatrix tm = transfer_matrix(models, a.attack, data.test, cfg.eval_attack(),
                                            derive_seed(cfg.seed, {0x7a5f}), default_workers());
  const std::string dir = output_dir(g);
  write_transfer_csv(tm, join(dir, "transfer.csv"));
  auto manifest = make_manifest("transfer", config_to_json(cfg), cfg.seed);
  manifest["argv"] = run_record(g);
  manifest["checkpoints"] = a.checkpoints;
  manifest["attack"] = a.attack;
  write_json(manifest, join(dir, "transfer_manifest.json"));
  std::printf("%s transfer accuracy (row: defender, column: attacker)\n", a.attack.c_str());
  for (std::size_t d = 0; d < tm.names.size(); ++d) {
    std::printf("  %-24s", tm.names[d].c_str());
    for (double v : tm.accuracy[d]) std::printf(" %.4f", v);
    std::printf("   white-box %.4f, black-box %.4f\n", tm.white_box(d), tm.black_box(d));
  }
  return kExitOk;
}

int cmd_appendix_e(const ExperimentArgs& a, const Globals& g) {
  const ExperimentConfig cfg = resolve_config(a, g);
  const double sigma = a.noise_sigma.value_or(cfg.defense.noise_sigma);
  if (!(sigma > 0.0)) throw UsageError("appendix-e: --noise-sigma must be positive");
  const Dataset data = load_dataset(cfg.data);
  const auto rows = appendix_e_experiment(cfg, data, sigma, default_workers());
  const std::string dir = output_dir(g);
  write_appendix_e_csv(rows, join(dir, "appendix_e.csv"));
  auto manifest = make_manifest("appendix-e", config_to_json(cfg), cfg.seed);
  manifest["argv"] = run_record(g);
  manifest["noise_sigma"] = sigma;
  write_json(manifest, join(dir, "appendix_e_manifest.json"));
  std::printf("%-12s %-8s %-8s\n", "setting", "clean", "noise");
  for (const auto& r : rows) std::printf("%-12s %.4f   %.4f\n", r.setting.c_str(), r.clean, r.noise);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"avlab: adversarial robustness desk lab"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  Globals g;
  g.argv = args;
  auto* seed_opt = app.add_option("--seed", g.seed, "Root seed for every random stream");
  app.add_option("--workers", g.workers, "Worker threads for sharded evaluation (0: default)");
  app.add_option("--out", g.out, "Output directory (default: $AVLAB_OUT or ./avlab_out)");

  // theory
  TheoryArgs ta;
  auto* theory = app.add_subcommand("theory", "Closed forms, bounds and optima of the Gaussian models");
  theory->fallthrough();
  theory->add_option("--check", ta.check, "all | closed-form | theorem1 | optima | bounds");
  theory->add_option("--theorem", ta.theorem, "Print the quantities of theorem 1, 2 or 3");
  theory->add_option("--n", ta.n, "Training-set size");
  theory->add_option("--d", ta.d, "Dimension (theorem 1) or non-robust feature count (2, 3)");
  theory->add_option("--sigma-s", ta.sigma_s, "Noise level sigma_s");
  theory->add_option("--nu", ta.nu, "Ratio sigma_r / sigma_s in [0, 1]");
  theory->add_option("--c", ta.psi.c, "Insufficient non-robust feature count");
  theory->add_option("--eta", ta.psi.eta, "Weak correlation eta");
  theory->add_option("--sigma-a", ta.psi.sigma_a, "sigma_A");
  theory->add_option("--sigma-b", ta.psi.sigma_b, "sigma_B");
  theory->add_option("--mc-samples", ta.opt.mc_samples, "Monte Carlo samples per closed-form check");
  theory->add_option("--trials", ta.opt.theorem1_trials, "Classifier pairs per theorem 1 check");

  // afo
  AfoArgs fa;
  auto* afo = app.add_subcommand("afo", "Adversarial training of the simplex linear classifier");
  afo->fallthrough();
  afo->add_option("--eps", fa.run.eps, "l_inf budget (0: standard training control)");
  afo->add_option("--steps", fa.run.steps, "Training steps");
  afo->add_option("--lr", fa.run.lr, "Step size");
  afo->add_option("--loss", fa.loss, "logistic | softplus-margin");
  afo->add_option("--labels", fa.labels, "hard | smoothed:<lambda>");
  afo->add_option("--train-size", fa.run.train_size, "Fixed training set size (0: fresh batches)");
  afo->add_option("--batch-size", fa.run.batch_size, "Batch size in fresh-batch mode");
  afo->add_option("--d", fa.run.spec.d, "Non-robust feature count d");
  afo->add_option("--c", fa.run.spec.c, "Insufficient non-robust feature count c");
  afo->add_option("--eta", fa.run.spec.eta, "Weak correlation eta");
  afo->add_option("--sigma-a", fa.run.spec.sigma_a, "sigma_A");
  afo->add_option("--sigma-b", fa.run.spec.sigma_b, "sigma_B");

  // harness commands share one argument set
  ExperimentArgs ea;
  auto add_experiment = [&](CLI::App* sub) {
    sub->fallthrough();
    sub->add_option("--config", ea.config_path, "Config file (key=value sections or .json)");
    sub->add_option("--name", ea.name, "Run name");
    sub->add_option("--steps", ea.steps, "Training steps");
    sub->add_option("--batch-size", ea.batch_size, "Minibatch size");
    sub->add_option("--lr", ea.lr, "Initial learning rate");
    sub->add_option("--eps", ea.eps, "Attack budget (train and eval)");
    sub->add_option("--attacks", ea.attacks, "Comma list: clean,fgsm,pgd10,pgd20,cw20");
  };
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  add_experiment(train_cmd);
  train_cmd->add_option("--defense", ea.defense,
                        "standard | pgd-at | ls:<l> | mixup | avmixup | noisy-mixup:<s> | gvrm:<s>");
  train_cmd->add_option("--gamma", ea.gamma, "AVmixup scaling factor");
  train_cmd->add_option("--lambda1", ea.lambda1, "AVmixup label smoothing for the raw input");
  train_cmd->add_option("--lambda2", ea.lambda2, "AVmixup label smoothing for the vertex");
  train_cmd->add_option("--noise-sigma", ea.noise_sigma, "Noise level of noisy-mixup / gvrm");
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint under white-box attacks");
  add_experiment(eval_cmd);
  eval_cmd->add_option("--checkpoint", ea.checkpoints, "Model checkpoint")->required();
  auto* transfer_cmd = app.add_subcommand("transfer", "Transfer black-box matrix");
  add_experiment(transfer_cmd);
  transfer_cmd->add_option("--checkpoint", ea.checkpoints, "Model checkpoints (two or more)")
      ->required();
  transfer_cmd->add_option("--attack", ea.attack, "Attack used to craft examples");
  auto* appe_cmd = app.add_subcommand("appendix-e", "Clean vs noise accuracy of Mixup variants");
  add_experiment(appe_cmd);
  appe_cmd->add_option("--noise-sigma", ea.noise_sigma, "Gaussian noise level");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;
  if (g.workers > 0) set_default_workers(g.workers);

  try {
    if (theory->parsed()) return cmd_theory(ta, g);
    if (afo->parsed()) return cmd_afo(fa, g);
    if (train_cmd->parsed()) return cmd_train(ea, g);
    if (eval_cmd->parsed()) return cmd_eval(ea, g);
    if (transfer_cmd->parsed()) return cmd_transfer(ea, g);
    if (appe_cmd->parsed()) return cmd_appendix_e(ea, g);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace avlab
