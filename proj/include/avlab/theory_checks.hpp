#pragma once

// Self-checks of the theory bench: closed forms against sampling, the
// Theorem 1 failure rate against its probability factors, the simplex optima
// against their formulas, and consistency between the bound formulas.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace avlab {

struct CheckRow {
  std::string check;
  std::string item;
  double expected = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct TheoryCheckOptions {
  std::size_t closed_form_configs = 20;
  std::size_t mc_samples = 200000;
  double mc_sigmas = 4.0;  // allowed |closed - MC| in MC standard errors
  std::size_t theorem1_trials = 300;
  std::size_t optima_specs = 10;
  std::uint64_t seed = 0;
};

std::vector<CheckRow> check_closed_form(const TheoryCheckOptions& opt);
std::vector<CheckRow> check_theorem1(const TheoryCheckOptions& opt);
std::vector<CheckRow> check_optima(const TheoryCheckOptions& opt);
std::vector<CheckRow> check_bounds(const TheoryCheckOptions& opt);

// "all", "closed-form", "theorem1", "optima" or "bounds".
std::vector<CheckRow> run_theory_checks(const std::string& which, const TheoryCheckOptions& opt);

// Columns: check,item,expected,observed,tolerance,pass
void write_check_csv(const std::vector<CheckRow>& rows, const std::string& path);

}  // namespace avlab
