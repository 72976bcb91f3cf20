#pragma once

// CSV and JSON artifacts. Doubles are written in shortest round-trip form so
// a write/parse cycle reproduces every value and reruns are byte-identical.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "avlab/harness.hpp"

namespace avlab {

std::string version_string();
std::string format_double(double v);

struct ReportRow {
  std::string model;
  std::string defense;
  std::string attack;
  double accuracy = 0.0;
  double eps = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;

  bool operator==(const ReportRow&) const = default;
};

std::vector<ReportRow> report_rows(const std::string& model, const std::string& defense,
                                   const EvalReport& report, std::size_t steps);

// Columns: model,defense,attack,accuracy,eps,steps,seed
void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);
std::vector<ReportRow> read_report_csv(const std::string& path);

// Columns: step,clean_val_acc,pgd_val_acc,train_loss
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);
// Columns: defender,attacker,accuracy
void write_transfer_csv(const TransferMatrix& tm, const std::string& path);
// Columns: setting,clean,noise
void write_appendix_e_csv(const std::vector<AppendixERow>& rows, const std::string& path);

// {version, command, seed, config, config_hash}
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             std::uint64_t seed);
void write_json(const nlohmann::json& j, const std::string& path);

// Writes `text` to `path`, throwing IoError on failure.
void write_text(const std::string& text, const std::string& path);

}  // namespace avlab
