#include "avlab/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "avlab/config.hpp"
#include "avlab/error.hpp"

#ifndef AVLAB_VERSION
#define AVLAB_VERSION "0.0.0"
#endif

namespace avlab {

std::string version_string() { return std::string("avlab ") + AVLAB_VERSION; }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<ReportRow> report_rows(const std::string& model, const std::string& defense,
                                   const EvalReport& report, std::size_t steps) {
  std::vector<ReportRow> rows;
  for (const auto& [attack, acc] : report.accuracy)
    rows.push_back({model, defense, attack, acc, report.eps, steps, report.seed});
  return rows;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ostringstream s;
  s << "model,defense,attack,accuracy,eps,steps,seed\n";
  for (const auto& r : rows)
    s << r.model << ',' << r.defense << ',' << r.attack << ',' << format_double(r.accuracy) << ','
      << format_double(r.eps) << ',' << r.steps << ',' << r.seed << '\n';
  write_text(s.str(), path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_field(const std::string& text, const std::string& where) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidArgument(where + ": bad value '" + text + "'");
  return v;
}

}  // namespace

std::vector<ReportRow> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "model,defense,attack,accuracy,eps,steps,seed")
    throw InvalidArgument(path + ": unexpected report header");
  std::vector<ReportRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto f = split_csv(line);
    if (f.size() != 7) throw InvalidArgument(where + ": expected 7 fields");
    ReportRow r;
    r.model = f[0];
    r.defense = f[1];
    r.attack = f[2];
    r.accuracy = parse_field<double>(f[3], where);
    r.eps = parse_field<double>(f[4], where);
    r.steps = parse_field<std::size_t>(f[5], where);
    r.seed = parse_field<std::uint64_t>(f[6], where);
    rows.push_back(r);
  }
  return rows;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
  std::ostringstream s;
  s << "step,clean_val_acc,pgd_val_acc,train_loss\n";
  for (const auto& p : curve)
    s << p.step << ',' << format_double(p.clean_val_acc) << ',' << format_double(p.pgd_val_acc)
      << ',' << format_double(p.train_loss) << '\n';
  write_text(s.str(), path);
}

void write_transfer_csv(const TransferMatrix& tm, const std::string& path) {
  std::ostringstream s;
  s << "defender,attacker,accuracy\n";
  for (std::size_t d = 0; d < tm.names.size(); ++d)
    for (std::size_t a = 0; a < tm.names.size(); ++a)
      s << tm.names[d] << ',' << tm.names[a] << ',' << format_double(tm.accuracy[d][a]) << '\n';
  write_text(s.str(), path);
}

void write_appendix_e_csv(const std::vector<AppendixERow>& rows, const std::string& path) {
  std::ostringstream s;
  s << "setting,clean,noise\n";
  for (const auto& r : rows)
    s << r.setting << ',' << format_double(r.clean) << ',' << format_double(r.noise) << '\n';
  write_text(s.str(), path);
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             std::uint64_t seed) {
  nlohmann::json m;
  m["version"] = version_string();
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["config_hash"] = hash_hex(config_hash(config));
  return m;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  write_text(j.dump(2) + "\n", path);
}

}  // namespace avlab
