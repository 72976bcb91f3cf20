#include "avlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "avlab/error.hpp"

namespace avlab {

using nlohmann::json;

nlohmann::json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  const auto& d = c.data;
  j["data"] = {{"source", d.source},
               {"num_classes", d.source == "mixture" ? d.mixture.num_classes : d.num_classes},
               {"dim", d.mixture.dim},
               {"separation", d.mixture.separation},
               {"sigma", d.mixture.sigma},
               {"weak_eta", d.mixture.weak_eta},
               {"layout_seed", d.mixture.layout_seed},
               {"train_size", d.train_size},
               {"val_size", d.val_size},
               {"test_size", d.test_size},
               {"seed", d.seed},
               {"train_path", d.train_path},
               {"test_path", d.test_path}};
  j["model"] = {{"hidden", c.hidden}};
  const auto& t = c.train;
  j["train"] = {{"steps", t.total_steps},       {"batch_size", t.batch_size},
                {"lr", t.lr0},                  {"decay_factor", t.decay_factor},
                {"decay_points", t.decay_points}, {"weight_decay", t.weight_decay},
                {"momentum", t.momentum},       {"eval_every", c.eval_every},
                {"val_pgd_iters", c.val_pgd_iters}};
  const auto& a = c.attack;
  j["attack"] = {{"eps", a.eps},         {"step_size", a.step_size}, {"iters", a.iters},
                 {"random_start", a.random_start}, {"clip_lo", a.clip_lo}, {"clip_hi", a.clip_hi}};
  const auto& df = c.defense;
  std::string kind = df.name();
  kind = kind.substr(0, kind.find(':'));
  j["defense"] = {{"kind", kind},
                  {"ls_lambda", df.ls_lambda},
                  {"gamma", df.avmixup.gamma},
                  {"lambda1", df.avmixup.lambda1},
                  {"lambda2", df.avmixup.lambda2},
                  {"clip_to_range", df.avmixup.clip_to_range},
                  {"noise_sigma", df.noise_sigma}};
  j["eval"] = {{"attacks", c.eval_attacks}, {"eps", c.eval_eps}};
  return j;
}

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw InvalidArgument(where_ + ": expected an object");
  }
  ~Reader() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  const json& raw(const std::string& key) const { return obj_.at(key); }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) fail(key, "a number");
    out = v.get<double>();
  }
  template <class U>
  void count(const std::string& key, U& out) {
    if (!has(key)) return;
    out = static_cast<U>(to_count(key, obj_.at(key)));
  }
  void flag(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "true or false");
    out = v.get<bool>();
  }
  void text(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_string()) fail(key, "a string");
    out = v.get<std::string>();
  }
  void counts(const std::string& key, std::vector<std::size_t>& out) {
    if (!has(key)) return;
    out.clear();
    for (const json& v : as_list(obj_.at(key))) out.push_back(to_count(key, v));
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    for (const json& v : as_list(obj_.at(key))) {
      if (!v.is_number()) fail(key, "a list of numbers");
      out.push_back(v.get<double>());
    }
  }
  void texts(const std::string& key, std::vector<std::string>& out) {
    if (!has(key)) return;
    out.clear();
    for (const json& v : as_list(obj_.at(key))) {
      if (!v.is_string()) fail(key, "a list of names");
      out.push_back(v.get<std::string>());
    }
  }

  // Rejects keys nobody asked about.
  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw InvalidArgument(where_ + ": unknown key '" + key + "'");
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& expected) const {
    throw InvalidArgument(where_ + "." + key + ": expected " + expected);
  }
  static json as_list(const json& v) { return v.is_array() ? v : json::array({v}); }
  std::uint64_t to_count(const std::string& key, const json& v) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) fail(key, "a non-negative integer");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && std::floor(d) == d && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail(key, "a non-negative integer");
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  Reader top(j, "config");
  top.text("name", c.name);
  top.count("seed", c.seed);
  if (top.has("data")) {
    Reader r(top.raw("data"), "data");
    auto& d = c.data;
    r.text("source", d.source);
    int k = d.mixture.num_classes;
    r.count("num_classes", k);
    d.mixture.num_classes = k;
    d.num_classes = k;
    r.count("dim", d.mixture.dim);
    r.number("separation", d.mixture.separation);
    r.number("sigma", d.mixture.sigma);
    r.number("weak_eta", d.mixture.weak_eta);
    r.count("layout_seed", d.mixture.layout_seed);
    r.count("train_size", d.train_size);
    r.count("val_size", d.val_size);
    r.count("test_size", d.test_size);
    r.count("seed", d.seed);
    r.text("train_path", d.train_path);
    r.text("test_path", d.test_path);
    r.finish();
  }
  if (top.has("model")) {
    Reader r(top.raw("model"), "model");
    r.counts("hidden", c.hidden);
    r.finish();
  }
  if (top.has("train")) {
    Reader r(top.raw("train"), "train");
    auto& t = c.train;
    r.count("steps", t.total_steps);
    r.count("batch_size", t.batch_size);
    r.number("lr", t.lr0);
    r.number("decay_factor", t.decay_factor);
    r.numbers("decay_points", t.decay_points);
    r.number("weight_decay", t.weight_decay);
    r.number("momentum", t.momentum);
    r.count("eval_every", c.eval_every);
    r.count("val_pgd_iters", c.val_pgd_iters);
    r.finish();
  }
  if (top.has("attack")) {
    Reader r(top.raw("attack"), "attack");
    auto& a = c.attack;
    r.number("eps", a.eps);
    r.number("step_size", a.step_size);
    r.count("iters", a.iters);
    r.flag("random_start", a.random_start);
    r.number("clip_lo", a.clip_lo);
    r.number("clip_hi", a.clip_hi);
    r.finish();
  }
  if (top.has("defense")) {
    Reader r(top.raw("defense"), "defense");
    std::string kind = c.defense.name();
    kind = kind.substr(0, kind.find(':'));
    r.text("kind", kind);
    Defense d = Defense::parse(kind);
    r.number("ls_lambda", d.ls_lambda);
    r.number("gamma", d.avmixup.gamma);
    r.number("lambda1", d.avmixup.lambda1);
    r.number("lambda2", d.avmixup.lambda2);
    r.flag("clip_to_range", d.avmixup.clip_to_range);
    r.number("noise_sigma", d.noise_sigma);
    r.finish();
    c.defense = d;
  }
  if (top.has("eval")) {
    Reader r(top.raw("eval"), "eval");
    r.texts("attacks", c.eval_attacks);
    r.number("eps", c.eval_eps);
    r.finish();
  }
  top.finish();
  c.defense.avmixup.clip_lo = c.attack.clip_lo;
  c.defense.avmixup.clip_hi = c.attack.clip_hi;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

json typed_scalar(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (v == "true") return true;
  if (v == "false") return false;
  if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
    try {
      return static_cast<std::uint64_t>(std::stoull(v));
    } catch (const std::exception&) {
    }
  }
  if (!v.empty() && v[0] == '-' && v.size() > 1 &&
      v.find_first_not_of("0123456789", 1) == std::string::npos) {
    try {
      return static_cast<std::int64_t>(std::stoll(v));
    } catch (const std::exception&) {
    }
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  return v;
}

}  // namespace

nlohmann::json parse_key_value(const std::string& text, const std::string& origin) {
  json root = json::object();
  json* section = &root;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        throw InvalidArgument(where + ": malformed section header '" + s + "'");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (!root.contains(name)) root[name] = json::object();
      if (!root[name].is_object())
        throw InvalidArgument(where + ": section '" + name + "' clashes with a top-level key");
      section = &root[name];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw InvalidArgument(where + ": empty key");
    if (section->contains(key)) throw InvalidArgument(where + ": duplicate key '" + key + "'");
    if (value.find(',') != std::string::npos) {
      json list = json::array();
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) list.push_back(typed_scalar(item));
      (*section)[key] = list;
    } else {
      (*section)[key] = typed_scalar(value);
    }
  }
  return root;
}

nlohmann::json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (!is_json) return parse_key_value(text, path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

std::uint64_t config_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return config_hash(config_to_json(cfg)); }

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace avlab
