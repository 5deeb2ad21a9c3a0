#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "opinf/core.hpp"
#include "opinf/io.hpp"
#include "opinf/pde_models.hpp"

namespace opinf {

enum class Problem { Burgers, Kse };

inline const char* problem_name(Problem p) { return p == Problem::Burgers ? "burgers" : "kse"; }

/// Random test-set initial-condition sampler.  Continuous parameters are
/// drawn uniformly inside the training interval (region = inside, two
/// numbers: lo hi) or uniformly over the two-sided complement
/// [outer_lo, inner_lo) u (inner_hi, outer_hi] (region = outside, four
/// numbers).  Integer-valued parameters (Burgers' frequency) always list the
/// admissible set explicitly.
struct TestSampler {
  std::string name;  // subsection name, e.g. "interpolation"
  Index count = 0;
  std::uint64_t seed = 0;
  bool inside = true;
  std::map<std::string, std::vector<double>> params;
  std::set<std::string> integer_params;
};

/// Declarative description of a training/evaluation run; mirrors the config
/// file schema one-to-one.
struct ExperimentConfig {
  Problem problem = Problem::Burgers;
  Index n = 0;
  double length = 0.0;
  double mu = 0.0;
  double dt = 0.0;
  double T = 0.0;
  Index stride = 1;
  TimeScheme scheme = TimeScheme::SemiImplicitEuler;
  std::map<std::string, std::vector<double>> training_ics;  // param -> value list
  std::vector<TestSampler> test_ics;
  Index r_max = 0;
  std::vector<Index> r_list;
  std::vector<std::string> method_list;
  double ridge = 0.0;
  std::string derivative_mode = "exact-rhs";
  std::string output_dir;
  Index autocorr_k_max = 400;
  Index autocorr_burn_in = 0;
  std::string raw_text;  // verbatim config source, hashed into manifests

  Grid1D grid() const { return Grid1D::uniform(n, length); }
};

namespace config_detail {

struct Entry {
  std::vector<std::string> tokens;
  bool consumed = false;
};

/// Line-oriented key/value text with [section] and [section.sub] headers.
/// '#' starts a comment.  Values are whitespace-separated tokens.  Keys are
/// unique per section; every key must be consumed by the schema, so unknown
/// or misplaced keys are reported as errors.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text) {
    ConfigMap cm;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      const auto trim = [](std::string s) {
        const char* ws = " \t\r\n";
        const auto b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(ws) - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty())
          throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      Entry e;
      std::istringstream toks(val);
      std::string t;
      while (toks >> t) e.tokens.push_back(t);
      auto [it, fresh] = cm.data_[section].emplace(key, std::move(e));
      if (!fresh)
        throw ConfigError("config: duplicate key '" + qualified(section, key) + "'");
    }
    return cm;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
  }

  std::vector<std::string> take(const std::string& section, const std::string& key) {
    auto s = data_.find(section);
    if (s == data_.end() || !s->second.count(key))
      throw ConfigError("config: missing required key '" + qualified(section, key) + "'");
    Entry& e = s->second.at(key);
    e.consumed = true;
    return e.tokens;
  }

  std::optional<std::vector<std::string>> take_optional(const std::string& section,
                                                        const std::string& key) {
    if (!has(section, key)) return std::nullopt;
    return take(section, key);
  }

  std::vector<std::string> sections_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [name, _] : data_)
      if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size())
        out.push_back(name);
    return out;
  }

  void ensure_all_consumed() const {
    std::vector<std::string> unknown;
    for (const auto& [section, keys] : data_)
      for (const auto& [key, entry] : keys)
        if (!entry.consumed) unknown.push_back(qualified(section, key));
    if (!unknown.empty()) {
      std::string msg = "config: unknown key(s):";
      for (const auto& k : unknown) msg += " '" + k + "'";
      throw ConfigError(msg);
    }
  }

 private:
  static std::string qualified(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }
  std::map<std::string, std::map<std::string, Entry>> data_;
};

inline double to_double(const std::string& tok, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + what + "': cannot parse number '" + tok + "'");
  }
}

inline Index to_index(const std::string& tok, const std::string& what) {
  Index v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ConfigError("config: '" + what + "': cannot parse integer '" + tok + "'");
  return v;
}

inline std::string single(std::vector<std::string> toks, const std::string& what) {
  if (toks.size() != 1)
    throw ConfigError("config: '" + what + "' expects exactly one value");
  return toks.front();
}

inline std::vector<double> to_doubles(const std::vector<std::string>& toks,
                                      const std::string& what) {
  std::vector<double> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(to_double(t, what));
  return out;
}

}  // namespace config_detail

inline ExperimentConfig parse_config(const std::string& text) {
  using namespace config_detail;
  ConfigMap cm = ConfigMap::parse(text);
  ExperimentConfig cfg;
  cfg.raw_text = text;

  const std::string problem = single(cm.take("", "problem"), "problem");
  if (problem == "burgers")
    cfg.problem = Problem::Burgers;
  else if (problem == "kse")
    cfg.problem = Problem::Kse;
  else
    throw ConfigError("config: problem must be 'burgers' or 'kse'");

  cfg.n = to_index(single(cm.take("grid", "n"), "grid.n"), "grid.n");
  cfg.length = to_double(single(cm.take("grid", "L"), "grid.L"), "grid.L");
  cfg.mu = to_double(single(cm.take("", "mu"), "mu"), "mu");
  cfg.dt = to_double(single(cm.take("", "dt"), "dt"), "dt");
  cfg.T = to_double(single(cm.take("", "T"), "T"), "T");
  cfg.stride = to_index(single(cm.take("", "stride"), "stride"), "stride");

  const std::string scheme = single(cm.take("", "scheme"), "scheme");
  if (scheme == "semi-implicit-euler")
    cfg.scheme = TimeScheme::SemiImplicitEuler;
  else if (scheme == "cnab2")
    cfg.scheme = TimeScheme::CrankNicolsonAB2;
  else
    throw ConfigError("config: scheme must be 'semi-implicit-euler' or 'cnab2'");

  cfg.r_max = to_index(single(cm.take("", "r_max"), "r_max"), "r_max");
  for (const auto& t : cm.take("", "r_list")) cfg.r_list.push_back(to_index(t, "r_list"));
  cfg.method_list = cm.take("", "method_list");
  for (const auto& meth : cfg.method_list)
    if (meth != "intrusive" && meth != "opinf" && meth != "ep-opinf")
      throw ConfigError("config: unknown method '" + meth + "'");
  cfg.ridge = to_double(single(cm.take("", "ridge"), "ridge"), "ridge");
  cfg.derivative_mode = single(cm.take("", "derivative_mode"), "derivative_mode");
  if (cfg.derivative_mode != "exact-rhs" && cfg.derivative_mode != "finite-difference")
    throw ConfigError("config: derivative_mode must be 'exact-rhs' or 'finite-difference'");
  cfg.output_dir = single(cm.take("", "output_dir"), "output_dir");
  if (auto v = cm.take_optional("", "autocorr_k_max"))
    cfg.autocorr_k_max = to_index(single(*v, "autocorr_k_max"), "autocorr_k_max");
  if (auto v = cm.take_optional("", "autocorr_burn_in"))
    cfg.autocorr_burn_in = to_index(single(*v, "autocorr_burn_in"), "autocorr_burn_in");

  const std::vector<std::string> ic_param_names =
      cfg.problem == Problem::Burgers ? std::vector<std::string>{"A", "f", "phi"}
                                      : std::vector<std::string>{"a", "b"};
  for (const auto& p : ic_param_names)
    cfg.training_ics[p] = to_doubles(cm.take("training_ics", p), "training_ics." + p);

  for (const auto& section : cm.sections_with_prefix("test_ics.")) {
    TestSampler ts;
    ts.name = section.substr(std::string("test_ics.").size());
    ts.count = to_index(single(cm.take(section, "count"), section + ".count"), section);
    const std::string seed = single(cm.take(section, "seed"), section + ".seed");
    ts.seed = static_cast<std::uint64_t>(std::stoull(seed));
    const std::string region = single(cm.take(section, "region"), section + ".region");
    if (region == "inside")
      ts.inside = true;
    else if (region == "outside")
      ts.inside = false;
    else
      throw ConfigError("config: region must be 'inside' or 'outside'");
    if (cfg.problem == Problem::Burgers) ts.integer_params.insert("f");
    for (const auto& p : ic_param_names) {
      ts.params[p] = to_doubles(cm.take(section, p), section + "." + p);
      const bool is_int = ts.integer_params.count(p) > 0;
      const std::size_t expected = is_int ? ts.params[p].size() : (ts.inside ? 2 : 4);
      if (!is_int && ts.params[p].size() != expected)
        throw ConfigError("config: '" + section + "." + p + "' expects " +
                          std::to_string(expected) + " numbers for region=" + region);
    }
    cfg.test_ics.push_back(std::move(ts));
  }

  cm.ensure_all_consumed();
  return cfg;
}

/// Structural invariants checked at load time.
inline void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.dt > 0)) throw ConfigError("config: dt must be positive");
  if (!(cfg.T > 0)) throw ConfigError("config: T must be positive");
  if (!(cfg.mu > 0)) throw ConfigError("config: mu must be positive");
  if (cfg.stride < 1) throw ConfigError("config: stride must be >= 1");
  if (cfg.n < 4) throw ConfigError("config: grid.n must be >= 4");
  if (!(cfg.length > 0)) throw ConfigError("config: grid.L must be positive");
  if (cfg.r_max < 1) throw ConfigError("config: r_max must be >= 1");
  if (cfg.r_list.empty()) throw ConfigError("config: r_list must be nonempty");
  for (Index r : cfg.r_list)
    if (r < 1 || r > cfg.r_max)
      throw ConfigError("config: r_list entries must lie in [1, r_max]");
  if (cfg.method_list.empty()) throw ConfigError("config: method_list must be nonempty");
  if (cfg.ridge < 0) throw ConfigError("config: ridge must be >= 0");
  if (cfg.autocorr_k_max < 1) throw ConfigError("config: autocorr_k_max must be >= 1");
  if (cfg.autocorr_burn_in < 0) throw ConfigError("config: autocorr_burn_in must be >= 0");
  for (const auto& [p, vals] : cfg.training_ics)
    if (vals.empty()) throw ConfigError("config: training_ics." + p + " is empty");
  for (const auto& ts : cfg.test_ics) {
    if (ts.count < 1) throw ConfigError("config: test sampler count must be >= 1");
    for (const auto& [p, vals] : ts.params) {
      if (ts.integer_params.count(p)) {
        if (vals.empty()) throw ConfigError("config: empty set for " + p);
        continue;
      }
      if (ts.inside) {
        if (!(vals[0] <= vals[1]))
          throw ConfigError("config: inside range for " + p + " must satisfy lo <= hi");
      } else {
        if (!(vals[0] <= vals[1] && vals[1] <= vals[2] && vals[2] <= vals[3]))
          throw ConfigError("config: outside range for " + p + " must be ordered");
        if (vals[1] - vals[0] + vals[3] - vals[2] <= 0)
          throw ConfigError("config: outside region for " + p + " has zero measure");
      }
    }
  }
  if (cfg.problem == Problem::Burgers)
    for (double f : cfg.training_ics.at("f"))
      if (f < 1) throw ConfigError("config: Burgers frequencies must be >= 1");
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig cfg = parse_config(io::read_text_file(path));
  validate_config(cfg);
  return cfg;
}

}  // namespace opinf
