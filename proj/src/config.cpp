#include "supdtl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <vector>

#include "supdtl/error.hpp"
#include "supdtl/normal.hpp"

namespace supdtl {

namespace {

constexpr int kMaxArms = 8;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"design", {"arms", "shape", "boundaries", "n_per_stage"}},
      {"endpoint",
       {"type", "p_control", "rd_relevant", "rd_uninteresting", "theta_prime", "theta_zero",
        "sigma_sq"}},
      {"calibration", {"alpha", "power", "omega", "max_n", "c_lo", "c_hi"}},
      {"run", {"seed", "reps", "tol"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Entry {
  std::string value;
  int line;
};

double parse_real(const std::string& text, int line) {
  const std::string t = lower(text);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("expected a number, got '" + text + "'", line);
  return v;
}

std::int64_t parse_int(const std::string& text, int line) {
  std::int64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("expected an integer, got '" + text + "'", line);
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(trim(item));
  return out;
}

double parse_effect(const std::string& token, const NormalEffectSpec& eff, int line) {
  static const std::regex symbolic(
      R"(^([+-]?)\s*(?:([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*\*\s*)?(theta_prime|theta_zero)$)");
  std::smatch m;
  if (std::regex_match(token, m, symbolic)) {
    double v = m[3] == "theta_prime" ? eff.theta_prime : eff.theta_zero;
    if (m[2].matched) v *= std::stod(m[2].str());
    if (m[1] == "-") v = -v;
    return v;
  }
  const double v = parse_real(token, line);
  if (!std::isfinite(v)) throw ParseError("effects must be finite", line);
  return v;
}

}  // namespace

NormalEffectSpec ParsedConfig::normal_effects() const {
  if (const auto* b = std::get_if<BinaryEndpointSpec>(&endpoint)) return binary_to_normal(*b);
  return std::get<NormalEffectSpec>(endpoint);
}

TrialDesign ParsedConfig::design_template() const {
  TrialDesign d;
  d.arms = arms;
  d.stages = arms;
  d.n_per_stage = n_per_stage.value_or(1);
  d.alpha = calibration.alpha;
  d.sigma = std::sqrt(normal_effects().sigma_sq);
  return d;
}

NamedEffects default_effects(int arms, const NormalEffectSpec& eff) {
  EffectConfig null_cfg{std::vector<double>(arms, 0.0)};
  EffectConfig lfc{std::vector<double>(arms, eff.theta_zero)};
  lfc.deltas[0] = eff.theta_prime;
  EffectConfig all{std::vector<double>(arms, eff.theta_prime)};
  return {{"global_null", null_cfg}, {"lfc", lfc}, {"all_effective", all}};
}

NamedEffects ParsedConfig::effects_or_default() const {
  return effects.empty() ? default_effects(arms, normal_effects()) : effects;
}

ParsedConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> values;
  std::vector<std::pair<std::string, Entry>> effect_lines;

  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find_first_of("#;"); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
      if (section != "effects" && !schema().contains(section))
        throw ParseError("unknown section [" + section + "]", line_no);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    std::string key = lower(trim(std::string_view(line).substr(0, eq)));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", line_no);
    if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no);

    std::string sec = section;
    if (sec.empty()) {
      auto dot = key.find('.');
      if (dot == std::string::npos) throw ParseError("key '" + key + "' outside any section", line_no);
      sec = key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    if (sec == "effects") {
      for (const auto& [name, e] : effect_lines)
        if (name == key) throw ParseError("duplicate effect '" + key + "'", line_no);
      effect_lines.push_back({key, {value, line_no}});
      continue;
    }
    auto it = schema().find(sec);
    if (it == schema().end()) throw ParseError("unknown section '" + sec + "'", line_no);
    if (!it->second.contains(key)) throw ParseError("unknown key '" + sec + "." + key + "'", line_no);
    const std::string full = sec + "." + key;
    if (values.contains(full)) throw ParseError("duplicate key '" + full + "'", line_no);
    values[full] = {value, line_no};
  }

  std::vector<std::string> missing;
  for (const char* req : {"design.arms", "endpoint.type", "calibration.alpha", "calibration.power"})
    if (!values.contains(req)) missing.emplace_back(req);
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& m : missing) msg += " " + m;
    throw ParseError(msg, line_no == 0 ? 1 : line_no);
  }

  auto real = [&](const std::string& key) { return parse_real(values.at(key).value, values.at(key).line); };
  auto integer = [&](const std::string& key) { return parse_int(values.at(key).value, values.at(key).line); };
  auto need = [&](const std::string& key) {
    if (!values.contains(key)) throw ValidationError(key, "required");
  };

  ParsedConfig cfg;
  const auto arms = integer("design.arms");
  if (arms < 2 || arms > kMaxArms)
    throw ValidationError("design.arms", "must be between 2 and " + std::to_string(kMaxArms));
  cfg.arms = static_cast<int>(arms);

  const std::string shape = values.contains("design.shape") ? lower(values.at("design.shape").value) : "obf";
  if (shape == "obf" || shape == "obrien_fleming") {
    cfg.shape = BoundaryShape::obrien_fleming();
  } else if (shape == "pocock") {
    cfg.shape = BoundaryShape::pocock();
  } else if (shape == "custom") {
    need("design.boundaries");
    std::vector<double> mult;
    const auto& e = values.at("design.boundaries");
    for (const auto& tok : split_list(e.value)) mult.push_back(parse_real(tok, e.line));
    cfg.shape = BoundaryShape::from_multipliers(std::move(mult));
  } else {
    throw ValidationError("design.shape", "expected obf, pocock or custom");
  }
  if (values.contains("design.boundaries") && cfg.shape.kind != BoundaryShape::Kind::custom)
    throw ValidationError("design.boundaries", "only allowed with shape = custom");
  if (cfg.shape.kind == BoundaryShape::Kind::custom) {
    try {
      cfg.shape.multipliers(cfg.arms);
    } catch (const InputError& e) {
      throw ValidationError("design.boundaries", e.what());
    }
  }
  if (values.contains("design.n_per_stage")) {
    const auto n = integer("design.n_per_stage");
    if (n < 1 || n > 100000000) throw ValidationError("design.n_per_stage", "must be positive");
    cfg.n_per_stage = static_cast<int>(n);
  }

  const std::string type = lower(values.at("endpoint.type").value);
  const std::set<std::string> binary_keys{"endpoint.p_control", "endpoint.rd_relevant",
                                          "endpoint.rd_uninteresting"};
  const std::set<std::string> normal_keys{"endpoint.theta_prime", "endpoint.theta_zero",
                                          "endpoint.sigma_sq"};
  auto reject_foreign = [&](const std::set<std::string>& foreign) {
    for (const auto& k : foreign)
      if (values.contains(k)) throw ParseError("'" + k + "' does not apply to endpoint.type = " + type, values.at(k).line);
  };
  if (type == "binary") {
    reject_foreign(normal_keys);
    for (const auto& k : binary_keys) need(k);
    BinaryEndpointSpec b{real("endpoint.p_control"), real("endpoint.rd_relevant"),
                         real("endpoint.rd_uninteresting")};
    b.validate();
    cfg.endpoint = b;
  } else if (type == "normal") {
    reject_foreign(binary_keys);
    for (const auto& k : normal_keys) need(k);
    NormalEffectSpec n{real("endpoint.theta_prime"), real("endpoint.theta_zero"),
                       real("endpoint.sigma_sq")};
    n.validate();
    cfg.endpoint = n;
  } else {
    throw ValidationError("endpoint.type", "expected binary or normal");
  }

  cfg.calibration.alpha = real("calibration.alpha");
  cfg.calibration.power_target = real("calibration.power");
  if (values.contains("calibration.omega")) cfg.calibration.omega = real("calibration.omega");
  if (values.contains("calibration.c_lo")) cfg.calibration.c_lo = real("calibration.c_lo");
  if (values.contains("calibration.c_hi")) cfg.calibration.c_hi = real("calibration.c_hi");
  if (values.contains("calibration.max_n")) {
    const auto n = integer("calibration.max_n");
    if (n < 1 || n > 100000000) throw ValidationError("calibration.max_n", "must be positive");
    cfg.calibration.max_n = static_cast<int>(n);
  }
  cfg.calibration.validate();

  if (values.contains("run.seed")) {
    const auto& e = values.at("run.seed");
    std::uint64_t s = 0;
    auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), s);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size())
      throw ParseError("expected an unsigned integer seed", e.line);
    cfg.seed = s;
  }
  if (values.contains("run.reps")) {
    cfg.reps = integer("run.reps");
    if (cfg.reps < 2) throw ValidationError("run.reps", "must be at least 2");
  }
  if (values.contains("run.tol")) {
    cfg.tol = real("run.tol");
    if (!(cfg.tol > 0.0 && cfg.tol < 0.1)) throw ValidationError("run.tol", "must lie in (0, 0.1)");
  }

  const NormalEffectSpec eff = cfg.normal_effects();
  for (const auto& [name, e] : effect_lines) {
    EffectConfig ec;
    for (const auto& tok : split_list(e.value)) ec.deltas.push_back(parse_effect(tok, eff, e.line));
    if (static_cast<int>(ec.deltas.size()) != cfg.arms)
      throw ValidationError("effects." + name, "needs " + std::to_string(cfg.arms) + " entries");
    cfg.effects.emplace_back(name, std::move(ec));
  }
  return cfg;
}

ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace supdtl
