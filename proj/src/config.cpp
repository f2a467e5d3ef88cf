#include "sysid/config.hpp"

#include <fstream>

#include "sysid/json_io.hpp"

namespace sysid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

void check_known_keys(const json& obj, const std::string& scope,
                      std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) fail(scope.empty() ? key : scope + "." + key, "unknown key");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& scope, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(scope.empty() ? key : scope + "." + std::string(key), e.what());
  }
}

Matrix parse_matrix(const json& j, const std::string& field) {
  if (j.is_object()) return matrix_from_json(j, field);
  if (!j.is_array() || j.empty() || !j.front().is_array())
    fail(field, "expected {rows, cols, data} or a nested array of rows");
  const long rows = static_cast<long>(j.size());
  const long cols = static_cast<long>(j.front().size());
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || static_cast<long>(row.size()) != cols)
      fail(field, "ragged rows in matrix literal");
    for (long k = 0; k < cols; ++k) m(i, k) = row.at(k).get<double>();
  }
  return m;
}

LinkKind parse_link(const json& j, const std::string& field) {
  const std::string name = j.get<std::string>();
  if (name == "identity") return LinkKind::Identity;
  if (name == "tanh") return LinkKind::Tanh;
  fail(field, "unknown link '" + name + "' (expected identity|tanh)");
}

DomainKind parse_domain_kind(const json& j, const std::string& field) {
  const std::string name = j.get<std::string>();
  if (name == "box") return DomainKind::Box;
  if (name == "ball") return DomainKind::Ball;
  fail(field, "unknown domain '" + name + "' (expected box|ball)");
}

StrategyKind parse_strategy_kind(const json& j, const std::string& field) {
  const std::string name = j.get<std::string>();
  if (name == "infomax") return StrategyKind::Infomax;
  if (name == "noise_optimal") return StrategyKind::NoiseOptimal;
  if (name == "tau_infomax") return StrategyKind::TauInfomax;
  if (name == "tau_zero") return StrategyKind::TauZero;
  if (name == "random") return StrategyKind::Random;
  if (name == "zero") return StrategyKind::Zero;
  fail(field, "unknown strategy '" + name +
                  "' (expected infomax|noise_optimal|tau_infomax|tau_zero|random|zero)");
}

StrategySpec parse_strategy(const json& j, const std::string& scope) {
  check_known_keys(j, scope, {"kind", "tau", "seed", "alt_noise_formula", "domain"});
  StrategySpec s;
  if (j.contains("kind")) s.kind = parse_strategy_kind(j.at("kind"), scope + ".kind");
  s.tau = get_or<long>(j, scope, "tau", 0);
  s.seed = get_or<std::uint64_t>(j, scope, "seed", 0);
  s.alt_noise_formula = get_or<bool>(j, scope, "alt_noise_formula", false);
  if (j.contains("domain")) {
    const auto& dj = j.at("domain");
    check_known_keys(dj, scope + ".domain", {"kind", "bound"});
    if (dj.contains("kind"))
      s.domain.kind = parse_domain_kind(dj.at("kind"), scope + ".domain.kind");
    s.domain.bound = get_or<double>(dj, scope + ".domain", "bound", 1.0);
  }
  if ((s.kind == StrategyKind::TauInfomax || s.kind == StrategyKind::TauZero) && s.tau < 0)
    fail(scope + ".tau", "must be >= 0");
  return s;
}

ModelConfig parse_model(const json& j, const std::string& scope) {
  check_known_keys(j, scope, {"d", "c", "I", "J", "link", "F", "B", "V", "generator"});
  ModelConfig m;
  m.d = get_or<int>(j, scope, "d", 3);
  m.c = get_or<int>(j, scope, "c", 2);
  m.I = get_or<int>(j, scope, "I", 1);
  m.J = get_or<int>(j, scope, "J", 0);
  if (j.contains("link")) m.link = parse_link(j.at("link"), scope + ".link");
  if (j.contains("F")) {
    std::vector<Matrix> fs;
    for (std::size_t i = 0; i < j.at("F").size(); ++i)
      fs.push_back(parse_matrix(j.at("F").at(i), scope + ".F[" + std::to_string(i) + "]"));
    m.F = std::move(fs);
  }
  if (j.contains("B")) {
    std::vector<Matrix> bs;
    for (std::size_t i = 0; i < j.at("B").size(); ++i)
      bs.push_back(parse_matrix(j.at("B").at(i), scope + ".B[" + std::to_string(i) + "]"));
    m.B = std::move(bs);
  }
  if (j.contains("V")) m.V = parse_matrix(j.at("V"), scope + ".V");
  if ((m.F || m.B || m.V) && !(m.F && m.B && m.V))
    fail(scope, "explicit plants need all of F, B and V");
  if (j.contains("generator")) {
    const auto& gj = j.at("generator");
    check_known_keys(gj, scope + ".generator",
                     {"seed", "spectral_radius", "b_scale", "noise_scale"});
    m.generator.seed = get_or<std::uint64_t>(gj, scope + ".generator", "seed", 1);
    m.generator.spectral_radius =
        get_or<double>(gj, scope + ".generator", "spectral_radius", 0.9);
    m.generator.b_scale = get_or<double>(gj, scope + ".generator", "b_scale", 0.5);
    m.generator.noise_scale = get_or<double>(gj, scope + ".generator", "noise_scale", 0.1);
  }
  return m;
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "': expected KEY=VALUE");
  const std::string dotted = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare strings like strategy.kind=zero
  }

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    if (!node->is_object())
      throw ConfigError("override '" + dotted + "': '" + key + "' is not an object");
    start = dot + 1;
  }
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config root: expected a JSON object");
  check_known_keys(doc, "",
                   {"model", "prior", "strategy", "strategies", "T", "replicas", "seed",
                    "output", "noise_uses_posterior"});
  ExperimentConfig cfg;
  if (doc.contains("model")) cfg.model = parse_model(doc.at("model"), "model");
  if (doc.contains("prior")) {
    const auto& pj = doc.at("prior");
    check_known_keys(pj, "prior", {"kappa", "q_scale", "n_offset"});
    cfg.prior.kappa = get_or<double>(pj, "prior", "kappa", 1e-2);
    cfg.prior.q_scale = get_or<double>(pj, "prior", "q_scale", 1.0);
    cfg.prior.n_offset = get_or<double>(pj, "prior", "n_offset", 2.0);
  }
  if (doc.contains("strategy")) cfg.strategy = parse_strategy(doc.at("strategy"), "strategy");
  cfg.T = get_or<long>(doc, "", "T", 2000);
  cfg.replicas = get_or<int>(doc, "", "replicas", 1);
  cfg.seed = get_or<std::uint64_t>(doc, "", "seed", 1);
  if (doc.contains("output")) {
    const auto& oj = doc.at("output");
    check_known_keys(oj, "output", {"path", "format"});
    cfg.output.path = get_or<std::string>(oj, "output", "path", "");
    cfg.output.format = get_or<std::string>(oj, "output", "format", "csv");
  }
  cfg.noise_uses_posterior = get_or<bool>(doc, "", "noise_uses_posterior", false);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::vector<ExperimentConfig> parse_compare_configs(const nlohmann::json& doc) {
  if (!doc.contains("strategies") || !doc.at("strategies").is_array() ||
      doc.at("strategies").empty()) {
    throw ConfigError("config field 'strategies': compare needs a non-empty strategy array");
  }
  const ExperimentConfig base = parse_experiment_config(doc);
  std::vector<ExperimentConfig> cfgs;
  std::size_t idx = 0;
  for (const auto& sj : doc.at("strategies")) {
    ExperimentConfig cfg = base;
    cfg.strategy = parse_strategy(sj, "strategies[" + std::to_string(idx++) + "]");
    cfg.validate();
    cfgs.push_back(std::move(cfg));
  }
  return cfgs;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json model = {{"d", cfg.model.d}, {"c", cfg.model.c},
                          {"I", cfg.model.I}, {"J", cfg.model.J},
                          {"link", cfg.model.link == LinkKind::Tanh ? "tanh" : "identity"},
                          {"generator",
                           {{"seed", cfg.model.generator.seed},
                            {"spectral_radius", cfg.model.generator.spectral_radius},
                            {"b_scale", cfg.model.generator.b_scale},
                            {"noise_scale", cfg.model.generator.noise_scale}}}};
  if (cfg.model.explicit_plant()) {
    nlohmann::json fs = nlohmann::json::array(), bs = nlohmann::json::array();
    for (const auto& f : *cfg.model.F) fs.push_back(matrix_to_json(f));
    for (const auto& b : *cfg.model.B) bs.push_back(matrix_to_json(b));
    model["F"] = std::move(fs);
    model["B"] = std::move(bs);
    model["V"] = matrix_to_json(*cfg.model.V);
  }
  const char* domain =
      cfg.strategy.domain.kind == DomainKind::Ball ? "ball" : "box";
  const auto kind_name = [](StrategyKind k) {
    switch (k) {
      case StrategyKind::Infomax: return "infomax";
      case StrategyKind::NoiseOptimal: return "noise_optimal";
      case StrategyKind::TauInfomax: return "tau_infomax";
      case StrategyKind::TauZero: return "tau_zero";
      case StrategyKind::Random: return "random";
      case StrategyKind::Zero: return "zero";
    }
    return "infomax";
  };
  return {{"model", std::move(model)},
          {"prior",
           {{"kappa", cfg.prior.kappa},
            {"q_scale", cfg.prior.q_scale},
            {"n_offset", cfg.prior.n_offset}}},
          {"strategy",
           {{"kind", kind_name(cfg.strategy.kind)},
            {"tau", cfg.strategy.tau},
            {"seed", cfg.strategy.seed},
            {"alt_noise_formula", cfg.strategy.alt_noise_formula},
            {"domain", {{"kind", domain}, {"bound", cfg.strategy.domain.bound}}}}},
          {"T", cfg.T},
          {"replicas", cfg.replicas},
          {"seed", cfg.seed},
          {"output", {{"path", cfg.output.path}, {"format", cfg.output.format}}},
          {"noise_uses_posterior", cfg.noise_uses_posterior}};
}

const std::vector<std::string>& known_override_keys() {
  static const std::vector<std::string> keys = {
      "model.d",
      "model.c",
      "model.I",
      "model.J",
      "model.link",
      "model.F",
      "model.B",
      "model.V",
      "model.generator.seed",
      "model.generator.spectral_radius",
      "model.generator.b_scale",
      "model.generator.noise_scale",
      "prior.kappa",
      "prior.q_scale",
      "prior.n_offset",
      "strategy.kind",
      "strategy.tau",
      "strategy.seed",
      "strategy.alt_noise_formula",
      "strategy.domain.kind",
      "strategy.domain.bound",
      "T",
      "replicas",
      "seed",
      "output.path",
      "output.format",
      "noise_uses_posterior",
  };
  return keys;
}

}  // namespace sysid
