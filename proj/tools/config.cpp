#include "config.hpp"

#include "sspop/expression.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <cctype>
#include <type_traits>

namespace sspop::cli {

namespace {

namespace pt = boost::property_tree;

std::string unquote(std::string v) {
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
  std::size_t b = 0;
  while (b < v.size() && std::isspace(static_cast<unsigned char>(v[b]))) ++b;
  v = v.substr(b);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
  return v;
}

template <class T>
void read(const pt::ptree& tree, const char* key, T& target) {
  const auto value = tree.get_optional<std::string>(key);
  if (!value) return;
  const std::string text = unquote(*value);
  if constexpr (std::is_same_v<T, std::string>) {
    target = text;
  } else {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, int>) target = std::stoi(text, &used);
      else target = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("config key {}: cannot read '{}' as a number", key, text));
    }
  }
}

}  // namespace

RunConfig load_config(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("cannot read config {}: {}", path, e.what()));
  }
  RunConfig cfg;
  cfg.path = path;
  read(tree, "model.family", cfg.family);
  read(tree, "model.m", cfg.m);
  read(tree, "model.beta", cfg.beta);
  read(tree, "model.mu", cfg.mu);
  read(tree, "model.gamma", cfg.gamma);
  read(tree, "inflow.C", cfg.C);
  read(tree, "grid.N", cfg.N);
  read(tree, "numerics.panels", cfg.panels);
  read(tree, "numerics.abs_tol", cfg.abs_tol);
  read(tree, "numerics.scan_points", cfg.scan_points);
  read(tree, "numerics.P_lo", cfg.P_lo);
  read(tree, "numerics.P_hi", cfg.P_hi);
  read(tree, "sim.cfl", cfg.cfl);
  read(tree, "sim.T", cfg.T);
  read(tree, "sim.output_every", cfg.output_every);

  const bool has_rates = !cfg.beta.empty() || !cfg.mu.empty() || !cfg.gamma.empty();
  if (!tree.get_optional<std::string>("model.family") && has_rates) cfg.family = "expression";
  if (cfg.family != "example" && cfg.family != "expression")
    throw ConfigError(fmt::format("unknown model family '{}' (expected example or expression)", cfg.family));
  if (cfg.family == "expression" && (cfg.beta.empty() || cfg.mu.empty() || cfg.gamma.empty()))
    throw ConfigError("expression models need [model] beta, mu and gamma");
  if (!(cfg.m > 0.0)) throw ConfigError(fmt::format("[model] m must be > 0, got {}", cfg.m));
  if (cfg.N < 1) throw ConfigError(fmt::format("[grid] N must be >= 1, got {}", cfg.N));
  if (cfg.panels < 2 || cfg.panels % 2) throw ConfigError(fmt::format("[numerics] panels must be even and >= 2, got {}", cfg.panels));
  if (!(cfg.abs_tol > 0.0)) throw ConfigError("[numerics] abs_tol must be > 0");
  if (cfg.scan_points < 2) throw ConfigError("[numerics] scan_points must be >= 2");
  return cfg;
}

ModelIngredients RunConfig::build_model() const {
  if (family == "example") return builtin_example();
  for (const auto& [key, text] : {std::pair{"beta", &beta}, {"mu", &mu}, {"gamma", &gamma}}) {
    try {
      parse_rate(*text);
    } catch (const ParseError& e) {
      throw ConfigError(fmt::format("model.{} = \"{}\": {}", key, *text, e.what()));
    }
  }
  return from_expressions(m, beta, mu, gamma);
}

}  // namespace sspop::cli
