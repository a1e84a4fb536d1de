#pragma once

// INI run configuration:
//
//   [model]    family = example | expression, m, beta, mu, gamma
//   [inflow]   C
//   [grid]     N
//   [numerics] panels, abs_tol, scan_points, P_lo, P_hi
//   [sim]      cfl, T, output_every

#include "sspop/model.hpp"

#include <stdexcept>
#include <string>

namespace sspop::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string path;  ///< empty when no file was given

  std::string family = "example";
  double m = 6.0;
  std::string beta;
  std::string mu;
  std::string gamma;

  double C = 0.0;
  int N = 1024;

  int panels = 4096;
  double abs_tol = 1e-10;
  int scan_points = 2000;
  double P_lo = 1e-4;
  double P_hi = 50.0;

  double cfl = 0.9;
  double T = 100.0;
  double output_every = 1.0;

  ModelIngredients build_model() const;
};

RunConfig load_config(const std::string& path);

}  // namespace sspop::cli
