#include "sspop/simulator.hpp"

#include "sspop/numerics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace sspop {

void SimulationConfig::validate() const {
  grid.validate();
  checked_inflow(C);
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument(fmt::format("cfl must be in (0, 1], got {}", cfl));
  if (!(T_final > 0.0) || !std::isfinite(T_final))
    throw std::invalid_argument(fmt::format("T_final must be > 0, got {}", T_final));
  if (!(output_every > 0.0)) throw std::invalid_argument(fmt::format("output_every must be > 0, got {}", output_every));
  if (!(model.m > 0.0) || !std::isfinite(model.m)) throw ModelViolation("maximal size m must be finite and > 0");
}

namespace {

struct Rates {
  std::vector<double> gamma, mu, beta;
};

Rates sample_rates(const ModelIngredients& model, const std::vector<double>& s, double P) {
  Rates r;
  r.gamma.resize(s.size());
  r.mu.resize(s.size());
  r.beta.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    r.gamma[i] = model.gamma(s[i], P);
    r.mu[i] = model.mu(s[i], P);
    r.beta[i] = model.beta(s[i], P);
    if (!(r.gamma[i] > 0.0)) throw ModelViolation(fmt::format("gamma <= 0 at s = {}, P = {}", s[i], P));
    if (!std::isfinite(r.mu[i]) || !std::isfinite(r.beta[i]))
      throw NumericError(fmt::format("non-finite vital rate at s = {}, P = {}", s[i], P));
  }
  return r;
}

}  // namespace

double stable_dt(const SimulationState& state, const SimulationConfig& config) {
  const std::vector<double> s = config.grid.nodes(config.model.m);
  double gmax = 0.0;
  for (double x : s) {
    const double g = config.model.gamma(x, state.P);
    if (!(g > 0.0)) throw ModelViolation(fmt::format("gamma <= 0 at s = {}, P = {}", x, state.P));
    gmax = std::max(gmax, g);
  }
  return config.cfl * config.grid.spacing(config.model.m) / gmax;
}

StepResult step(const SimulationState& state, const SimulationConfig& config, double max_dt) {
  const ModelIngredients& model = config.model;
  const int N = config.grid.N;
  const double h = config.grid.spacing(model.m);
  const std::vector<double> s = config.grid.nodes(model.m);
  const std::vector<double>& p = state.density;
  if (p.size() != s.size())
    throw std::invalid_argument(fmt::format("density has {} values, grid has {} nodes", p.size(), s.size()));

  const Rates r = sample_rates(model, s, state.P);
  const double gmax = *std::max_element(r.gamma.begin(), r.gamma.end());
  double dt = std::min(config.cfl * h / gmax, max_dt);
  if (!(dt > 1e-14 * std::max(1.0, state.t)) || !std::isfinite(dt))
    throw NumericError(fmt::format("time step underflow at t = {} (dt = {}, max gamma = {})", state.t, dt, gmax));

  StepResult out;
  out.dt = dt;
  SimulationState& next = out.state;
  next.t = state.t + dt;
  next.density.resize(p.size());

  const double ratio = dt / h;
  for (int i = 1; i <= N; ++i) {
    const double flux = r.gamma[i] * p[i] - r.gamma[i - 1] * p[i - 1];
    const double death = config.mortality == MortalityScheme::CellAverage
                             ? 0.5 * (r.mu[i] * p[i] + r.mu[i - 1] * p[i - 1])
                             : r.mu[i] * p[i];
    next.density[i] = p[i] - ratio * flux - dt * death;
  }
  // Birth law with the trapezoid rule; p_0 enters the sum linearly.
  double births = 0.5 * r.beta[N] * next.density[N];
  for (int i = 1; i < N; ++i) births += r.beta[i] * next.density[i];
  const double denom = r.gamma[0] - 0.5 * h * r.beta[0];
  if (!(denom > 0.0))
    throw NumericError(fmt::format("boundary solve singular: gamma(0) - h beta(0)/2 = {} at t = {}", denom, state.t));
  next.density[0] = (config.C + h * births) / denom;

  const double lowest = *std::min_element(next.density.begin(), next.density.end());
  if (lowest < -1e-12)
    throw NumericError(fmt::format("negative density {} at t = {} (scheme violation)", lowest, next.t));
  next.P = trapezoid_samples(next.density, h);

  std::vector<double> net(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) net[i] = (r.beta[i] - r.mu[i]) * p[i];
  out.balance_rhs = config.C + trapezoid_samples(net, h) - r.gamma[N] * p[N];
  out.balance_residual = std::abs((next.P - state.P) / dt - out.balance_rhs);
  return out;
}

double Trajectory::max_balance_residual() const {
  double worst = 0.0;
  for (double r : balance_residuals) worst = std::max(worst, r);
  return worst;
}

SimulationState initial_state(const SimulationConfig& config, std::vector<double> density) {
  config.validate();
  const std::size_t nodes = static_cast<std::size_t>(config.grid.N) + 1;
  if (density.size() != nodes)
    throw std::invalid_argument(fmt::format("initial density has {} values, grid has {} nodes", density.size(), nodes));
  for (std::size_t i = 0; i < nodes; ++i) {
    if (!std::isfinite(density[i])) throw DomainError(fmt::format("initial density is not finite at node {}", i));
    if (density[i] < 0.0)
      throw DomainError(fmt::format("initial density is negative ({}) at node {}", density[i], i));
  }
  SimulationState state;
  state.P = trapezoid_samples(density, config.grid.spacing(config.model.m));
  state.density = std::move(density);
  return state;
}

Trajectory simulate(const SimulationConfig& config, const std::vector<double>& initial) {
  SimulationState state = initial_state(config, initial);
  Trajectory traj;
  traj.s = config.grid.nodes(config.model.m);
  traj.min_density = *std::min_element(state.density.begin(), state.density.end());

  auto record = [&](const SimulationState& st, double residual) {
    TrajectorySample sample{st.t, st.P, std::nullopt};
    if (config.record_density) sample.density = st.density;
    traj.samples.push_back(std::move(sample));
    traj.balance_residuals.push_back(residual);
  };
  record(state, 0.0);

  const double T = config.T_final;
  long k = 1;
  double window_start_P = state.P;
  double window_start_t = state.t;
  double window_flux = 0.0;
  while (state.t < T) {
    const double target = std::min(T, k * config.output_every);
    const StepResult next = step(state, config, target - state.t);
    state = next.state;
    if (target - state.t <= 1e-12 * std::max(1.0, target)) state.t = target;
    ++traj.steps;
    window_flux += next.balance_rhs * next.dt;
    traj.min_density = std::min(traj.min_density, *std::min_element(state.density.begin(), state.density.end()));
    if (state.t >= target) {
      record(state, std::abs(state.P - window_start_P - window_flux) / (state.t - window_start_t));
      window_start_P = state.P;
      window_start_t = state.t;
      window_flux = 0.0;
      ++k;
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace sspop
