#include "sspop/study.hpp"

#include "sspop/survival.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

namespace sspop {

bool StudyResult::all_passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

namespace {

const double kLife = 1.0 - std::exp(-6.0);

double closed_R(double P) { return P * P * std::exp(2.0 - P) / 4.0; }
double closed_Q(double C, double P) { return closed_R(P) + C * kLife / P - 1.0; }

double bisect_closed(const std::function<double(double)>& g, double a, double b) {
  double ga = g(a);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    if ((gm > 0.0) == (ga > 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Sign-change roots of the closed-form Q_C - 1 on a uniform mesh.
std::vector<double> dense_scan_roots(double C, double lo, double hi, int points) {
  std::vector<double> roots;
  auto g = [C](double P) { return closed_Q(C, P); };
  double x0 = lo, g0 = g(lo);
  for (int k = 1; k < points; ++k) {
    const double x1 = lo + (hi - lo) * k / (points - 1);
    const double g1 = g(x1);
    if ((g0 < 0.0) != (g1 < 0.0)) roots.push_back(bisect_closed(g, x0, x1));
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

std::vector<double> sampled(const std::vector<double>& s, const std::function<double(double)>& f) {
  std::vector<double> out(s.size());
  std::transform(s.begin(), s.end(), out.begin(), f);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

StudyResult run_study(const StudyOptions& options) {
  StudyResult out;
  const ModelIngredients model = builtin_example();
  EquilibriumOptions eq_opts;
  eq_opts.quad = options.quad;
  eq_opts.scan = options.scan;
  eq_opts.grid.N = options.N;
  SpectralOptions sp_opts;
  sp_opts.quad = options.quad;
  sp_opts.scan = options.scan;
  const double P_lo = 1e-4, P_hi = 50.0;

  auto run = [&](int id, std::string name, double limit, const std::function<bool(std::string&)>& body) {
    CriterionResult c;
    c.id = id;
    c.name = std::move(name);
    c.limit_seconds = limit;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.passed = body(c.detail);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail += fmt::format(" exception: {}", e.what());
    }
    c.seconds = seconds_since(t0);
    if (c.seconds > limit) {
      c.passed = false;
      c.detail += fmt::format(" runtime {:.2f} s exceeds {:.0f} s", c.seconds, limit);
    }
    out.criteria.push_back(std::move(c));
  };

  run(1, "example equilibrium at C = 0", 1.0, [&](std::string& d) {
    out.equilibria_C0 = find_equilibria(model, 0.0, P_lo, P_hi, eq_opts);
    const auto& pos = out.equilibria_C0.positive;
    if (pos.size() != 1) {
      d = fmt::format("expected one positive root, found {}", pos.size());
      return false;
    }
    const std::vector<double> s = eq_opts.grid.nodes(model.m);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      worst = std::max(worst, std::abs(pos[0].profile[i] - 2.0 * std::exp(-s[i]) / kLife));
    const double err = std::abs(pos[0].P_star - 2.0);
    d = fmt::format("P* = {:.12f} (|P*-2| = {:.2e}), tangent = {}, profile error {:.2e}", pos[0].P_star, err,
                    pos[0].tangent, worst);
    return pos[0].tangent && err <= 1e-8 && worst <= 1e-8;
  });

  run(2, "closed-form net reproduction", 1.0, [&](std::string& d) {
    double worst = 0.0;
    for (double P : {0.5, 1.0, 2.0, 3.0, 5.0})
      worst = std::max(worst, std::abs(net_reproduction(model, P, options.quad) - closed_R(P)));
    d = fmt::format("max |R(P) - P^2 e^(2-P)/4| = {:.2e}", worst);
    return worst <= 1e-8;
  });

  run(3, "K(0) = P* Q'(P*) + 1", 10.0, [&](std::string& d) {
    double worst = 0.0;
    int count = 0;
    GrowthMemo memo(model, options.quad);
    for (double C : {0.0, 0.05, 0.1, 0.2, 0.3}) {
      for (const auto& eq : find_equilibria(model, C, P_lo, P_hi, eq_opts, &memo).positive) {
        const LinearisationData lin = linearise(model, eq, options.quad.panel_count);
        worst = std::max(worst, std::abs(characteristic_K(lin, 0.0) - (eq.P_star * eq.dQ + 1.0)));
        ++count;
      }
    }
    int models = 0;
    for (std::uint64_t seed = 1; models < 10 && seed < 100; ++seed) {
      RandomModelOptions ro;
      ro.gamma_depends_on_P = false;
      ro.mu_depends_on_P = true;
      const ModelIngredients rm = random_smooth_model(seed, ro);
      const double C = 0.05 * static_cast<double>(1 + seed % 6);
      const EquilibriumSet set = find_equilibria(rm, C, P_lo, 200.0, eq_opts);
      if (set.positive.empty()) continue;
      ++models;
      for (const auto& eq : set.positive) {
        const LinearisationData lin = linearise(rm, eq, options.quad.panel_count);
        worst = std::max(worst, std::abs(characteristic_K(lin, 0.0) - (eq.P_star * eq.dQ + 1.0)));
        ++count;
      }
    }
    d = fmt::format("{} equilibria ({} random models), max identity residual {:.2e}", count, models, worst);
    return models == 10 && worst <= 1e-6;
  });

  run(4, "stability pattern at C = 0.2", 10.0, [&](std::string& d) {
    out.equilibria_C02 = find_equilibria(model, 0.2, P_lo, P_hi, eq_opts);
    const auto& pos = out.equilibria_C02.positive;
    out.stability_C02.clear();
    for (const auto& eq : pos) out.stability_C02.push_back(classify(model, eq, sp_opts));
    const std::vector<double> oracle = dense_scan_roots(0.2, 0.01, 10.0, 1000000);
    if (pos.size() != 3 || oracle.size() != 3) {
      d = fmt::format("found {} roots, oracle {}", pos.size(), oracle.size());
      return false;
    }
    const Stability want[3] = {Stability::LinearlyStable, Stability::LinearlyUnstable, Stability::LinearlyStable};
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const StabilityReport& r = out.stability_C02[i];
      worst = std::max(worst, std::abs(pos[i].P_star - oracle[i]));
      ok = ok && r.classification == want[i];
      const bool eig_positive = r.dominant_real_eigenvalue && *r.dominant_real_eigenvalue > 0.0;
      ok = ok && (eig_positive == (pos[i].dQ > 0.0));
    }
    d = fmt::format("classes {}/{}/{}, max root deviation from dense scan {:.2e}",
                    to_string(out.stability_C02[0].classification), to_string(out.stability_C02[1].classification),
                    to_string(out.stability_C02[2].classification), worst);
    return ok && worst <= 1e-8;
  });

  run(5, "fold C*", 30.0, [&](std::string& d) {
    BifurcationOptions bo;
    bo.equilibrium = eq_opts;
    bo.spectral = sp_opts;
    out.fold = locate_fold(model, 0.0, 1.0, 0.05, 2.0, bo);
    const double P_oracle =
        bisect_closed([](double P) { return P * P * (3.0 - P) * std::exp(2.0 - P) - 4.0; }, 0.05, 1.5);
    const double C_oracle = P_oracle * P_oracle * P_oracle * (2.0 - P_oracle) * std::exp(2.0 - P_oracle) / (4.0 * kLife);
    const double Cs = out.fold.C_star;
    out.diagram = sweep(model, {0.05, 0.2, Cs - 0.01, Cs + 0.01, 0.5, 1.0}, bo);
    bool counts = true;
    for (const auto& e : out.diagram.entries) counts = counts && e.positive_count() == (e.C < Cs ? 3 : 1);
    d = fmt::format("C* = {:.10f} (oracle {:.10f}), P_fold = {:.10f} (oracle {:.10f}), |Q-1| = {:.1e}, |Q'| = {:.1e}",
                    Cs, C_oracle, out.fold.P_fold, P_oracle, out.fold.residual, std::abs(out.fold.slope));
    return out.fold.residual <= 1e-6 && std::abs(out.fold.slope) <= 1e-5 && std::abs(Cs - C_oracle) <= 1e-5 &&
           std::abs(out.fold.P_fold - P_oracle) <= 1e-5 && counts;
  });

  run(6, "marginal diagnosis at C = 0", 5.0, [&](std::string& d) {
    if (out.equilibria_C0.positive.empty()) out.equilibria_C0 = find_equilibria(model, 0.0, P_lo, P_hi, eq_opts);
    if (out.equilibria_C0.positive.size() != 1) {
      d = "no unique equilibrium at C = 0";
      return false;
    }
    const EquilibriumPoint& eq = out.equilibria_C0.positive[0];
    out.stability_C0 = {classify(model, eq, sp_opts)};
    out.marginal = marginal_diagnosis(model, eq, sp_opts);
    const StabilityReport& r = out.stability_C0[0];
    const double eig = r.dominant_real_eigenvalue.value_or(NAN);
    d = fmt::format("{}, eigenvalue {:.2e}, R'' = {:.10f}, verdict \"{}\"", to_string(r.classification), eig,
                    out.marginal.Rpp, out.marginal.verdict);
    return r.classification == Stability::MarginalZeroEigenvalue && std::abs(eig) <= 1e-6 &&
           std::abs(out.marginal.Rpp + 0.5) <= 1e-6 && out.marginal.verdict == "nonlinearly unstable";
  });

  SimulationConfig base;
  base.model = model;
  base.grid.N = options.N;
  base.cfl = options.cfl;
  const std::vector<double> s = base.grid.nodes(model.m);

  run(7, "reference simulations", 120.0, [&](std::string& d) {
    SimulationConfig a = base;
    a.C = 0.0;
    a.T_final = 100.0;
    a.output_every = 0.1;
    out.decline = simulate(a, sampled(s, [](double x) { return 1.9 * std::exp(-x) / kLife; }));
    bool monotone = true;
    for (std::size_t k = 1; k < out.decline.samples.size(); ++k)
      if (out.decline.samples[k - 1].t >= 1.0 && out.decline.samples[k].P > out.decline.samples[k - 1].P)
        monotone = false;
    const double Pa = out.decline.final_state.P;

    SimulationConfig b = base;
    b.C = 0.2;
    b.T_final = 200.0;
    b.output_every = 1.0;
    out.bistable = simulate(b, sampled(s, [](double x) { return 0.7 * std::exp(-0.4 * x) / kLife; }));
    const double Pb = out.bistable.final_state.P;
    const double Qb = std::abs(net_growth(model, 0.2, Pb, options.quad) - 1.0);
    if (out.equilibria_C02.positive.empty()) out.equilibria_C02 = find_equilibria(model, 0.2, P_lo, P_hi, eq_opts);
    double nearest = INFINITY;
    for (const auto& eq : out.equilibria_C02.positive) nearest = std::min(nearest, std::abs(eq.P_star - Pb));

    bool c_ok = false;
    double drift = NAN;
    if (out.equilibria_C02.positive.size() == 3) {
      const EquilibriumPoint& upper = out.equilibria_C02.positive[2];
      SimulationConfig c = base;
      c.C = 0.2;
      c.T_final = 100.0;
      c.output_every = 0.1;
      out.persistence = simulate(c, upper.profile);
      drift = 0.0;
      for (const auto& smp : out.persistence.samples) drift = std::max(drift, std::abs(smp.P - upper.P_star));
      c_ok = drift <= 1e-2;
    }
    d = fmt::format("(a) P(100) = {:.3e}, monotone after t = 1: {}; (b) P(200) = {:.8f}, |Q-1| = {:.1e}, "
                    "distance to root {:.1e}; (c) sup drift {:.2e}",
                    Pa, monotone, Pb, Qb, nearest, drift);
    return monotone && Pa < 0.5 && Qb <= 1e-3 && nearest <= 1e-2 && c_ok;
  });

  run(8, "balance-law convergence", 120.0, [&](std::string& d) {
    out.convergence_N.clear();
    out.convergence_residual.clear();
    for (int N : {options.N / 4, options.N / 2, options.N}) {
      SimulationConfig b = base;
      b.grid.N = N;
      b.C = 0.2;
      b.T_final = 200.0;
      b.output_every = 1.0;
      const std::vector<double> sn = b.grid.nodes(model.m);
      double r = 0.0;
      if (N == options.N && !out.bistable.samples.empty()) r = out.bistable.max_balance_residual();
      else r = simulate(b, sampled(sn, [](double x) { return 0.7 * std::exp(-0.4 * x) / kLife; })).max_balance_residual();
      out.convergence_N.push_back(N);
      out.convergence_residual.push_back(r);
    }
    const auto& r = out.convergence_residual;
    const double o1 = std::log2(r[0] / r[1]);
    const double o2 = std::log2(r[1] / r[2]);
    d = fmt::format("residuals {:.3e}, {:.3e}, {:.3e}; observed orders {:.3f}, {:.3f}", r[0], r[1], r[2], o1, o2);
    return o1 >= 0.8 && o2 >= 0.8;
  });

  run(9, "property suites", 60.0, [&](std::string& d) {
    bool ok = true;
    std::vector<std::string> notes;
    // survival
    bool pi_ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
      for (double P : {0.1, 1.0, 5.0}) {
        const SurvivalTable t = survival_table(random_smooth_model(seed), P, options.quad.panel_count);
        pi_ok = pi_ok && t.pi.front() == 1.0 &&
                std::all_of(t.pi.begin(), t.pi.end(), [](double v) { return v > 0.0; });
      }
    notes.push_back(fmt::format("pi ok {}", pi_ok));
    ok = ok && pi_ok;
    // Q = R + C L / P against the direct integral of (C/P + beta) pi / gamma(0)
    double q_worst = 0.0;
    for (double C : {0.0, 0.2, 1.0})
      for (double P : {0.3, 1.0, 2.5, 7.0}) {
        const SurvivalTable t = survival_table(model, P, options.quad.panel_count);
        std::vector<double> w(t.s.size());
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = (C / P + model.beta(t.s[k], P)) * t.pi[k];
        const double direct = integrate_samples(w, t.h) / model.gamma(0.0, P);
        q_worst = std::max(q_worst, std::abs(direct - net_growth(model, C, P, options.quad)));
      }
    notes.push_back(fmt::format("Q identity {:.1e}", q_worst));
    ok = ok && q_worst <= 1e-10;
    // size and age forms
    double age_worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const ModelIngredients rm = random_smooth_model(seed);
      const AgeFormCheck c = age_form_crosscheck(rm, 0.5 + 0.25 * static_cast<double>(seed), options.quad);
      age_worst = std::max(age_worst, std::abs(c.R_size - c.R_age) / std::max(1e-300, std::abs(c.R_size)));
    }
    notes.push_back(fmt::format("age/size {:.1e}", age_worst));
    ok = ok && age_worst <= 1e-6;
    // monotone K where the positivity conditions hold
    int checked = 0;
    bool mono = true;
    auto check_K = [&](const ModelIngredients& mm, const EquilibriumPoint& eq) {
      const LinearisationData lin = linearise(mm, eq, options.quad.panel_count);
      const PositivityCheck pc = check_positivity(lin);
      if (!(pc.poscond1 && pc.poscond2 && pc.posstrict3)) return;
      ++checked;
      double prev = characteristic_K(lin, 0.0);
      for (int k = 1; k <= 40; ++k) {
        const double K = characteristic_K(lin, 0.5 * k);
        if (!(K < prev)) mono = false;
        prev = K;
      }
    };
    for (double C : {0.0, 0.2})
      for (const auto& eq : find_equilibria(model, C, P_lo, P_hi, eq_opts).positive) check_K(model, eq);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      RandomModelOptions ro;
      ro.gamma_depends_on_P = seed % 2 == 0;
      ro.mu_depends_on_P = seed % 2 == 0;
      const ModelIngredients rm = random_smooth_model(seed, ro);
      for (const auto& eq : find_equilibria(rm, 0.1, P_lo, 200.0, eq_opts).positive) check_K(rm, eq);
    }
    notes.push_back(fmt::format("K monotone on {} equilibria: {}", checked, mono));
    ok = ok && mono && checked > 0;
    // nonnegativity
    double lowest = 0.0;
    for (const Trajectory* t : {&out.decline, &out.bistable, &out.persistence})
      if (!t->samples.empty()) lowest = std::min(lowest, t->min_density);
    notes.push_back(fmt::format("min density {:.1e}", lowest));
    ok = ok && lowest >= -1e-12;
    d = fmt::format("{}", fmt::join(notes, "; "));
    return ok;
  });

  return out;
}

}  // namespace sspop
