#include "cli.hpp"

#include "config.hpp"
#include "sspop/bifurcation.hpp"
#include "sspop/expression.hpp"
#include "sspop/simulator.hpp"
#include "sspop/spectral.hpp"
#include "sspop/study.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace sspop::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const fs::path probe = dir_ / ".write_probe";
    std::ofstream f(probe);
    if (!f) throw UsageError(fmt::format("output directory {} is not writable", dir_.string()));
    f.close();
    fs::remove(probe, ec);
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error(fmt::format("failed to write {}", p.string()));
    files_.push_back(p.string());
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Flags {
  std::string config;
  std::string out = ".";
  double C = 0.0, T = 0.0, C_lo = 0.0, C_hi = 0.6, P_hi = 0.0;
  int N = 0, steps = 60;
  std::string initial;
  bool record_density = false;
  CLI::Option *C_opt = nullptr, *T_opt = nullptr, *N_opt = nullptr, *P_hi_opt = nullptr;
};

struct Context {
  RunConfig cfg;
  ModelIngredients model;
  double C = 0.0;
  json parameters;

  EquilibriumOptions equilibrium_options() const {
    EquilibriumOptions o;
    o.quad.panel_count = cfg.panels;
    o.scan.abs_tol = cfg.abs_tol;
    o.scan.scan_points = cfg.scan_points;
    o.grid.N = cfg.N;
    return o;
  }
  SpectralOptions spectral_options() const {
    SpectralOptions o;
    o.quad.panel_count = cfg.panels;
    o.scan.abs_tol = cfg.abs_tol;
    o.scan.scan_points = cfg.scan_points;
    return o;
  }
};

Context make_context(const Flags& flags) {
  Context ctx;
  if (!flags.config.empty()) ctx.cfg = load_config(flags.config);
  if (flags.N_opt->count()) {
    if (flags.N < 1) throw UsageError("--N must be >= 1");
    ctx.cfg.N = flags.N;
  }
  if (flags.T_opt->count()) ctx.cfg.T = flags.T;
  if (flags.P_hi_opt->count()) ctx.cfg.P_hi = flags.P_hi;
  ctx.C = flags.C_opt->count() ? flags.C : ctx.cfg.C;
  if (!(ctx.C >= 0.0) || !std::isfinite(ctx.C)) throw UsageError(fmt::format("inflow C must be >= 0, got {}", ctx.C));
  if (!(ctx.cfg.P_lo > 0.0 && ctx.cfg.P_lo < ctx.cfg.P_hi))
    throw UsageError(fmt::format("need 0 < P_lo < P_hi, got [{}, {}]", ctx.cfg.P_lo, ctx.cfg.P_hi));
  ctx.model = ctx.cfg.build_model();
  ctx.parameters = {{"family", ctx.cfg.family},
                    {"C", ctx.C},
                    {"N", ctx.cfg.N},
                    {"panels", ctx.cfg.panels},
                    {"abs_tol", ctx.cfg.abs_tol},
                    {"scan_points", ctx.cfg.scan_points},
                    {"P_lo", ctx.cfg.P_lo},
                    {"P_hi", ctx.cfg.P_hi}};
  return ctx;
}

json model_echo(const Context& ctx) {
  return {{"family", ctx.cfg.family},
          {"m", ctx.model.m},
          {"beta", ctx.model.beta_text},
          {"mu", ctx.model.mu_text},
          {"gamma", ctx.model.gamma_text}};
}

json equilibrium_json(std::size_t index, const EquilibriumPoint& eq) {
  return {{"index", index},     {"P_star", eq.P_star},     {"p0", eq.p0},
          {"dQ", eq.dQ},        {"tangent", eq.tangent},   {"residual", eq.residual}};
}

std::string equilibria_csv(const EquilibriumSet& set) {
  std::string csv = "index,P_star,p0,dQ,tangent,residual\n";
  for (std::size_t i = 0; i < set.positive.size(); ++i) {
    const EquilibriumPoint& eq = set.positive[i];
    csv += fmt::format("{},{},{},{},{},{}\n", i, num(eq.P_star), num(eq.p0), num(eq.dQ), eq.tangent ? "true" : "false",
                       num(eq.residual));
  }
  return csv;
}

json stability_json(const StabilityReport& r) {
  return {{"K0", r.K0},
          {"dQ", r.dQ},
          {"identity_residual", r.identity_residual},
          {"cond_poscond1", r.positivity.poscond1},
          {"cond_poscond2", r.positivity.poscond2},
          {"cond_posstrict3", r.positivity.posstrict3},
          {"margin_poscond1", r.positivity.margin1},
          {"margin_poscond2", r.positivity.margin2},
          {"margin_posstrict3", r.positivity.margin3},
          {"dominant_real_eigenvalue",
           r.dominant_real_eigenvalue ? json(*r.dominant_real_eigenvalue) : json(nullptr)},
          {"classification", to_string(r.classification)}};
}

json marginal_json(const MarginalDiagnosis& d) {
  json j = {{"Rpp", d.Rpp},
            {"R_prime", d.R_prime},
            {"growth_integral", d.growth_integral},
            {"curvature_integral", d.curvature_integral},
            {"one_sided_sign", d.one_sided_sign},
            {"verdict", d.verdict}};
  if (!d.warning.empty()) j["warning"] = d.warning;
  return j;
}

json stability_entry(const ModelIngredients& model, std::size_t index, const EquilibriumPoint& eq,
                     const StabilityReport& r, const SpectralOptions& opts) {
  json j = equilibrium_json(index, eq);
  j.update(stability_json(r));
  if (r.classification == Stability::MarginalZeroEigenvalue) {
    try {
      j["marginal_diagnosis"] = marginal_json(marginal_diagnosis(model, eq, opts));
    } catch (const UnsupportedCase& e) {
      j["marginal_diagnosis"] = {{"unsupported", e.what()}};
    }
  }
  return j;
}

std::string trajectory_csv(const Trajectory& t, bool with_density) {
  std::string csv = "t,P";
  if (with_density)
    for (double s : t.s) csv += "," + num(s);
  csv += "\n";
  for (const TrajectorySample& smp : t.samples) {
    csv += num(smp.t) + "," + num(smp.P);
    if (with_density && smp.density)
      for (double p : *smp.density) csv += "," + num(p);
    csv += "\n";
  }
  return csv;
}

std::string balance_csv(const Trajectory& t) {
  std::string csv = "t,balance_residual\n";
  for (std::size_t k = 0; k < t.samples.size(); ++k)
    csv += num(t.samples[k].t) + "," + num(t.balance_residuals[k]) + "\n";
  return csv;
}

std::string snapshot_csv(const std::vector<double>& s, const std::vector<double>& p) {
  std::string csv = "s,p\n";
  for (std::size_t i = 0; i < s.size(); ++i) csv += num(s[i]) + "," + num(p[i]) + "\n";
  return csv;
}

std::string branches_csv(const BifurcationDiagram& d) {
  std::string csv = "C,P_star,classification,tangent_flag\n";
  for (const DiagramEntry& e : d.entries)
    for (const BranchPoint& p : e.points)
      csv += fmt::format("{},{},{},{}\n", num(e.C), num(p.P_star),
                         p.error.empty() ? to_string(p.classification) : "ClassificationFailed",
                         p.tangent ? "true" : "false");
  return csv;
}

std::string folds_csv(const std::vector<Fold>& folds) {
  std::string csv = "C_star,P_fold\n";
  for (const Fold& f : folds) csv += num(f.C_star) + "," + num(f.P_fold) + "\n";
  return csv;
}

void write_manifest(Outputs& out, const std::string& command, const Flags& flags, const json& parameters,
                    std::chrono::steady_clock::time_point start, const json& extra = json::object()) {
  std::vector<std::string> files = out.files();
  files.push_back(out.path("manifest.json"));
  json m = {{"command", command},
            {"config_path", flags.config},
            {"parameters", parameters},
            {"outputs", files},
            {"version", kVersion},
            {"wall_time", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  out.write("manifest.json", m.dump(2) + "\n");
}

std::vector<double> initial_density(const Context& ctx, const std::string& initial, const std::vector<double>& s) {
  if (initial.empty()) throw UsageError("simulate needs --initial (an expression in s or equilibrium:<index>)");
  const std::string prefix = "equilibrium:";
  if (initial.rfind(prefix, 0) == 0) {
    std::size_t index = 0;
    try {
      std::size_t used = 0;
      const long k = std::stol(initial.substr(prefix.size()), &used);
      if (k < 0 || used != initial.size() - prefix.size()) throw std::invalid_argument("index");
      index = static_cast<std::size_t>(k);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad equilibrium index in '{}'", initial));
    }
    const EquilibriumSet set = find_equilibria(ctx.model, ctx.C, ctx.cfg.P_lo, ctx.cfg.P_hi, ctx.equilibrium_options());
    if (index >= set.positive.size())
      throw UsageError(fmt::format("equilibrium {} requested, {} found at C = {}", index, set.positive.size(), ctx.C));
    return set.positive[index].profile;
  }
  const Expression expr = parse_rate(initial);
  std::vector<double> p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = expr(s[i], 0.0);
  return p;
}

int cmd_equilibria(const Flags& flags, std::ostream& o) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = make_context(flags);
  Outputs out(flags.out);
  const EquilibriumSet set = find_equilibria(ctx.model, ctx.C, ctx.cfg.P_lo, ctx.cfg.P_hi, ctx.equilibrium_options());
  json report = {{"C", ctx.C},
                 {"P_lo", ctx.cfg.P_lo},
                 {"P_hi", ctx.cfg.P_hi},
                 {"model", model_echo(ctx)},
                 {"trivial", set.trivial},
                 {"R_at_P_hi", set.R_at_P_hi},
                 {"skipped", set.skipped},
                 {"equilibria", json::array()}};
  for (std::size_t i = 0; i < set.positive.size(); ++i) report["equilibria"].push_back(equilibrium_json(i, set.positive[i]));
  out.write("equilibria.csv", equilibria_csv(set));
  out.write("equilibria.json", report.dump(2) + "\n");
  write_manifest(out, "equilibria", flags, ctx.parameters, start);
  o << fmt::format("C = {}: {} positive equilibria{}\n", ctx.C, set.positive.size(), set.trivial ? " plus P = 0" : "");
  for (const auto& eq : set.positive)
    o << fmt::format("  P* = {:.12g}  dQ = {:.6g}{}\n", eq.P_star, eq.dQ, eq.tangent ? "  (tangent)" : "");
  return kSuccess;
}

int cmd_stability(const Flags& flags, std::ostream& o) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = make_context(flags);
  Outputs out(flags.out);
  const SpectralOptions sp = ctx.spectral_options();
  const EquilibriumSet set = find_equilibria(ctx.model, ctx.C, ctx.cfg.P_lo, ctx.cfg.P_hi, ctx.equilibrium_options());
  json report = {{"C", ctx.C}, {"model", model_echo(ctx)}, {"trivial", set.trivial}, {"equilibria", json::array()}};
  o << fmt::format("C = {}\n", ctx.C);
  for (std::size_t i = 0; i < set.positive.size(); ++i) {
    const StabilityReport r = classify(ctx.model, set.positive[i], sp);
    report["equilibria"].push_back(stability_entry(ctx.model, i, set.positive[i], r, sp));
    o << fmt::format("  P* = {:.12g}  {}  K(0) = {:.10g}\n", set.positive[i].P_star, to_string(r.classification), r.K0);
  }
  out.write("stability.json", report.dump(2) + "\n");
  write_manifest(out, "stability", flags, ctx.parameters, start);
  return kSuccess;
}

int cmd_simulate(const Flags& flags, std::ostream& o) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx = make_context(flags);
  Outputs out(flags.out);
  SimulationConfig sc;
  sc.model = ctx.model;
  sc.C = ctx.C;
  sc.grid.N = ctx.cfg.N;
  sc.T_final = ctx.cfg.T;
  sc.cfl = ctx.cfg.cfl;
  sc.output_every = ctx.cfg.output_every;
  sc.record_density = flags.record_density;
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::vector<double> s = sc.grid.nodes(sc.model.m);
  const std::vector<double> p0 = initial_density(ctx, flags.initial, s);
  const Trajectory t = simulate(sc, p0);

  ctx.parameters["T"] = sc.T_final;
  ctx.parameters["cfl"] = sc.cfl;
  ctx.parameters["output_every"] = sc.output_every;
  ctx.parameters["initial"] = flags.initial;
  out.write("trajectory.csv", trajectory_csv(t, flags.record_density));
  out.write("balance.csv", balance_csv(t));
  out.write("snapshot.csv", snapshot_csv(t.s, t.final_state.density));
  write_manifest(out, "simulate", flags, ctx.parameters, start);
  o << fmt::format("P(0) = {:.10g}, P({}) = {:.10g}, {} steps, max balance residual {:.3e}\n", t.samples.front().P,
                   t.final_state.t, t.final_state.P, t.steps, t.max_balance_residual());
  return kSuccess;
}

int cmd_bifurcate(const Flags& flags, std::ostream& o) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx = make_context(flags);
  if (flags.steps < 1) throw UsageError(fmt::format("--steps must be >= 1, got {}", flags.steps));
  if (!(flags.C_lo >= 0.0 && flags.C_hi > flags.C_lo))
    throw UsageError(fmt::format("need 0 <= C_lo < C_hi, got [{}, {}]", flags.C_lo, flags.C_hi));
  Outputs out(flags.out);
  std::vector<double> Cs;
  for (int k = 0; k <= flags.steps; ++k)
    Cs.push_back(k == flags.steps ? flags.C_hi : flags.C_lo + (flags.C_hi - flags.C_lo) * k / flags.steps);
  BifurcationOptions bo;
  bo.equilibrium = ctx.equilibrium_options();
  bo.spectral = ctx.spectral_options();
  bo.P_lo = ctx.cfg.P_lo;
  bo.P_hi = ctx.cfg.P_hi;
  const BifurcationDiagram d = sweep(ctx.model, Cs, bo);

  ctx.parameters["C_lo"] = flags.C_lo;
  ctx.parameters["C_hi"] = flags.C_hi;
  ctx.parameters["steps"] = flags.steps;
  out.write("branches.csv", branches_csv(d));
  out.write("folds.csv", folds_csv(d.folds));
  write_manifest(out, "bifurcate", flags, ctx.parameters, start);
  o << fmt::format("{} parameter values, {} folds\n", Cs.size(), d.folds.size());
  for (const Fold& f : d.folds) o << fmt::format("  fold at C* = {:.10g}, P = {:.10g}\n", f.C_star, f.P_fold);
  return kSuccess;
}

int cmd_reproduce(const Flags& flags, std::ostream& o) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx = make_context(flags);
  Outputs out(flags.out);
  StudyOptions so;
  so.N = ctx.cfg.N;
  so.quad.panel_count = ctx.cfg.panels;
  so.scan.abs_tol = ctx.cfg.abs_tol;
  so.scan.scan_points = ctx.cfg.scan_points;
  so.cfl = ctx.cfg.cfl;
  const StudyResult r = run_study(so);

  json summary = {{"N", so.N}, {"all_passed", r.all_passed()}, {"criteria", json::array()}};
  json seconds = json::object();
  for (const CriterionResult& c : r.criteria) {
    summary["criteria"].push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    seconds[std::to_string(c.id)] = c.seconds;
    o << fmt::format("[{}] criterion {}: {} ({})\n", c.passed ? "PASS" : "FAIL", c.id, c.name, c.detail);
  }
  out.write("summary.json", summary.dump(2) + "\n");
  out.write("equilibria_C0.csv", equilibria_csv(r.equilibria_C0));
  out.write("equilibria_C0.2.csv", equilibria_csv(r.equilibria_C02));
  json stab = json::array();
  for (std::size_t i = 0; i < r.stability_C0.size() && i < r.equilibria_C0.positive.size(); ++i)
    stab.push_back({{"C", 0.0}, {"report", stability_json(r.stability_C0[i])}, {"P_star", r.equilibria_C0.positive[i].P_star}});
  for (std::size_t i = 0; i < r.stability_C02.size() && i < r.equilibria_C02.positive.size(); ++i)
    stab.push_back({{"C", 0.2}, {"report", stability_json(r.stability_C02[i])}, {"P_star", r.equilibria_C02.positive[i].P_star}});
  out.write("stability.json", stab.dump(2) + "\n");
  out.write("marginal.json", marginal_json(r.marginal).dump(2) + "\n");
  out.write("branches.csv", branches_csv(r.diagram));
  out.write("folds.csv", folds_csv({r.fold}));
  out.write("decline.csv", trajectory_csv(r.decline, false));
  out.write("bistable.csv", trajectory_csv(r.bistable, false));
  out.write("persistence.csv", trajectory_csv(r.persistence, false));
  std::string conv = "N,max_balance_residual\n";
  for (std::size_t i = 0; i < r.convergence_N.size(); ++i)
    conv += fmt::format("{},{}\n", r.convergence_N[i], num(r.convergence_residual[i]));
  out.write("convergence.csv", conv);
  write_manifest(out, "reproduce", flags, ctx.parameters, start, {{"criterion_seconds", seconds}});
  return r.all_passed() ? kSuccess : kAssertionFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibria, stability, bifurcations and simulations of a size-structured population with inflow",
               "sspop"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "INI model configuration");
  app.add_option("--out", flags.out, "Output directory");
  flags.C_opt = app.add_option("--C", flags.C, "Inflow of minimal-size individuals");
  flags.T_opt = app.add_option("--T", flags.T, "Final simulation time");
  flags.N_opt = app.add_option("--N", flags.N, "Size grid cells");
  flags.P_hi_opt = app.add_option("--P-hi", flags.P_hi, "Upper end of the equilibrium search window");

  auto* eq = app.add_subcommand("equilibria", "Positive equilibria at one C");
  auto* st = app.add_subcommand("stability", "Linear stability of each equilibrium");
  auto* sim = app.add_subcommand("simulate", "Time integration from an initial density");
  sim->add_option("--initial", flags.initial, "Expression in s, or equilibrium:<index>");
  sim->add_flag("--record-density", flags.record_density, "Write the density at every sample");
  auto* bif = app.add_subcommand("bifurcate", "Sweep C and locate folds");
  bif->add_option("--C-lo", flags.C_lo, "Lowest C");
  bif->add_option("--C-hi", flags.C_hi, "Highest C");
  bif->add_option("--steps", flags.steps, "Number of C intervals");
  auto* rep = app.add_subcommand("reproduce", "Run the worked example and check every acceptance criterion");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (eq->parsed()) return cmd_equilibria(flags, out);
    if (st->parsed()) return cmd_stability(flags, out);
    if (sim->parsed()) return cmd_simulate(flags, out);
    if (bif->parsed()) return cmd_bifurcate(flags, out);
    if (rep->parsed()) return cmd_reproduce(flags, out);
  } catch (const ParseError& e) {
    err << "error: expression: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kAssertionFailure;
  }
  return kUsageError;
}

}  // namespace sspop::cli
