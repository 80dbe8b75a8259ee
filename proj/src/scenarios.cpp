#include "arefs/scenarios.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "arefs/flows.hpp"
#include "arefs/lyapunov.hpp"
#include "arefs/metrics.hpp"
#include "arefs/numutil.hpp"
#include "arefs/pde.hpp"
#include "arefs/rng.hpp"
#include "arefs/sampler.hpp"
#include "arefs/spectral.hpp"
#include "arefs/targets.hpp"

namespace arefs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config error at " + path + ": " + what);
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(path + "." + it.key(), "unknown key");
}

double num(const nlohmann::json& j, const std::string& key, double dflt,
           const std::string& path) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) bad(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

int integer(const nlohmann::json& j, const std::string& key, int dflt,
            const std::string& path) {
  double v = num(j, key, dflt, path);
  if (v != std::floor(v)) bad(path + "." + key, "expected an integer");
  return int(v);
}

// ---- parameter blocks -----------------------------------------------------

std::shared_ptr<TargetDensity> target_from(const nlohmann::json& j,
                                           const std::string& path) {
  check_keys(j, {"family", "side", "cx", "cy", "mean", "var", "height",
                 "separation", "quad_resolution"},
             path);
  if (!j.contains("family")) bad(path + ".family", "required");
  std::string fam = j.at("family");
  double side = num(j, "side", 1.0, path);
  Potential pot;
  if (fam == "flat-torus") {
    pot = flat_torus(side);
  } else if (fam == "trig-torus") {
    pot = trig_torus(num(j, "cx", 0.5, path), num(j, "cy", 0.0, path), side);
  } else if (fam == "gaussian") {
    std::vector<double> m{0.0, 0.0}, v{1.0, 1.0};
    if (j.contains("mean")) m = j.at("mean").get<std::vector<double>>();
    if (j.contains("var")) v = j.at("var").get<std::vector<double>>();
    pot = gaussian_potential(m, v);
  } else if (fam == "double-well") {
    pot = double_well(num(j, "height", 1.0, path),
                      num(j, "separation", 1.0, path));
  } else {
    bad(path + ".family", "unknown family " + fam);
  }
  int qres = integer(j, "quad_resolution", pot.domain == Domain::Torus ? 1024 : 512,
                     path);
  return std::make_shared<TargetDensity>(normalize(pot, qres));
}

struct NamedFlow {
  Flow flow;
  std::string name;
  std::shared_ptr<FullspaceFlow> full;  // set for full-space constructions
};

NamedFlow flow_from(const nlohmann::json& j,
                    std::shared_ptr<const TargetDensity> scenario_target,
                    const std::string& path) {
  check_keys(j, {"type", "n", "phi", "target", "map_resolution",
                 "table_resolution", "probe_resolution", "slope"},
             path);
  if (!j.contains("type")) bad(path + ".type", "required");
  std::string type = j.at("type");
  int n = integer(j, "n", 1, path);
  if (n < 1) bad(path + ".n", "n must be >= 1");

  if (type == "cellular") {
    auto flat = std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
    return {cellular_flow(n, flat), "cellular-" + std::to_string(n), nullptr};
  }
  if (type == "pushforward") {
    auto flat = std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
    std::shared_ptr<const TargetDensity> tgt = scenario_target;
    if (j.contains("target")) tgt = target_from(j.at("target"), path + ".target");
    if (!tgt || !tgt->torus) bad(path + ".target", "pushforward needs a torus target");
    int mres = integer(j, "map_resolution", 256, path);
    auto Z = build_transport_map(flat, tgt, mres, mres);
    return {pushforward_flow(cellular_flow(n, flat), Z),
            "pushforward-" + std::to_string(n), nullptr};
  }
  if (type == "fullspace") {
    std::shared_ptr<const TargetDensity> tgt = scenario_target;
    if (j.contains("target")) tgt = target_from(j.at("target"), path + ".target");
    if (!tgt || tgt->torus) bad(path + ".target", "fullspace needs an R^2 target");
    auto full = std::make_shared<FullspaceFlow>(build_fullspace_flow(
        tgt, n, integer(j, "phi", 0, path),
        integer(j, "table_resolution", 1024, path),
        integer(j, "probe_resolution", 512, path)));
    return {full->flow, "fullspace-" + std::to_string(n), full};
  }
  if (type == "grad-perp") {
    if (!scenario_target) bad(path, "grad-perp flow needs the scenario target");
    return {grad_perp_flow(scenario_target), "grad-perp", nullptr};
  }
  if (type == "shear") {
    double slope = num(j, "slope", 1.6180339887498949, path);
    Flow f;
    f.weight = std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
    f.velocity = [slope](Vec2) { return Vec2{1.0, slope}; };
    f.energy = 1.0 + slope * slope;
    return {f, "shear", nullptr};
  }
  bad(path + ".type", "unknown flow type " + type);
}

// ---- artifact bookkeeping ---------------------------------------------------

struct Ctx {
  std::string outdir;
  uint64_t seed = 1;
  nlohmann::json files = nlohmann::json::array();
  std::vector<std::string> plot;  // "series,x,y" rows

  std::string pathOf(const std::string& name) const {
    return outdir + "/" + name;
  }
  void track(const std::string& name) {
    files.push_back({{"name", name},
                     {"fnv1a", fnv1a_file(pathOf(name))}});
  }
  void emit_text(const std::string& name, const std::string& content) {
    std::ofstream out(pathOf(name), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + pathOf(name));
    out << content;
    out.close();
    track(name);
  }
  void emit_json(const std::string& name, const nlohmann::json& j) {
    emit_text(name, j.dump(2) + "\n");
  }
  void add_plot(const std::string& series, double x, double y) {
    plot.push_back(series + "," + fmt_double(x) + "," + fmt_double(y));
  }
  void flush_plot() {
    if (plot.empty()) return;
    std::string s = "series,x,y\n";
    for (auto& r : plot) s += r + "\n";
    emit_text("plot.csv", s);
  }
};

GridField center_field(const Grid2D& g,
                       const std::function<double(Vec2)>& f) {
  GridField q(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      q.at(i, j) = f({g.x0 + (i + 0.5) * g.hx(), g.y0 + (j + 0.5) * g.hy()});
  return q;
}

GridField initial_ratio(const nlohmann::json& j, const Grid2D& g,
                        const std::string& path) {
  check_keys(j, {"type", "amp"}, path);
  std::string type = j.value("type", "warmstart");
  double amp = j.contains("amp") ? j.at("amp").get<double>() : 0.5;
  if (type == "cosx") {
    double L = g.Lx;
    return center_field(
        g, [amp, L](Vec2 p) { return 1.0 + amp * std::cos(kTwoPi * p.x / L); });
  }
  if (type == "warmstart") {
    double L = g.Lx;
    return center_field(g, [L](Vec2 p) {
      double x = kTwoPi * p.x / L, y = kTwoPi * p.y / L;
      return 1.0 + 0.2 * std::cos(x) + 0.15 * std::sin(2.0 * y) +
             0.05 * std::cos(3.0 * (x + y));
    });
  }
  bad(path + ".type", "unknown initial ratio " + type);
}

// ---- scenarios --------------------------------------------------------------

nlohmann::json run_divergence_audit(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "flows", "resolutions"}, "$");
  std::vector<int> res = cfg.contains("resolutions")
                             ? cfg.at("resolutions").get<std::vector<int>>()
                             : std::vector<int>{256, 512};
  if (!cfg.contains("flows")) bad("$.flows", "required");

  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "flow,resolution,max_residual,l2_residual\n";
  int fi = 0;
  for (const auto& fj : cfg.at("flows")) {
    auto nf = flow_from(fj, nullptr, "$.flows[" + std::to_string(fi++) + "]");
    const auto& w = *nf.flow.weight;
    nlohmann::json entry = {{"name", nf.name}, {"residuals", nlohmann::json::array()}};
    std::vector<double> maxima;
    double floor = 0.0;
    for (int r : res) {
      Grid2D g = w.torus ? make_torus_grid(r, w.potential.side, w.potential.origin)
                         : Grid2D{r, r, w.quad_grid.x0, w.quad_grid.y0,
                                  w.quad_grid.Lx, w.quad_grid.Ly, true};
      auto rep = weighted_divergence(nf.flow, g);
      maxima.push_back(rep.max_norm);
      // roundoff floor: differencing pi*v of this magnitude at this spacing
      double pvmax = 0.0;
      for (int i = 0; i < g.nx; i += 8)
        for (int jn = 0; jn < g.ny; jn += 8) {
          Vec2 p = g.node(i, jn);
          Vec2 u = nf.flow.velocity(p);
          pvmax = std::max(pvmax, w.pi(p) * std::hypot(u.x, u.y));
        }
      floor = std::max(floor, 1e-10 * pvmax / g.hx());
      entry["residuals"].push_back({{"resolution", r},
                                    {"max", rep.max_norm},
                                    {"l2", rep.l2_norm}});
      csv += nf.name + "," + std::to_string(r) + "," + fmt_double(rep.max_norm) +
             "," + fmt_double(rep.l2_norm) + "\n";
      ctx.add_plot(nf.name, r, rep.max_norm);
    }
    bool exact = true;
    for (double m : maxima) exact = exact && m <= floor;
    entry["exact"] = exact;
    if (maxima.size() >= 2 && !exact)
      entry["factor"] = maxima[0] / maxima[1];
    rows.push_back(entry);
  }
  ctx.emit_text("divergence.csv", csv);
  return {{"flows", rows}};
}

nlohmann::json run_transport_build(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "source", "target", "map_resolution",
                   "samples", "bins", "save_map"},
             "$");
  auto src = cfg.contains("source")
                 ? target_from(cfg.at("source"), "$.source")
                 : std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
  if (!cfg.contains("target")) bad("$.target", "required");
  auto tgt = target_from(cfg.at("target"), "$.target");
  int mres = integer(cfg, "map_resolution", 512, "$");
  int nsamp = integer(cfg, "samples", 100000, "$");
  int bins = integer(cfg, "bins", 24, "$");

  auto Z = build_transport_map(src, tgt, mres, mres);
  double jerr = transport_jacobian_error(Z);

  auto xs = sample_target(*src, nsamp, ctx.seed, 0);
  for (auto& p : xs.x) p = Z.forward(p);
  auto gof = chi2_gof(xs.x, *tgt, bins);

  if (cfg.value("save_map", true)) {
    Z.save(ctx.pathOf("transport.map"));
    ctx.track("transport.map");
  }
  return {{"map_resolution", mres},
          {"jacobian_error", jerr},
          {"chi2", {{"stat", gof.stat}, {"dof", gof.dof}, {"p", gof.pvalue}}}};
}

nlohmann::json run_pde_decay_sweep(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "target", "flow", "A", "T",
                   "resolution", "dt", "q0"},
             "$");
  auto tgt = cfg.contains("target")
                 ? target_from(cfg.at("target"), "$.target")
                 : std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
  if (!tgt->torus) bad("$.target", "the evolution runs on a torus");
  std::vector<double> As = cfg.contains("A")
                               ? cfg.at("A").get<std::vector<double>>()
                               : std::vector<double>{0.0};
  for (double A : As)
    if (A < 0.0) bad("$.A", "A must be nonnegative");
  int res = integer(cfg, "resolution", 128, "$");
  PdeOptions opt;
  opt.T = num(cfg, "T", 0.1, "$");
  opt.dt = num(cfg, "dt", 0.0, "$");

  std::optional<NamedFlow> nf;
  if (cfg.contains("flow") && !cfg.at("flow").is_null())
    nf = flow_from(cfg.at("flow"), tgt, "$.flow");

  Grid2D g = make_torus_grid(res, tgt->potential.side, tgt->potential.origin);
  GridField q0 = cfg.contains("q0") ? initial_ratio(cfg.at("q0"), g, "$.q0")
                                    : initial_ratio(nlohmann::json::object(), g, "$.q0");
  bool cosx = cfg.contains("q0") && cfg.at("q0").value("type", "") == "cosx";
  {  // normalize so pi q is a probability density and H decays to zero
    double mass = 0.0;
    for (int i = 0; i < res; ++i)
      for (int j = 0; j < res; ++j)
        mass += tgt->pi({g.x0 + (i + 0.5) * g.hx(), g.y0 + (j + 0.5) * g.hy()}) *
                q0.at(i, j);
    mass *= g.cell_area();
    if (!cosx)
      for (auto& v : q0.values) v /= mass;
  }

  nlohmann::json runs = nlohmann::json::array();
  for (double A : As) {
    auto r = evolve(q0, *tgt, nf ? &nf->flow : nullptr, A, opt);
    std::string tag = "evolution_A" + fmt_double(A) + ".csv";
    r.record.write_csv(ctx.pathOf(tag));
    ctx.track(tag);
    for (const auto& row : r.record.rows)
      ctx.add_plot("A=" + fmt_double(A), row.t, row.H);

    nlohmann::json run = {
        {"A", A},
        {"H0", r.record.rows.front().H},
        {"H_final", r.record.rows.back().H},
        {"hnorm0", r.record.rows.front().hnorm},
        {"hnorm_final", r.record.rows.back().hnorm},
        {"mass_drift", r.record.mass_drift},
        {"entropy_monotone", r.record.entropy_monotone},
        {"dissipation_mismatch", r.record.max_dissipation_mismatch},
        {"max_principle_violation", r.record.max_principle_violation},
        {"q_range", {r.record.rows.front().qmin, r.record.rows.front().qmax}},
        {"dt", r.record.dt},
        {"steps", r.record.steps},
        {"upwind_faces", r.record.upwind_faces},
        {"kernel", r.record.kernel}};
    if (cosx) {
      // surviving amplitude of the cos(2 pi x / L) mode
      double amp = 0.0, L = g.Lx;
      for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j)
          amp += r.q.at(i, j) * std::cos(kTwoPi * (g.x0 + (i + 0.5) * g.hx()) / L);
      run["cos_amp_final"] = 2.0 * amp / (res * double(res));
    }
    runs.push_back(run);
  }
  return {{"resolution", res}, {"T", opt.T}, {"runs", runs}};
}

nlohmann::json run_spectral_report(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "target", "flow", "resolution",
                   "A_gap", "A_psi", "dense_resolution", "compute_rv"},
             "$");
  auto tgt = cfg.contains("target")
                 ? target_from(cfg.at("target"), "$.target")
                 : std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
  if (!cfg.contains("flow")) bad("$.flow", "required");
  auto nf = flow_from(cfg.at("flow"), tgt, "$.flow");
  int res = integer(cfg, "resolution", 64, "$");
  auto Ag = cfg.contains("A_gap") ? cfg.at("A_gap").get<std::vector<double>>()
                                  : std::vector<double>{0, 8, 64, 512};
  auto Ap = cfg.contains("A_psi") ? cfg.at("A_psi").get<std::vector<double>>()
                                  : Ag;
  int dres = integer(cfg, "dense_resolution", 0, "$");

  auto d = OperatorDiscretization::build(*tgt, &nf.flow, res);
  SpectralReport rep;
  rep.grid = res;
  rep.kappa = poincare_constant(d);
  std::vector<double> gap_ims;
  for (double A : Ag) {
    auto g = principal_gap(d, A, rep.kappa);
    rep.mA.push_back({A, g.re, g.im});
    if (std::abs(g.im) > 1e-12) gap_ims.push_back(g.im);
    ctx.add_plot("m_A", A, g.re);
  }
  for (double A : Ap) {
    std::vector<double> hints;
    for (size_t k = 0; k < Ag.size(); ++k)
      if (Ag[k] == A && std::abs(rep.mA[k].im) > 1e-12)
        hints.push_back(rep.mA[k].im);
    auto p = psi_lower_bound(d, A, rep.kappa, hints);
    rep.psiA.push_back({A, p.psi, p.lambda_star});
    ctx.add_plot("psi_A", A, p.psi);
  }
  if (cfg.value("compute_rv", true)) rep.rv = r_of_v(*tgt, nf.flow, res);

  nlohmann::json out = rep.to_json();
  out["flow"] = nf.name;

  if (dres > 0) {
    auto dd = OperatorDiscretization::build(*tgt, &nf.flow, dres);
    nlohmann::json dj;
    double kit = poincare_constant(dd);
    double kde = dense_poincare(dd);
    dj["kappa"] = {{"iterative", kit}, {"dense", kde}};
    dj["mA"] = nlohmann::json::array();
    dj["psiA"] = nlohmann::json::array();
    for (double A : Ag) {
      auto gi = principal_gap(dd, A, kit);
      auto gd = dense_principal_gap(dd, A);
      dj["mA"].push_back({{"A", A},
                          {"iterative", gi.re},
                          {"dense", gd.re},
                          {"im_iterative", gi.im},
                          {"im_dense", gd.im}});
    }
    for (double A : Ap) {
      std::vector<double> hints;
      auto gi = principal_gap(dd, A, kit);
      if (std::abs(gi.im) > 1e-12) hints.push_back(gi.im);
      auto pi_it = psi_lower_bound(dd, A, kit, hints);
      auto lamset = std::vector<double>{pi_it.lambda_star,
                                        0.98 * pi_it.lambda_star,
                                        1.02 * pi_it.lambda_star};
      auto sig = dense_sigma_min(dd, A, lamset);
      double pd = *std::min_element(sig.begin(), sig.end());
      dj["psiA"].push_back(
          {{"A", A}, {"iterative", pi_it.psi}, {"dense", pd}});
    }
    out["dense_check"] = dj;
  }
  ctx.emit_json("spectral.json", out);
  return out;
}

nlohmann::json run_rv_ladder(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "n", "resolution",
                   "pushforward_target", "map_resolution"},
             "$");
  auto ns = cfg.contains("n") ? cfg.at("n").get<std::vector<int>>()
                              : std::vector<int>{1, 2, 4};
  int res = integer(cfg, "resolution", 64, "$");
  int mres = integer(cfg, "map_resolution", 256, "$");
  auto flat = std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));

  nlohmann::json out;
  out["flat"] = nlohmann::json::array();
  std::vector<double> rs;
  for (int n : ns) {
    auto f = cellular_flow(n, flat);
    auto rv = r_of_v(*flat, f, res);
    rs.push_back(rv.value);
    out["flat"].push_back({{"n", n}, {"r", rv.value}, {"basis_dim", rv.basis_dim}});
    ctx.add_plot("flat", n, rv.value);
  }
  // least-squares slope of log r against log n
  if (ns.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t k = 0; k < ns.size(); ++k) {
      double x = std::log(double(ns[k])), y = std::log(rs[k]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double m = ns.size();
    out["loglog_slope"] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out["ratio_first_two"] = rs[1] / rs[0];
  }
  if (cfg.contains("pushforward_target")) {
    auto tgt = target_from(cfg.at("pushforward_target"), "$.pushforward_target");
    auto Z = build_transport_map(flat, tgt, mres, mres);
    out["pushforward"] = nlohmann::json::array();
    for (int n : ns) {
      auto f = pushforward_flow(cellular_flow(n, flat), Z);
      auto rv = r_of_v(*tgt, f, res);
      out["pushforward"].push_back(
          {{"n", n}, {"r", rv.value}, {"basis_dim", rv.basis_dim}});
      ctx.add_plot("pushforward", n, rv.value);
    }
  }
  ctx.emit_json("rv.json", out);
  return out;
}

nlohmann::json run_lyapunov_audit(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "potential", "delta", "drift_rmax",
                   "radii", "trials"},
             "$");
  if (!cfg.contains("potential")) bad("$.potential", "required");
  auto tgt = target_from(cfg.at("potential"), "$.potential");
  double delta = num(cfg, "delta", 0.5, "$");
  auto cert = build_certificate(tgt->potential, delta);

  auto drift = verify_drift(cert, num(cfg, "drift_rmax", 6.0, "$"));
  std::vector<double> radii = cfg.contains("radii")
                                  ? cfg.at("radii").get<std::vector<double>>()
                                  : std::vector<double>{2.0, 3.0};
  int trials = integer(cfg, "trials", 100, "$");

  nlohmann::json out = cert.to_json();
  out["drift"] = {{"max_residual", drift.max_residual},
                  {"max_W", drift.max_W},
                  {"points", drift.points}};
  out["tails"] = nlohmann::json::array();
  for (double r : radii) {
    auto tc = tail_poincare_check(cert, *tgt, r, trials, ctx.seed);
    out["tails"].push_back({{"r", tc.r},
                            {"lambda_min", tc.lambda_min},
                            {"worst_quotient", tc.worst_quotient},
                            {"trials", tc.trials},
                            {"ok", tc.ok}});
    ctx.add_plot("quotient_floor", r, tc.lambda_min);
    ctx.add_plot("worst_quotient", r, tc.worst_quotient);
  }
  auto conf = confining_report(tgt->potential, {1.0, 2.0, 4.0, 6.0});
  out["confining"] = nlohmann::json::array();
  for (auto& row : conf.rows)
    out["confining"].push_back({{"r", row.r}, {"inf", row.inf_value}});
  out["confining_ok"] = conf.satisfied;
  ctx.emit_json("lyapunov.json", out);
  return out;
}

nlohmann::json run_sde_race(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "target", "A", "N_mean", "N_stat",
                   "N_kl", "mean_shift", "T_mean", "T_stat", "kl_times",
                   "kl_bins", "stat_bins"},
             "$");
  auto tgt = cfg.contains("target")
                 ? target_from(cfg.at("target"), "$.target")
                 : std::make_shared<TargetDensity>(
                       normalize(gaussian_potential({0, 0}, {1, 1}), 512));
  auto rot = grad_perp_flow(tgt);
  std::vector<double> As = cfg.contains("A")
                               ? cfg.at("A").get<std::vector<double>>()
                               : std::vector<double>{0, 10, 100};
  for (double A : As)
    if (A < 0.0) bad("$.A", "A must be nonnegative");
  int Nmean = integer(cfg, "N_mean", 100000, "$");
  int Nstat = integer(cfg, "N_stat", 50000, "$");
  int Nkl = integer(cfg, "N_kl", 100000, "$");
  Vec2 shift{0.5, 0.0};
  if (cfg.contains("mean_shift")) {
    auto v = cfg.at("mean_shift").get<std::vector<double>>();
    shift = {v.at(0), v.at(1)};
  }
  nlohmann::json out;

  {  // mean relaxation, plain Langevin
    SimOptions so;
    so.T = num(cfg, "T_mean", 1.0, "$");
    so.dt = 1e-3;
    so.seed = ctx.seed;
    so.stream = 1;
    so.escape_radius = 50.0;
    auto init = shifted_by(sample_target(*tgt, Nmean, ctx.seed, 2), shift);
    auto r = simulate(*tgt, nullptr, 0.0, init, so);
    double m0 = std::hypot(shift.x, shift.y);
    double worst = 0.0;
    for (size_t k = 0; k < r.times.size(); ++k) {
      double got = std::hypot(r.means[k].x, r.means[k].y);
      double want = m0 * std::exp(-r.times[k]);
      worst = std::max(worst, std::abs(got - want));
      ctx.add_plot("mean_norm", r.times[k], got);
      ctx.add_plot("mean_norm_exact", r.times[k], want);
    }
    out["mean_decay"] = {{"N", Nmean},
                         {"max_abs_error", worst},
                         {"tolerance", 3.0 / std::sqrt(double(Nmean))},
                         {"escaped", r.escaped}};
  }

  {  // stationarity under the rotating drift
    out["stationary"] = nlohmann::json::array();
    int bins = integer(cfg, "stat_bins", 16, "$");
    double Ts = num(cfg, "T_stat", 0.01, "$");
    int sidx = 0;
    for (double A : As) {
      SimOptions so;
      so.T = Ts;
      // keep the Euler-Maruyama variance inflation ~(1+A^2)dt/2 below 1%
      so.dt = std::min(1e-3, 0.02 / (1.0 + A * A));
      so.seed = ctx.seed;
      so.stream = 10 + sidx++;
      so.escape_radius = 50.0;
      auto init = sample_target(*tgt, Nstat, ctx.seed, so.stream);
      auto r = simulate(*tgt, &rot, A, init, so);
      auto gof = chi2_gof(r.final.x, *tgt, bins);
      out["stationary"].push_back({{"A", A},
                                   {"dt", so.dt},
                                   {"p", gof.pvalue},
                                   {"stat", gof.stat},
                                   {"dof", gof.dof},
                                   {"escaped", r.escaped}});
    }
  }

  {  // entropy relaxation of the shifted start
    std::vector<double> kts = cfg.contains("kl_times")
                                  ? cfg.at("kl_times").get<std::vector<double>>()
                                  : std::vector<double>{0.25, 0.75};
    int bins = integer(cfg, "kl_bins", 24, "$");
    out["kl"] = nlohmann::json::array();
    auto parts = shifted_by(sample_target(*tgt, Nkl, ctx.seed, 20), shift);
    double t = 0.0;
    uint64_t steps_done = 0;
    double m0 = std::hypot(shift.x, shift.y);
    for (double tk : kts) {
      SimOptions so;
      so.dt = 1e-3;
      so.T = tk - t;
      so.seed = ctx.seed;
      so.stream = 21;
      so.step0 = steps_done;
      so.escape_radius = 50.0;
      auto r = simulate(*tgt, nullptr, 0.0, parts, so);
      parts = r.final;
      steps_done += uint64_t(std::llround(so.T / so.dt));
      t = tk;
      double kl = kl_empirical(parts.x, *tgt, bins);
      double exact = 0.5 * m0 * m0 * std::exp(-2.0 * tk);
      out["kl"].push_back({{"t", tk},
                           {"kl", kl},
                           {"analytic", exact},
                           {"rel_err", std::abs(kl - exact) / exact}});
      ctx.add_plot("kl", tk, kl);
      ctx.add_plot("kl_exact", tk, exact);
    }
  }
  ctx.emit_json("sde.json", out);
  return out;
}

nlohmann::json run_metrics_suite(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "mean_shift", "w_samples", "beta",
                   "heavy_tail", "grid_resolution"},
             "$");
  Vec2 shift{0.5, 0.0};
  if (cfg.contains("mean_shift")) {
    auto v = cfg.at("mean_shift").get<std::vector<double>>();
    shift = {v.at(0), v.at(1)};
  }
  int nsamp = integer(cfg, "w_samples", 1024, "$");
  int gres = integer(cfg, "grid_resolution", 512, "$");
  auto gamma = std::make_shared<TargetDensity>(
      normalize(gaussian_potential({0, 0}, {1, 1}), gres));
  auto nu = std::make_shared<TargetDensity>(
      normalize(gaussian_potential({shift.x, shift.y}, {1, 1}), gres));
  double kl = 0.5 * (shift.x * shift.x + shift.y * shift.y);

  nlohmann::json out;
  {  // Pinsker on the analytic pair, densities on a common grid
    Grid2D g = gamma->quad_grid;
    GridField fn = nu->sample(g), fg = gamma->sample(g);
    double tv = tv_grid(fn, fg);
    out["pinsker"] = {{"kl", kl},
                      {"tv", tv},
                      {"slack", std::sqrt(2.0 * kl) - tv}};
  }
  {  // empirical Wasserstein orders on the same sample pair
    auto a = sample_target(*nu, nsamp, ctx.seed, 30);
    auto b = sample_target(*gamma, nsamp, ctx.seed, 31);
    double w1 = wasserstein(a.x, b.x, 1);
    double w2 = wasserstein(a.x, b.x, 2);
    out["wasserstein"] = {{"n", nsamp},
                          {"w1", w1},
                          {"w2", w2},
                          {"slack", w2 - w1}};
  }
  {  // Talagrand against the standard Gaussian, closed forms
    auto talagrand = [](double w2sq, double klv) {
      return nlohmann::json{{"w2_sq", w2sq},
                            {"two_kl", 2.0 * klv},
                            {"slack", 2.0 * klv - w2sq}};
    };
    out["talagrand"] = nlohmann::json::array();
    out["talagrand"].push_back(talagrand(dot(shift, shift), kl));
    // shrunk-covariance pair: W2^2 = |m|^2 + 2(1-s)^2, KL in closed form
    double s = 0.8;
    double klshrunk = kl + (s * s - 1.0 - 2.0 * std::log(s));
    double w2sq = dot(shift, shift) + 2.0 * (1.0 - s) * (1.0 - s);
    out["talagrand"].push_back(talagrand(w2sq, klshrunk));
  }
  {  // squared-exponential integrability constant
    out["ckp"] = nlohmann::json::object();
    double cg = ckp_constant(*gamma);
    out["ckp"]["gaussian"] = cg;
    if (cfg.value("heavy_tail", true)) {
      // polynomial tails on a box: no squared-exponential moment
      Grid2D hb{129, 129, -8.0, -8.0, 16.0, 16.0, false};
      GridField u(hb);
      for (int i = 0; i < hb.nx; ++i)
        for (int j = 0; j < hb.ny; ++j) {
          Vec2 p = hb.node(i, j);
          u.at(i, j) = 3.0 * std::log(1.0 + dot(p, p));
        }
      Potential heavy = tabulated_potential(u);
      heavy.domain = Domain::Rd;
      TargetDensity hv;
      hv.potential = heavy;
      hv.torus = false;
      hv.quad_grid = hb;
      double mass = 0.0;
      for (int i = 0; i < hb.nx; ++i)
        for (int j = 0; j < hb.ny; ++j)
          mass += std::exp(-heavy.U(hb.node(i, j)));
      hv.log_normalizer = std::log(mass * hb.cell_area());
      double ch = ckp_constant(hv);
      out["ckp"]["heavy_tail"] =
          std::isfinite(ch) ? nlohmann::json(ch) : nlohmann::json("inf");
    }
  }
  {  // log-Sobolev extremizers under the standard Gaussian
    std::vector<double> betas = cfg.contains("beta")
                                    ? cfg.at("beta").get<std::vector<double>>()
                                    : std::vector<double>{1, 2, 4};
    out["extremizer"] = nlohmann::json::array();
    for (double b : betas) {
      // tilted-Gaussian quadrature centered under the mass of f^2
      double x0 = b, R = 10.0;
      int K = 1600;
      double hX = 2.0 * R / K;
      double mass = 0.0, ent = 0.0, dir = 0.0;
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K / 2; ++j) {
          double x = x0 - R + (i + 0.5) * hX;
          double y = -R + (j + 0.5) * 2.0 * hX;
          double mu = std::exp(-0.5 * (x * x + y * y)) / kTwoPi;
          double f2 = std::exp(b * x - 0.5 * b * b);
          mass += f2 * mu;
          ent += f2 * (b * x - 0.5 * b * b) * mu;
          dir += 0.25 * b * b * f2 * mu;
        }
      double w = hX * 2.0 * hX;
      mass *= w;
      ent *= w;
      dir *= w;
      out["extremizer"].push_back({{"beta", b},
                                   {"mass", mass},
                                   {"entropy", ent},
                                   {"two_dirichlet", 2.0 * dir},
                                   {"h1_sq", mass + dir},
                                   {"h1_expected", 1.0 + 0.25 * b * b}});
    }
  }
  {  // grid KL agrees with the evolution module's entropy functional
    Grid2D g = make_torus_grid(64);
    auto flat = normalize(flat_torus(1.0), 256);
    GridField q = center_field(
        g, [](Vec2 p) { return 1.0 + 0.3 * std::cos(kTwoPi * p.x); });
    GridField f = q, one(g);
    for (auto& v : one.values) v = 1.0;
    double e = entropy(q, flat);
    double k2 = kl_grid(f, one);
    out["kl_entropy_gap"] = std::abs(e - k2);
  }
  ctx.emit_json("metrics.json", out);
  return out;
}

nlohmann::json run_fullspace_flow(const nlohmann::json& cfg, Ctx& ctx) {
  check_keys(cfg, {"scenario", "seed", "target", "n", "phi",
                   "table_resolution", "probe_resolution", "audit_resolutions"},
             "$");
  auto tgt = cfg.contains("target")
                 ? target_from(cfg.at("target"), "$.target")
                 : std::make_shared<TargetDensity>(
                       normalize(gaussian_potential({0, 0}, {1, 1}), 512));
  if (tgt->torus) bad("$.target", "full-space construction needs an R^2 target");
  int n = integer(cfg, "n", 3, "$");
  auto full = build_fullspace_flow(
      tgt, n, integer(cfg, "phi", 0, "$"),
      integer(cfg, "table_resolution", 1024, "$"),
      integer(cfg, "probe_resolution", 512, "$"));

  nlohmann::json out;
  out["spec"] = full.spec.to_json();
  out["energy"] = full.flow.energy;
  out["jacobian_error"] = transport_jacobian_error(full.map);

  {  // fraction of the conjugation region actually inside B(0, 3n/2)
    int hits = 0, total = 0;
    double ra = full.spec.inner_radius;
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) {
        Vec2 p{-ra + 2.0 * ra * (i + 0.5) / 64, -ra + 2.0 * ra * (j + 0.5) / 64};
        if (dot(p, p) > ra * ra) continue;
        ++total;
        if (full.in_D(p)) ++hits;
      }
    out["in_D_fraction"] = double(hits) / total;
  }

  auto ares = cfg.contains("audit_resolutions")
                  ? cfg.at("audit_resolutions").get<std::vector<int>>()
                  : std::vector<int>{128, 256};
  out["divergence"] = nlohmann::json::array();
  for (int r : ares) {
    Grid2D g = make_torus_grid(r, 4.0 * n, -2.0 * n);
    auto rep = weighted_divergence(full.flow, g);
    out["divergence"].push_back({{"resolution", r}, {"max", rep.max_norm}});
    ctx.add_plot("divergence", r, rep.max_norm);
  }
  ctx.emit_json("fullspace.json", out);
  return out;
}

using Runner = nlohmann::json (*)(const nlohmann::json&, Ctx&);

const std::vector<std::pair<std::string, Runner>>& table() {
  static const std::vector<std::pair<std::string, Runner>> t = {
      {"divergence-audit", run_divergence_audit},
      {"transport-build", run_transport_build},
      {"pde-decay-sweep", run_pde_decay_sweep},
      {"spectral-report", run_spectral_report},
      {"rv-ladder", run_rv_ladder},
      {"lyapunov-audit", run_lyapunov_audit},
      {"sde-race", run_sde_race},
      {"metrics-suite", run_metrics_suite},
      {"fullspace-flow", run_fullspace_flow},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (auto& [n, r] : table()) v.push_back(n);
    return v;
  }();
  return names;
}

nlohmann::json run_scenario(const std::string& name, nlohmann::json config,
                            const std::string& outdir) {
  Runner run = nullptr;
  for (auto& [n, r] : table())
    if (n == name) run = r;
  if (!run) throw std::invalid_argument("unknown scenario: " + name);
  if (config.contains("scenario") && config.at("scenario") != name)
    bad("$.scenario", "config is for scenario " +
                          config.at("scenario").get<std::string>());

  std::filesystem::create_directories(outdir);
  Ctx ctx;
  ctx.outdir = outdir;
  ctx.seed = config.contains("seed") ? config.at("seed").get<uint64_t>() : 1;

  nlohmann::json summary = run(config, ctx);
  ctx.flush_plot();

  std::string canon = name + "\n" + config.dump();
  nlohmann::json manifest = {
      {"scenario", name},
      {"inputs_hash", fnv1a(canon.data(), canon.size())},
      {"files", ctx.files},
      {"summary", summary}};
  std::ofstream out(outdir + "/manifest.json", std::ios::binary);
  out << manifest.dump(2) << "\n";
  return manifest;
}

std::vector<std::string> validate_config(const std::string& name,
                                         const nlohmann::json& config) {
  std::vector<std::string> errs;
  bool known = false;
  for (auto& n : scenario_names()) known = known || n == name;
  if (!known) {
    errs.push_back("unknown scenario: " + name);
    return errs;
  }
  try {
    if (config.contains("A"))
      for (double A : config.at("A").get<std::vector<double>>())
        if (A < 0.0) errs.push_back("$.A: A must be nonnegative");
    if (name == "pde-decay-sweep" && config.contains("dt") &&
        config.at("dt").get<double>() > 0.0) {
      auto tgt = config.contains("target")
                     ? target_from(config.at("target"), "$.target")
                     : std::make_shared<TargetDensity>(
                           normalize(flat_torus(1.0), 256));
      int res = config.value("resolution", 128);
      std::optional<NamedFlow> nf;
      if (config.contains("flow") && !config.at("flow").is_null())
        nf = flow_from(config.at("flow"), tgt, "$.flow");
      double worstA = 0.0;
      if (config.contains("A"))
        for (double A : config.at("A").get<std::vector<double>>())
          worstA = std::max(worstA, A);
      Grid2D g = make_torus_grid(res, tgt->potential.side,
                                 tgt->potential.origin);
      double bound = cfl_limit(g, *tgt, nf ? &nf->flow : nullptr, worstA);
      if (config.at("dt").get<double>() > bound)
        errs.push_back("$.dt: exceeds the stability bound " +
                       fmt_double(bound));
    }
    // full parse via a dry keys pass: reuse the runner-side checks by
    // parsing the blocks that do not require heavy computation
    if (config.contains("target")) target_from(config.at("target"), "$.target");
    if (config.contains("source")) target_from(config.at("source"), "$.source");
    if (config.contains("potential"))
      target_from(config.at("potential"), "$.potential");
  } catch (const std::exception& e) {
    errs.push_back(e.what());
  }
  return errs;
}

}  // namespace arefs
