// End-to-end acceptance checks, one criterion per invocation (argv[1] in
// 1..12). Each criterion drives the CLI binary on pinned configs and prints
// one PASS/FAIL line per subcheck; the exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void report(bool ok, const std::string& what) {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << what << "\n";
  if (!ok) ++failures;
}

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string outdir(const std::string& tag) {
  fs::path p = fs::current_path() / ("accept_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

json run(const std::string& scenario, const std::string& config,
         const std::string& dir) {
  std::string cmd = std::string(AREFS_CLI_PATH) + " " + scenario +
                    " --config " + AREFS_CONFIG_DIR "/" + config + " --out " +
                    dir + " > " + dir + "/stdout.txt 2>&1";
  if (std::system(cmd.c_str()) != 0)
    throw std::runtime_error("scenario failed: " + cmd);
  std::ifstream in(dir + "/manifest.json");
  json m;
  in >> m;
  return m["summary"];
}

struct CsvRow {
  double t, H, hnorm;
};

std::vector<CsvRow> read_evolution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing " + path);
  std::string line;
  std::getline(in, line);  // header
  std::istringstream hs(line);
  std::vector<std::string> cols;
  for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  int it = -1, iH = -1, ih = -1;
  for (size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] == "t") it = int(k);
    if (cols[k] == "H") iH = int(k);
    if (cols[k] == "hnorm") ih = int(k);
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> v;
    for (std::string c; std::getline(ls, c, ',');) v.push_back(std::stod(c));
    rows.push_back({v[it], v[iH], v[ih]});
  }
  return rows;
}

std::string fnum(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- criteria ---------------------------------------------------------------

void criterion1() {
  double t0 = now();
  auto s = run("divergence-audit", "c1_divergence.json", outdir("c1"));
  for (const auto& f : s["flows"]) {
    std::string name = f["name"];
    double m256 = f["residuals"][0]["max"];
    bool small = m256 < 1e-3;
    report(small, "c1 " + name + ": max residual " + fnum(m256) +
                      " < 1e-3 at 256^2");
    if (f["exact"].get<bool>()) {
      report(true, "c1 " + name +
                       ": residual at rounding level, halving factor vacuous");
    } else {
      double factor = f["factor"];
      report(factor >= 3.2 && factor <= 4.8,
             "c1 " + name + ": halving factor " + fnum(factor) +
                 " in [3.2, 4.8]");
    }
  }
  double el = now() - t0;
  report(el < 60.0, "c1 runtime " + fnum(el) + "s < 60s");
}

void criterion2() {
  double t0 = now();
  auto s = run("transport-build", "c2_transport.json", outdir("c2"));
  double jerr = s["jacobian_error"];
  report(jerr < 1e-4,
         "c2 pushforward identity: max |det DZ pi(Z) - F| " + fnum(jerr) +
             " < 1e-4 at 512^2");
  double p = s["chi2"]["p"];
  report(p > 0.01, "c2 mapped-sample chi-square p " + fnum(p) + " > 0.01");
  double el = now() - t0;
  report(el < 60.0, "c2 runtime " + fnum(el) + "s < 60s");
}

void criterion3() {
  auto s = run("pde-decay-sweep", "c3_heat.json", outdir("c3"));
  double amp = s["runs"][0]["cos_amp_final"];
  double expect = 0.5 * std::exp(-4.0 * M_PI * M_PI * 0.02);
  double rel = std::abs(amp - expect) / expect;
  report(rel < 0.01, "c3 heat mode amplitude " + fnum(amp) + " vs " +
                         fnum(expect) + ", relative error " + fnum(rel) +
                         " < 1%");
}

void criterion4() {
  double t0 = now();
  struct Job {
    const char* cfg;
    const char* tag;
  } jobs[] = {{"c3_heat.json", "heat"},
              {"c6_pde.json", "cellular-A64"},
              {"c8_pde.json", "pushforward-A512"}};
  for (const auto& j : jobs) {
    auto s = run("pde-decay-sweep", j.cfg, outdir(std::string("c4_") + j.tag));
    for (const auto& r : s["runs"]) {
      std::string tag =
          std::string("c4 ") + j.tag + " A=" + fnum(r["A"].get<double>());
      report(r["mass_drift"].get<double>() < 1e-6,
             tag + ": mass drift " + fnum(r["mass_drift"]) + " < 1e-6");
      report(r["entropy_monotone"].get<bool>(),
             tag + ": entropy nonincreasing per step");
      if (r["upwind_faces"].get<int>() == 0)
        report(r["dissipation_mismatch"].get<double>() < 0.05,
               tag + ": |dH/dt + fisher| relative mismatch " +
                   fnum(r["dissipation_mismatch"]) + " < 5%");
      else
        report(true, tag + ": dissipation identity not asserted (" +
                         std::to_string(r["upwind_faces"].get<int>()) +
                         " upwind faces add numerical diffusion)");
      double span = r["q_range"][1].get<double>() - r["q_range"][0].get<double>();
      report(r["max_principle_violation"].get<double>() <= 1e-3 * span,
             tag + ": extrema excursion " +
                 fnum(r["max_principle_violation"]) + " <= 1e-3 (c2 - c1)");
    }
  }
  double el = now() - t0;
  report(el < 300.0, "c4 suite runtime " + fnum(el) + "s < 300s");
}

void criterion5() {
  double t0 = now();
  auto s = run("spectral-report", "c5_spectral.json", outdir("c5"));
  double kappa = s["kappa"];
  double cont = 4.0 * M_PI * M_PI;
  report(std::abs(kappa - cont) / cont < 0.01,
         "c5 poincare constant " + fnum(kappa) + " within 1% of 4 pi^2");

  std::vector<double> mA, psiA, As;
  for (const auto& r : s["mA"]) {
    As.push_back(r["A"]);
    mA.push_back(r["re"]);
  }
  for (const auto& r : s["psiA"]) psiA.push_back(r["psi"]);

  report(std::abs(mA[0] - kappa) <= 1e-6 * kappa,
         "c5 gap at A=0 equals the poincare constant at solver tolerance");
  bool mono = true;
  for (size_t k = 1; k < mA.size(); ++k) mono = mono && mA[k] >= mA[k - 1] - 1e-9;
  report(mono, "c5 principal gap nondecreasing over A in {0, 8, 64, 512}");
  bool sandwich = true;
  for (size_t k = 0; k < psiA.size(); ++k)
    sandwich = sandwich && psiA[k] >= kappa * (1.0 - 1e-6) &&
               psiA[k] <= mA[k] * (1.0 + 1e-6);
  report(sandwich, "c5 kappa <= Psi_A <= m_A for every A");

  double r1 = s["rv"]["value"];
  double t512 = std::abs(mA[3] - r1) / r1, t8 = std::abs(mA[1] - r1) / r1;
  report(t512 < t8, "c5 gap approaches the invariant-subspace constant: " +
                        fnum(t512) + " < " + fnum(t8));

  const auto& d = s["dense_check"];
  double kd = d["kappa"]["dense"], ki = d["kappa"]["iterative"];
  bool dense_ok = std::abs(ki - kd) / kd < 0.02;
  for (const auto& r : d["mA"])
    dense_ok = dense_ok && std::abs(r["iterative"].get<double>() -
                                    r["dense"].get<double>()) /
                               r["dense"].get<double>() <
                           0.02;
  for (const auto& r : d["psiA"])
    dense_ok = dense_ok && std::abs(r["iterative"].get<double>() -
                                    r["dense"].get<double>()) /
                               r["dense"].get<double>() <
                           0.02;
  report(dense_ok, "c5 iterative solves match 32^2 dense oracles within 2%");
  double el = now() - t0;
  report(el < 600.0, "c5 runtime " + fnum(el) + "s < 600s");
}

void criterion6() {
  double t0 = now();
  auto sp = run("spectral-report", "c6_spectral.json", outdir("c6s"));
  double psi = sp["psiA"][0]["psi"];
  std::string dir = outdir("c6");
  run("pde-decay-sweep", "c6_pde.json", dir);
  auto rows = read_evolution(dir + "/evolution_A64.csv");
  double h0 = rows.front().hnorm;
  bool ok = true;
  double worst = -1e300;
  for (const auto& r : rows) {
    double bound = h0 * std::exp(-psi * r.t + M_PI / 2.0);
    worst = std::max(worst, r.hnorm - bound);
    ok = ok && r.hnorm <= bound;
  }
  report(ok, "c6 ||h(t)|| <= ||h(0)|| exp(-Psi t + pi/2) along the run "
             "(worst margin " +
                 fnum(worst) + ")");
  double el = now() - t0;
  report(el < 120.0, "c6 runtime " + fnum(el) + "s < 120s");
}

void criterion7() {
  double t0 = now();
  auto s = run("rv-ladder", "c7_rv.json", outdir("c7"));
  std::vector<double> r;
  for (const auto& e : s["flat"]) r.push_back(e["r"]);
  report(r[0] < r[1] && r[1] < r[2],
         "c7 invariant-subspace constants strictly increase with n");
  double slope = s["loglog_slope"];
  report(slope >= 1.5, "c7 log-log slope " + fnum(slope) + " >= 1.5");
  double ratio = s["ratio_first_two"];
  report(ratio >= 3.0 && ratio <= 5.0,
         "c7 ratio r(v_2)/r(v_1) = " + fnum(ratio) + " in [3, 5]");
  std::vector<double> pf;
  for (const auto& e : s["pushforward"]) pf.push_back(e["r"]);
  report(pf[0] < pf[1] && pf[1] < pf[2],
         "c7 pushforward ladder strictly increases with n");
  double el = now() - t0;
  report(el < 600.0, "c7 runtime " + fnum(el) + "s < 600s");
}

void criterion8() {
  double t0 = now();
  auto s = run("pde-decay-sweep", "c8_pde.json", outdir("c8"));
  double q0lo = s["runs"][0]["q_range"][0], q0hi = s["runs"][0]["q_range"][1];
  report(q0lo >= 0.5 && q0hi <= 1.5,
         "c8 warm start range [" + fnum(q0lo) + ", " + fnum(q0hi) +
             "] inside [0.5, 1.5]");
  double H0 = s["runs"][0]["H_final"], H512 = s["runs"][1]["H_final"];
  report(H512 <= 0.25 * H0, "c8 entropy at t=0.1 with A=512: " + fnum(H512) +
                                " <= 0.25 x " + fnum(H0) + " (A=0)");
  double el = now() - t0;
  report(el < 300.0, "c8 runtime " + fnum(el) + "s < 300s");
}

void criterion9() {
  double t0 = now();
  auto s = run("lyapunov-audit", "c9_lyapunov.json", outdir("c9"));
  bool exact = true;
  for (const auto& t : s["tails"]) {
    double r = t["r"];
    exact = exact &&
            std::abs(t["lambda_min"].get<double>() - (r * r / 4.0 - 1.0)) < 1e-9;
  }
  report(exact, "c9 certified rate equals r^2/4 - d/2 at every radius");
  double res = s["drift"]["max_residual"], mw = s["drift"]["max_W"];
  report(res <= 1e-8 * mw, "c9 finite-difference drift residual " + fnum(res) +
                               " <= 1e-8 max W");
  bool tails = true;
  for (const auto& t : s["tails"])
    tails = tails && t["ok"].get<bool>() &&
            t["worst_quotient"].get<double>() >=
                t["lambda_min"].get<double>() - 1e-6;
  report(tails, "c9 all 200 tail trial quotients clear the certified floor");
  double el = now() - t0;
  report(el < 120.0, "c9 runtime " + fnum(el) + "s < 120s");
}

void criterion10() {
  double t0 = now();
  auto s = run("sde-race", "c10_sde.json", outdir("c10"));
  double err = s["mean_decay"]["max_abs_error"];
  double tol = s["mean_decay"]["tolerance"];
  report(err <= tol, "c10 mean decay error " + fnum(err) + " within 3/sqrt(N) = " +
                         fnum(tol));
  for (const auto& r : s["stationary"]) {
    double p = r["p"];
    report(p > 0.01, "c10 stationarity chi-square at A=" +
                         fnum(r["A"].get<double>()) + ": p " + fnum(p) +
                         " > 0.01");
  }
  for (const auto& r : s["kl"]) {
    double rel = r["rel_err"];
    report(rel <= 0.2, "c10 relaxation KL at t=" + fnum(r["t"].get<double>()) +
                           " within 20% of the closed form (" + fnum(rel) + ")");
  }

  auto m = run("metrics-suite", "c10_metrics.json", outdir("c10m"));
  report(m["pinsker"]["slack"].get<double>() >= -1e-6,
         "c10 pinsker slack " + fnum(m["pinsker"]["slack"]) + " nonnegative");
  report(m["wasserstein"]["slack"].get<double>() >= -1e-12,
         "c10 W1 <= W2 on the sampled pair");
  bool tal = true;
  for (const auto& t : m["talagrand"])
    tal = tal && t["slack"].get<double>() >= -1e-9;
  report(tal, "c10 talagrand slack nonnegative on analytic gaussian pairs");
  report(m["ckp"]["gaussian"].is_number() &&
             std::isfinite(m["ckp"]["gaussian"].get<double>()),
         "c10 gaussian integrability constant finite: " +
             fnum(m["ckp"]["gaussian"]));
  report(m["ckp"]["heavy_tail"].is_string(),
         "c10 heavy-tail sentinel reports no squared-exponential moment");
  double el = now() - t0;
  report(el < 300.0, "c10 runtime " + fnum(el) + "s < 300s");
}

void criterion11() {
  auto m = run("metrics-suite", "c10_metrics.json", outdir("c11"));
  for (const auto& e : m["extremizer"]) {
    double b = e["beta"];
    double want = b * b / 2.0;
    bool ok = std::abs(e["entropy"].get<double>() - want) <= 1e-6 &&
              std::abs(e["two_dirichlet"].get<double>() - want) <= 1e-6 &&
              std::abs(e["h1_sq"].get<double>() -
                       e["h1_expected"].get<double>()) <= 1e-6;
    report(ok, "c11 beta=" + fnum(b) +
                   ": entropy = 2 x dirichlet = beta^2/2 and |f|_H1^2 = 1 + "
                   "beta^2/4, within 1e-6");
  }
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), {});
  std::string sb((std::istreambuf_iterator<char>(fb)), {});
  return fa && fb && sa == sb;
}

void criterion12() {
  struct Job {
    const char* scen;
    const char* cfg;
  } jobs[] = {{"transport-build", "c2_transport.json"},
              {"pde-decay-sweep", "c3_heat.json"},
              {"lyapunov-audit", "c9_lyapunov.json"}};
  for (const auto& j : jobs) {
    std::string d1 = outdir(std::string("c12a_") + j.scen);
    std::string d2 = outdir(std::string("c12b_") + j.scen);
    run(j.scen, j.cfg, d1);
    run(j.scen, j.cfg, d2);
    bool ok = true;
    int n = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
      if (e.path().filename() == "stdout.txt") continue;
      ok = ok && same_bytes(e.path(), fs::path(d2) / e.path().filename());
      ++n;
    }
    report(ok && n > 0, std::string("c12 ") + j.scen + ": " +
                            std::to_string(n) +
                            " artifacts byte-identical across reruns");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1..12>\n";
    return 2;
  }
  int c = std::atoi(argv[1]);
  try {
    switch (c) {
      case 1: criterion1(); break;
      case 2: criterion2(); break;
      case 3: criterion3(); break;
      case 4: criterion4(); break;
      case 5: criterion5(); break;
      case 6: criterion6(); break;
      case 7: criterion7(); break;
      case 8: criterion8(); break;
      case 9: criterion9(); break;
      case 10: criterion10(); break;
      case 11: criterion11(); break;
      case 12: criterion12(); break;
      default:
        std::cerr << "unknown criterion " << c << "\n";
        return 2;
    }
  } catch (const std::exception& e) {
    report(false, std::string("criterion ") + argv[1] +
                      " aborted: " + e.what());
  }
  return failures;
}
