// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,4,9] [--known-failing 6]
//
// Criteria named in --known-failing are still evaluated and printed as FAIL,
// but do not make the exit code nonzero.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "invreg/diagnostics.hpp"
#include "invreg/error.hpp"
#include "invreg/estimation.hpp"
#include "invreg/inference.hpp"
#include "invreg/io.hpp"
#include "invreg/model.hpp"
#include "invreg/simulation.hpp"
#include "invreg/validation.hpp"

using namespace invreg;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Shared Case 1, D = 100 experiments, run once and reused by several criteria.
struct Table1 {
  std::map<std::pair<Index, Index>, ExperimentReport> cells;
  double seconds = 0.0;

  const ExperimentReport& get(Index l, Index n) {
    auto key = std::make_pair(l, n);
    auto it = cells.find(key);
    if (it != cells.end()) return it->second;
    ExperimentConfig c;
    c.spec = CaseSpec{CaseId::case1, l, 100, 7.5, kSeed};
    c.n = n;
    c.replications = 500;
    c.methods = n > 100 ? std::vector<Method>{Method::ir, Method::lse} : std::vector<Method>{Method::ir};
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport r = run_experiment(c);
    seconds += seconds_since(start);
    return cells.emplace(key, std::move(r)).first->second;
  }
};

Table1& table1() {
  static Table1 t;
  return t;
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const CheckResult c = check_involution(kSeed);
  const double secs = seconds_since(start);
  return {c.pass && secs < 5.0, "max residual " + fmt("%.2e", c.measured) + " over 200 triples, " + fmt("%.2f", secs) + " s"};
}

Outcome criterion2() {
  // Conditional of Y given X under the joint Gaussian of (Y, X), by Schur complement.
  Rng rng = Rng::substream(kSeed, 2, 0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const InverseParams p = random_inverse_params(2, 4, rng);
    const Matrix& g = p.gamma.matrix();
    const Matrix cov_x = p.slope * g * p.slope.transpose() + Matrix(p.sigma_diag.asDiagonal());
    const Matrix cov_yx = g * p.slope.transpose();
    const Matrix slope = cov_x.fullPivLu().solve(cov_yx.transpose()).transpose();
    const Matrix noise = g - slope * cov_yx.transpose();
    const ForwardParams f = psi(p);
    worst = std::max({worst, relative_frobenius(f.slope_star, slope), relative_frobenius(f.sigma_star.matrix(), noise),
                      relative_frobenius(f.gamma_star.matrix(), cov_x)});
  }
  return {worst <= 1e-8, "max relative error " + fmt("%.2e", worst) + " over 50 triples (L=2, D=4)"};
}

Outcome criterion3() {
  const auto start = std::chrono::steady_clock::now();
  const CheckResult c = check_slope_law(kSeed);
  const double secs = seconds_since(start);
  return {c.pass && secs < 120.0, "relative Frobenius " + fmt("%.4f", c.measured) + " (limit 0.15), " + fmt("%.1f", secs) + " s"};
}

Outcome criterion4() {
  const auto start = std::chrono::steady_clock::now();
  const CheckResult c = check_theta_oracle(kSeed);
  const double secs = seconds_since(start);
  return {c.pass && secs < 300.0, "relative Frobenius " + fmt("%.4f", c.measured) + " (limit 0.15), " + fmt("%.1f", secs) + " s"};
}

Outcome criterion5() {
  Rng rng = Rng::substream(kSeed, 5, 0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Index l = 1 + static_cast<Index>(rng.engine()() % 3);
    const Index d = 1 + static_cast<Index>(rng.engine()() % 6);
    const InverseParams p = random_inverse_params(l, d, rng);
    Matrix h(d, l);
    for (Index j = 0; j < l; ++j)
      for (Index i = 0; i < d; ++i) h(i, j) = rng.normal();
    const double eps = 1e-6;
    const InverseParams up{p.gamma, p.slope + eps * h, p.sigma_diag};
    const InverseParams down{p.gamma, p.slope - eps * h, p.sigma_diag};
    const Matrix fd = (psi(up).slope_star - psi(down).slope_star) / (2 * eps);
    worst = std::max(worst, relative_frobenius(dg_apply(p, h), fd));
  }
  return {worst <= 1e-4, "max relative error " + fmt("%.2e", worst) + " over 50 instances"};
}

Outcome criterion6() {
  struct Cell {
    Index l, n;
    double target, tol;
  };
  const Cell cells[] = {{1, 500, 0.95, 0.03}, {1, 100, 0.92, 0.03}, {1, 50, 0.88, 0.04},
                        {2, 500, 0.94, 0.03}, {2, 50, 0.86, 0.04},  {5, 50, 0.84, 0.04}};
  bool pass = true;
  std::string detail;
  for (const Cell& c : cells) {
    const double cov = table1().get(c.l, c.n).summary(Method::ir).coverage;
    const bool ok = std::abs(cov - c.target) <= c.tol;
    pass = pass && ok;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%sL=%lld N=%lld %.3f (paper %.2f)%s", detail.empty() ? "" : "; ",
                  static_cast<long long>(c.l), static_cast<long long>(c.n), cov, c.target, ok ? "" : " MISS");
    detail += buf;
  }
  detail += "; cumulative simulation time " + fmt("%.0f", table1().seconds) + " s";
  return {pass && table1().seconds < 1800.0, detail};
}

Outcome criterion7() {
  const MethodSummary& lse = table1().get(1, 500).summary(Method::lse);
  const bool cov_ok = std::abs(lse.coverage - 0.94) <= 0.03 && lse.failures == 0;
  bool rejected = false;
  ExperimentConfig c;
  c.spec = CaseSpec{CaseId::case1, 1, 100, 7.5, kSeed};
  c.n = 100;
  c.methods = {Method::lse};
  try {
    c.validate();
  } catch (const DomainError&) {
    rejected = true;
  }
  bool fit_rejected = false;
  try {
    Rng rng(kSeed);
    fit_lse(center(simulate_dataset(experiment_params(c.spec), 100, rng)));
  } catch (const UnsupportedDesignError&) {
    fit_rejected = true;
  }
  return {cov_ok && rejected && fit_rejected, "LSE coverage " + fmt("%.3f", lse.coverage) +
                                                  " (paper 0.94); N<=D rejected by config: " +
                                                  (rejected ? "yes" : "no") + ", by fit: " + (fit_rejected ? "yes" : "no")};
}

Outcome criterion8() {
  const CheckResult a = check_uni_cross_interval(kSeed);
  const CheckResult b = check_uni_cross_statistic(kSeed);
  return {a.pass && b.pass, "interval gap " + fmt("%.2e", a.measured) + ", statistic gap " + fmt("%.2e", b.measured)};
}

Outcome criterion9() {
  const CheckResult c = check_confidence_coverage(kSeed);
  const double slope_only = [] {
    const CaseSpec spec{CaseId::case1, 2, 5, 7.5, kSeed};
    const InverseParams p = experiment_params(spec);
    const Matrix truth = psi(p).slope_star;
    int hit = 0;
    for (Index r = 0; r < 500; ++r) {
      Rng rng = Rng::substream(spec.seed, streams::oracle, static_cast<std::uint64_t>(r));
      const FitResult fit = fit_forward(center(simulate_dataset(p, 500, rng)));
      hit += confidence_region(fit, 0.95, RegionCovariance::slope_only).contains(truth) ? 1 : 0;
    }
    return hit / 500.0;
  }();
  return {c.pass, c.name + " " + fmt("%.3f", c.measured) + "; slope-only covariance gives " + fmt("%.3f", slope_only)};
}

Outcome criterion10() {
  auto& t = table1();
  std::string detail;
  bool pass = true;

  // coverage against N, allowing two standard errors of the difference
  auto nondecreasing = [&](Index l, Index n1, Index n2) {
    const MethodSummary& a = t.get(l, n1).summary(Method::ir);
    const MethodSummary& b = t.get(l, n2).summary(Method::ir);
    const double slack = 2.0 * std::sqrt(a.coverage_se * a.coverage_se + b.coverage_se * b.coverage_se);
    return a.coverage <= b.coverage + slack;
  };
  const bool cov_trend = nondecreasing(1, 50, 100) && nondecreasing(1, 100, 500) && nondecreasing(2, 50, 100) &&
                         nondecreasing(2, 100, 500);
  pass = pass && cov_trend;
  detail += std::string("coverage nondecreasing in N: ") + (cov_trend ? "yes" : "no");

  // volume against distance of the profile from the training mean
  bool vol_trend = true;
  {
    const InverseParams p = experiment_params(CaseSpec{CaseId::case1, 2, 100, 7.5, kSeed});
    Rng rng = Rng::substream(kSeed, 10, 0);
    const FitResult fit = fit_forward(center(simulate_dataset(p, 500, rng)));
    const Vector dir = simulate_test_pair(p, rng).x - fit.x_means;
    double previous = 0.0;
    for (double s : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
      const double v = region_metrics(prediction_region(fit, fit.x_means + s * dir, 0.95)).volume;
      vol_trend = vol_trend && v >= previous;
      previous = v;
    }
  }
  pass = pass && vol_trend;
  detail += std::string("; volume nondecreasing in distance: ") + (vol_trend ? "yes" : "no");

  // volume against L at N = 500
  const double paper_volume[] = {1.29, 2.00, 7.27};
  const Index ls[] = {1, 2, 5};
  double raw[3], normalized[3];
  for (int i = 0; i < 3; ++i) {
    const MethodSummary& s = t.get(ls[i], 500).summary(Method::ir);
    raw[i] = s.mean_volume;
    normalized[i] = s.mean_normalized_volume;
  }
  const bool increasing = raw[0] < raw[1] && raw[1] < raw[2];
  pass = pass && increasing;
  char buf[256];
  std::snprintf(buf, sizeof buf, "; mean volume L=1,2,5: %.3f, %.3f, %.3f (paper %.2f, %.2f, %.2f) increasing: %s", raw[0],
                raw[1], raw[2], paper_volume[0], paper_volume[1], paper_volume[2], increasing ? "yes" : "no");
  detail += buf;

  // volume^(1/L) against the paper's volume / L
  bool within = true;
  double lo = normalized[0], hi = normalized[0];
  for (int i = 0; i < 3; ++i) {
    const double ref = paper_volume[i] / static_cast<double>(ls[i]);
    within = within && normalized[i] <= 2.0 * ref && normalized[i] >= 0.5 * ref;
    lo = std::min(lo, normalized[i]);
    hi = std::max(hi, normalized[i]);
  }
  const bool flat = hi <= 1.3 * lo;
  pass = pass && within && flat;
  std::snprintf(buf, sizeof buf,
                "; normalized %.3f, %.3f, %.3f vs paper volume/L %.2f, %.2f, %.2f: within x2 %s, flat within 30%% %s",
                normalized[0], normalized[1], normalized[2], paper_volume[0], paper_volume[1] / 2, paper_volume[2] / 5,
                within ? "yes" : "no", flat ? "yes" : "no");
  detail += buf;
  return {pass, detail};
}

Outcome criterion11() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "invreg_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  io::write_text(dir / "cfg.json",
                 R"({"case":"Case2","L":2,"D":100,"N":120,"replications":60,"methods":["IR","LSE"],"seed":31})");
  auto run = [&](const std::string& env, const std::string& out) {
    const std::string cmd = env + " " + std::string(INVREG_CLI_PATH) + " simulate --reproducible --config " +
                            (dir / "cfg.json").string() + " --out " + (dir / out).string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  auto slurp = [&](const std::string& f) {
    std::ifstream in(dir / f, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const bool ran = run("INVREG_THREADS=1", "a.csv") && run("INVREG_THREADS=1", "b.csv") &&
                   run("INVREG_THREADS=4", "c.csv") && run("INVREG_THREADS=4", "d.csv");
  const std::string a = slurp("a.csv");
  const bool same = ran && !a.empty() && a == slurp("b.csv") && a == slurp("c.csv") && a == slurp("d.csv");
  fs::remove_all(dir);
  return {same, std::string("four runs (INVREG_THREADS 1, 1, 4, 4) byte-identical: ") + (same ? "yes" : "no")};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") only = parse_list(argv[i + 1]);
    else if (flag == "--known-failing") known = parse_list(argv[i + 1]);
    else {
      std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
      return 2;
    }
  }
  set_warning_sink({});

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"psi involution", criterion1},
      {"psi equals the Gaussian conditional", criterion2},
      {"slope sampling law", criterion3},
      {"theta Monte Carlo oracle", criterion4},
      {"dg finite differences", criterion5},
      {"Table 1 IR coverage (500 reps, Case 1, D=100)", criterion6},
      {"LSE baseline", criterion7},
      {"univariate and multivariate agreement", criterion8},
      {"confidence region calibration (L=2, D=5, N=500)", criterion9},
      {"qualitative trends", criterion10},
      {"determinism", criterion11},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s: %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !known.count(id)) ++unexpected;
    if (o.pass && known.count(id)) std::printf("note: criterion %d is listed as known-failing but passed\n", id);
  }
  return unexpected == 0 ? 0 : 1;
}
