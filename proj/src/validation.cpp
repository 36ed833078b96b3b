#include "invreg/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "invreg/estimation.hpp"
#include "invreg/inference.hpp"
#include "invreg/simulation.hpp"
#include "invreg/univariate.hpp"

namespace invreg {
namespace {

constexpr std::uint64_t kSuiteStream = 0x7375'6974ULL;

Rng suite_rng(std::uint64_t seed, std::uint64_t which) { return Rng::substream(seed, kSuiteStream, which); }

// Random L = 1 fit on simulated data with D in [2, 20] and N in [30, 200].
FitResult random_uni_fit(Rng& rng, InverseParams* truth = nullptr) {
  const auto d = static_cast<Index>(2 + rng.engine()() % 19);
  const auto n = static_cast<Index>(30 + rng.engine()() % 171);
  InverseParams p = random_inverse_params(1, d, rng);
  FitResult fit = fit_forward(center(simulate_dataset(p, n, rng)));
  if (truth) *truth = std::move(p);
  return fit;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

InverseParams random_inverse_params(Index l, Index d, Rng& rng) {
  Matrix b(l, l);
  for (Index j = 0; j < l; ++j)
    for (Index i = 0; i < l; ++i) b(i, j) = rng.normal();
  Matrix gamma = b * b.transpose() / static_cast<double>(l);
  gamma.diagonal().array() += 0.5;
  Matrix slope(d, l);
  for (Index j = 0; j < l; ++j)
    for (Index i = 0; i < d; ++i) slope(i, j) = rng.normal();
  Vector sigma(d);
  for (Index i = 0; i < d; ++i) sigma[i] = rng.uniform(0.5, 2.0);
  return InverseParams::make(std::move(gamma), std::move(slope), std::move(sigma));
}

CheckResult check_involution(std::uint64_t seed) {
  Rng rng = suite_rng(seed, 1);
  const Index ls[] = {1, 2, 5};
  const Index ds[] = {2, 5, 20, 100};
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const InverseParams p = random_inverse_params(ls[k % 3], ds[(k / 3) % 4], rng);
    worst = std::max(worst, psi_involution_check(p));
  }
  return CheckResult{"psi involution (200 triples), max residual", worst, 1e-8, worst <= 1e-8};
}

CheckResult check_slope_law(std::uint64_t seed) {
  Rng rng = suite_rng(seed, 2);
  const InverseParams p = random_inverse_params(2, 5, rng);
  const MonteCarloCheck mc = mc_validate_slope_law(p, 200, 5000, rng);
  return CheckResult{"slope sampling law (L=2 D=5 N=200, 5000 draws), rel. Frobenius", mc.rel_frobenius_error, 0.15,
                     mc.rel_frobenius_error <= 0.15};
}

CheckResult check_theta_oracle(std::uint64_t seed) {
  Rng rng = suite_rng(seed, 3);
  const InverseParams p = random_inverse_params(2, 5, rng);
  const MonteCarloCheck mc = mc_validate_theta(p, 2000, 5000, rng);
  return CheckResult{"theta oracle (L=2 D=5 N=2000, 5000 draws), rel. Frobenius", mc.rel_frobenius_error, 0.15,
                     mc.rel_frobenius_error <= 0.15};
}

CheckResult check_uni_cross_interval(std::uint64_t seed) {
  Rng rng = suite_rng(seed, 4);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const FitResult fit = random_uni_fit(rng);
    Vector x(fit.inverse.d());
    for (Index i = 0; i < x.size(); ++i) x[i] = fit.x_means[i] + 2.0 * rng.normal();
    const Interval uni = uni_prediction_interval(fit, x, 0.95);
    const PredictionRegion multi = prediction_region(fit, x, 0.95);
    const double half = std::sqrt(multi.ellipsoid.shape().matrix()(0, 0) * multi.ellipsoid.radius2());
    worst = std::max({worst, rel_gap(uni.center, multi.ellipsoid.center()[0]), rel_gap(uni.half_width, half)});
  }
  return CheckResult{"L=1 prediction interval vs region (50 fits), max rel. gap", worst, 1e-8, worst <= 1e-8};
}

CheckResult check_uni_cross_statistic(std::uint64_t seed) {
  Rng rng = suite_rng(seed, 5);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    InverseParams truth;
    const FitResult fit = random_uni_fit(rng, &truth);
    const Matrix a_star = psi(truth).slope_star;
    const double uni = uni_confidence_statistic(fit, a_star.row(0).transpose());
    const double multi = confidence_region(fit, 0.95).statistic(a_star);
    worst = std::max(worst, rel_gap(uni, multi));
  }
  return CheckResult{"L=1 confidence statistic vs region (50 fits), max rel. gap", worst, 1e-8, worst <= 1e-8};
}

CheckResult check_confidence_coverage(std::uint64_t seed, unsigned threads) {
  const CaseSpec spec{CaseId::case1, 2, 5, 7.5, seed};
  const double cov = confidence_coverage(spec, 500, 500, 0.95, threads);
  const double gap = std::abs(cov - 0.95);
  char name[128];
  std::snprintf(name, sizeof name, "confidence coverage (L=2 D=5 N=500, 500 reps) = %.3f, |gap to 0.95|", cov);
  return CheckResult{name, gap, 0.03, gap <= 0.03};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"involution", "theta-oracle", "uni-cross", "coverage"};
  return names;
}

std::optional<std::vector<CheckResult>> run_suite(const std::string& name, std::uint64_t seed, unsigned threads) {
  if (name == "involution") return std::vector<CheckResult>{check_involution(seed)};
  if (name == "theta-oracle") return std::vector<CheckResult>{check_slope_law(seed), check_theta_oracle(seed)};
  if (name == "uni-cross")
    return std::vector<CheckResult>{check_uni_cross_interval(seed), check_uni_cross_statistic(seed)};
  if (name == "coverage") return std::vector<CheckResult>{check_confidence_coverage(seed, threads)};
  return std::nullopt;
}

std::string format_check(const CheckResult& c) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%s: %s %.3e (limit %.3e)", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                c.threshold);
  return buf;
}

}  // namespace invreg
