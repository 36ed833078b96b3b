#include "invreg/univariate.hpp"

#include <cmath>

#include "invreg/error.hpp"

namespace invreg {
namespace {

double inverse_gram_of(const FitResult& fit) {
  if (fit.inverse.l() != 1) throw DimensionError("univariate path requires L = 1");
  return 1.0 / fit.yty.matrix()(0, 0);
}

Matrix fit_covariance(const FitResult& fit, const UniParams& p, RegionCovariance cov) {
  Matrix out = uni_covariance(p, inverse_gram_of(fit));
  if (cov == RegionCovariance::with_nuisance) out += uni_nuisance_covariance(p, fit.n);
  return out;
}

}  // namespace

UniParams UniParams::make(double gamma, Vector slope, Vector sigma_diag) {
  if (!(gamma > 0.0)) throw DomainError("univariate: gamma must be positive");
  if (slope.size() != sigma_diag.size() || slope.size() == 0) throw DimensionError("univariate: slope/sigma length");
  if ((sigma_diag.array() <= 0.0).any()) throw DomainError("univariate: sigma entries must be positive");
  UniParams p;
  p.gamma = gamma;
  p.slope = std::move(slope);
  p.sigma_diag = std::move(sigma_diag);
  p.s_star = 1.0 / (1.0 / p.gamma + p.slope.cwiseAbs2().cwiseQuotient(p.sigma_diag).sum());
  return p;
}

UniParams UniParams::from(const InverseParams& p) {
  if (p.l() != 1) throw DimensionError("univariate path requires L = 1");
  return make(p.gamma.matrix()(0, 0), p.slope.col(0), p.sigma_diag);
}

Vector uni_slope_star(const UniParams& p) { return p.s_star * p.slope.cwiseQuotient(p.sigma_diag); }

Matrix nabla_g(const UniParams& p) {
  const Vector a_star = uni_slope_star(p);
  const Vector sinv_a = p.slope.cwiseQuotient(p.sigma_diag);
  Matrix grad = -2.0 * p.s_star * sinv_a * a_star.transpose();
  grad.diagonal() += p.s_star * p.sigma_diag.cwiseInverse();
  return grad;
}

Matrix uni_covariance(const UniParams& p, double inverse_gram) {
  const Matrix grad = nabla_g(p);
  Matrix cov = inverse_gram * grad.transpose() * p.sigma_diag.asDiagonal() * grad;
  return 0.5 * (cov + cov.transpose());
}

Matrix uni_nuisance_covariance(const UniParams& p, Index n) {
  if (n <= 2) throw InsufficientSampleError("univariate nuisance covariance: N must exceed 2");
  const double dof = static_cast<double>(n - 1);
  const Vector a_star = uni_slope_star(p);
  const double gamma_scale = p.s_star / p.gamma;
  Matrix out = (2.0 / dof) * gamma_scale * gamma_scale * a_star * a_star.transpose();
  Matrix e = -p.slope * a_star.transpose();
  e.diagonal().array() += 1.0;
  const double sigma_scale = 2.0 * static_cast<double>(n - 2) / (dof * dof);
  for (Index j = 0; j < p.d(); ++j) {
    const Vector row = e.row(j).transpose();
    out += sigma_scale * a_star[j] * a_star[j] * row * row.transpose();
  }
  return out;
}

Interval uni_prediction_interval(const FitResult& fit, const Vector& x_new, double level, RegionCovariance cov_kind) {
  if (x_new.size() != fit.inverse.d()) throw DimensionError("univariate: profile length does not match D");
  const UniParams p = UniParams::from(fit.inverse);
  const Vector x_centered = x_new - fit.x_means;
  const Matrix cov = fit_covariance(fit, p, cov_kind);
  const double v = x_centered.dot(cov * x_centered) + p.s_star;
  const double center = uni_slope_star(p).dot(x_centered) + fit.y_means[0];
  return Interval{center, std::sqrt(v * chi2_quantile(1, level))};
}

double uni_confidence_statistic(const FitResult& fit, const Vector& a_star, RegionCovariance cov_kind) {
  const UniParams p = UniParams::from(fit.inverse);
  if (a_star.size() != p.d()) throw DimensionError("univariate: candidate slope length does not match D");
  const SpdMatrix cov(fit_covariance(fit, p, cov_kind), "univariate covariance");
  return cov.inverse_quadratic_form(a_star - uni_slope_star(p));
}

}  // namespace invreg
