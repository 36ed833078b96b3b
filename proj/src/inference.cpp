#include "invreg/inference.hpp"

#include <cmath>
#include <string>

#include "invreg/diagnostics.hpp"
#include "invreg/error.hpp"

namespace invreg {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1), got " + std::to_string(level));
}

Matrix slope_theta(const InverseParams& p, const ForwardParams& f, const Matrix& w) {
  const Index l = p.l();
  const Index d = p.d();
  const Matrix& a = p.slope;
  const Matrix& a_star = f.slope_star;
  const Matrix& s_star = f.sigma_star.matrix();
  const Vector& sigma = p.sigma_diag;

  Matrix e = -a * a_star;
  e.diagonal().array() += 1.0;

  const Matrix p_term = e.transpose() * sigma.cwiseInverse().asDiagonal() * e;  // D×D
  const Matrix q_term = s_star * w * s_star;                                  // L×L
  const Matrix r_term = a_star.transpose() * w * a_star;                     // D×D
  const Matrix s_term = a_star * sigma.asDiagonal() * a_star.transpose();    // L×L
  const Matrix g_term = e.transpose() * a_star.transpose();                  // D×L
  const Matrix f_term = s_star * w * a_star;                                 // L×D

  const Matrix cross = commutation_matrix(l, d).apply_cols(kron(g_term, f_term));
  return kron(p_term, q_term) + kron(r_term, s_term) - cross - cross.transpose();
}

ThetaCov finalize_theta(Matrix th, const InverseParams& p, ThetaScaling scaling, bool nuisance, Index n) {
  const Index l = p.l();
  const Index d = p.d();
  th = 0.5 * (th + th.transpose());

  ThetaCov out;
  out.scaling = scaling;
  out.l = l;
  out.d = d;
  out.nuisance = nuisance;

  bool factored = false;
  try {
    SpdMatrix candidate(th, "Theta");
    const Vector piv = candidate.cholesky_lower().diagonal();
    if (piv.minCoeff() * piv.minCoeff() > kThetaEigenFloor) {
      out.matrix = std::move(candidate);
      factored = true;
    }
  } catch (const NotSpdError&) {
  }
  if (!factored) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(th);
    Vector vals = eig.eigenvalues();
    for (Index i = 0; i < vals.size(); ++i) {
      if (vals[i] < kThetaEigenFloor) {
        vals[i] = kThetaEigenFloor;
        ++out.floored;
      }
    }
    Matrix rebuilt = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
    out.matrix = SpdMatrix(0.5 * (rebuilt + rebuilt.transpose()), "Theta");
    if (out.floored * 100 > vals.size()) {
      warn("Theta is ill-conditioned: " + std::to_string(out.floored) + " of " + std::to_string(vals.size()) +
           " eigenvalues floored (D=" + std::to_string(d) + ", L=" + std::to_string(l) +
           (n > 0 ? ", N=" + std::to_string(n) : std::string()) + ")");
    }
  }
  return out;
}

}  // namespace

Matrix dg_apply(const InverseParams& p, const Matrix& h) {
  if (h.rows() != p.d() || h.cols() != p.l()) throw DimensionError("dg_apply: direction must be D x L");
  const ForwardParams f = psi(p);
  const Matrix ht_sinv = h.transpose() * p.sigma_diag.cwiseInverse().asDiagonal();  // L×D
  const Matrix& s_star = f.sigma_star.matrix();
  const Matrix& a_star = f.slope_star;
  return s_star * ht_sinv - s_star * ht_sinv * p.slope * a_star - a_star * h * a_star;
}

ThetaCov theta(const InverseParams& p, const SpdMatrix& yty, Index n_for_diagnostics) {
  if (yty.dim() != p.l()) throw DimensionError("theta: yty must be L x L");
  const ForwardParams f = psi(p);
  return finalize_theta(slope_theta(p, f, yty.inverse().matrix()), p, ThetaScaling::finite_sample, false,
                        n_for_diagnostics);
}

ThetaCov theta_asymptotic(const InverseParams& p) {
  const ForwardParams f = psi(p);
  return finalize_theta(slope_theta(p, f, p.gamma.inverse().matrix()), p, ThetaScaling::per_sqrt_n, false, 0);
}

Matrix nuisance_covariance(const InverseParams& p, Index n) {
  if (n <= p.l() + 1) throw InsufficientSampleError("nuisance covariance: N must exceed L + 1");
  const Index l = p.l();
  const Index d = p.d();
  const ForwardParams f = psi(p);
  const Matrix& a_star = f.slope_star;
  const double dof = static_cast<double>(n - 1);

  // Γ along G: dA* = Σ*Γ⁻¹GΓ⁻¹A*, so vec(dA*) = (A*ᵀΓ⁻¹ ⊗ Σ*Γ⁻¹) vec(G).
  const Matrix gamma_inv = p.gamma.inverse().matrix();
  const Matrix jac_gamma = kron(a_star.transpose() * gamma_inv, f.sigma_star.matrix() * gamma_inv);  // DL×L²
  const Matrix gg = kron(p.gamma.matrix(), p.gamma.matrix());
  const Matrix cov_gamma = (gg + commutation_matrix(l, l).apply_rows(gg)) / dof;
  Matrix out = jac_gamma * cov_gamma * jac_gamma.transpose();

  // Σ_jj along s: dA* = −s·A*e_j e_jᵀΣ⁻¹E, Var(Σ̂_jj) = 2Σ_jj²(N−L−1)/(N−1)².
  Matrix e = -p.slope * a_star;
  e.diagonal().array() += 1.0;
  const double sd_scale = std::sqrt(2.0 * static_cast<double>(n - l - 1)) / dof;
  Matrix jac_sigma(d * l, d);
  for (Index j = 0; j < d; ++j) {
    const Matrix dj = (-sd_scale) * a_star.col(j) * e.row(j);
    jac_sigma.col(j) = vec(dj);
  }
  out.noalias() += jac_sigma * jac_sigma.transpose();
  return 0.5 * (out + out.transpose());
}

ThetaCov theta_with_nuisance(const InverseParams& p, const SpdMatrix& yty, Index n) {
  if (yty.dim() != p.l()) throw DimensionError("theta: yty must be L x L");
  const ForwardParams f = psi(p);
  return finalize_theta(slope_theta(p, f, yty.inverse().matrix()) + nuisance_covariance(p, n), p,
                        ThetaScaling::finite_sample, true, n);
}

ConfidenceRegion::ConfidenceRegion(Vector center, ThetaCov theta, double level)
    : center_(std::move(center)), theta_(std::move(theta)), level_(level) {
  check_level(level);
  if (center_.size() != theta_.matrix.dim()) throw DimensionError("confidence region: center and Theta differ");
  radius2_ = chi2_quantile(static_cast<int>(center_.size()), level);
}

double ConfidenceRegion::statistic(const Matrix& a_star) const {
  if (a_star.rows() != theta_.l || a_star.cols() != theta_.d) {
    throw DimensionError("confidence region: candidate slope must be L x D");
  }
  return theta_.matrix.inverse_quadratic_form(vec(a_star) - center_);
}

ThetaCov region_theta(const FitResult& fit, RegionCovariance cov) {
  return cov == RegionCovariance::with_nuisance ? theta_with_nuisance(fit.inverse, fit.yty, fit.n)
                                                : theta(fit.inverse, fit.yty, fit.n);
}

ConfidenceRegion confidence_region(const FitResult& fit, double level, RegionCovariance cov) {
  check_level(level);
  return ConfidenceRegion(vec(fit.forward.slope_star), region_theta(fit, cov), level);
}

Matrix omega(const ThetaCov& th, const Vector& x_centered) {
  if (x_centered.size() != th.d) throw DimensionError("omega: profile must have length D");
  const Matrix basis = kron(x_centered, Matrix::Identity(th.l, th.l));  // DL×L
  Matrix om = basis.transpose() * th.matrix.matrix() * basis;
  return 0.5 * (om + om.transpose());
}

PredictionRegion prediction_region(const FitResult& fit, const ThetaCov& th, const Vector& x_new, double level) {
  check_level(level);
  if (x_new.size() != fit.inverse.d()) {
    throw DimensionError("profile has length " + std::to_string(x_new.size()) + ", model expects D=" +
                         std::to_string(fit.inverse.d()));
  }
  const Vector x_centered = x_new - fit.x_means;
  Matrix om = omega(th, x_centered);
  Vector center = fit.forward.slope_star * x_centered + fit.y_means;
  SpdMatrix shape(om + fit.forward.sigma_star.matrix(), "Omega + Sigma*");
  const double radius2 = chi2_quantile(static_cast<int>(fit.inverse.l()), level);
  return PredictionRegion{Ellipsoid(std::move(center), std::move(shape), radius2), std::move(om),
                          fit.forward.sigma_star, level};
}

PredictionRegion prediction_region(const FitResult& fit, const Vector& x_new, double level, RegionCovariance cov) {
  return prediction_region(fit, region_theta(fit, cov), x_new, level);
}

PredictionRegion prediction_region(const LseFit& fit, const Vector& x_new, double level) {
  check_level(level);
  if (x_new.size() != fit.forward.d()) throw DimensionError("profile length does not match D");
  const Vector x_centered = x_new - fit.x_means;
  const double leverage = x_centered.dot(fit.xtx.solve(x_centered));
  Matrix om = leverage * fit.forward.sigma_star.matrix();
  Vector center = fit.forward.slope_star * x_centered + fit.y_means;
  SpdMatrix shape(om + fit.forward.sigma_star.matrix(), "Omega + Sigma*");
  const double radius2 = chi2_quantile(static_cast<int>(fit.forward.l()), level);
  return PredictionRegion{Ellipsoid(std::move(center), std::move(shape), radius2), std::move(om),
                          fit.forward.sigma_star, level};
}

RegionMetrics region_metrics(const PredictionRegion& r) {
  const double v = r.ellipsoid.volume();
  return RegionMetrics{v, std::pow(v, 1.0 / static_cast<double>(r.ellipsoid.dim()))};
}

}  // namespace invreg
