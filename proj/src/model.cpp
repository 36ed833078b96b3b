#include "invreg/model.hpp"

#include <cmath>
#include <string>

#include "invreg/diagnostics.hpp"
#include "invreg/error.hpp"

namespace invreg {

InverseParams InverseParams::make(Matrix gamma, Matrix slope, Vector sigma_diag) {
  const Index l = slope.cols();
  const Index d = slope.rows();
  if (l < 1 || d < 1) throw DimensionError("inverse params: slope must be at least 1x1");
  if (gamma.rows() != l || gamma.cols() != l) {
    throw DimensionError("inverse params: gamma must be " + std::to_string(l) + "x" + std::to_string(l));
  }
  if (sigma_diag.size() != d) {
    throw DimensionError("inverse params: sigma_diag must have length " + std::to_string(d));
  }
  if (!slope.allFinite()) throw DomainError("inverse params: slope has non-finite entries");
  Index floored = 0;
  for (Index j = 0; j < d; ++j) {
    const double s = sigma_diag[j];
    if (!std::isfinite(s) || s < 0.0) throw DomainError("inverse params: sigma_diag entries must be finite and >= 0");
    if (s < kNoiseFloor) {
      sigma_diag[j] = kNoiseFloor;
      ++floored;
    }
  }
  if (floored > 0) {
    warn("inverse params: " + std::to_string(floored) + " noise variance(s) raised to the 1e-12 floor");
  }
  return InverseParams{SpdMatrix(std::move(gamma), "Gamma"), std::move(slope), std::move(sigma_diag)};
}

ForwardParams psi(const InverseParams& p) {
  const Matrix& a = p.slope;
  const Vector inv_sigma = p.sigma_diag.cwiseInverse();
  // AᵀΣ⁻¹ (L×D)
  const Matrix at_sinv = a.transpose() * inv_sigma.asDiagonal();
  Matrix precision = p.gamma.inverse().matrix() + at_sinv * a;
  SpdMatrix sigma_star(SpdMatrix(std::move(precision), "Gamma^-1 + A'Sigma^-1 A").inverse().matrix(), "Sigma*");
  Matrix slope_star = sigma_star.matrix() * at_sinv;

  Matrix gamma_star = a * p.gamma.matrix() * a.transpose();
  gamma_star.diagonal() += p.sigma_diag;
  gamma_star = 0.5 * (gamma_star + gamma_star.transpose());
  return ForwardParams{SpdMatrix::trusted(std::move(gamma_star), "Gamma*"), std::move(slope_star),
                       std::move(sigma_star)};
}

DenseTriple psi_dense(const Matrix& gamma, const Matrix& slope, const Matrix& noise) {
  const SpdMatrix g(gamma, "gamma");
  const SpdMatrix n(noise, "noise");
  const Matrix at_ninv = n.solve(slope).transpose();
  Matrix precision = g.inverse().matrix() + at_ninv * slope;
  const SpdMatrix cov = SpdMatrix(std::move(precision), "precision").inverse();
  Matrix out_gamma = noise + slope * gamma * slope.transpose();
  out_gamma = 0.5 * (out_gamma + out_gamma.transpose());
  return DenseTriple{std::move(out_gamma), cov.matrix() * at_ninv, cov.matrix()};
}

double psi_involution_check(const InverseParams& p) {
  const ForwardParams f = psi(p);
  const DenseTriple back = psi_dense(f.gamma_star.matrix(), f.slope_star, f.sigma_star.matrix());
  const Matrix sigma = p.sigma_diag.asDiagonal();
  const double diff2 = (back.gamma - p.gamma.matrix()).squaredNorm() + (back.slope - p.slope).squaredNorm() +
                       (back.noise - sigma).squaredNorm();
  const double norm2 = p.gamma.matrix().squaredNorm() + p.slope.squaredNorm() + sigma.squaredNorm();
  return std::sqrt(diff2 / norm2);
}

double snr(const ForwardParams& f) {
  const Matrix signal = f.slope_star * f.gamma_star.matrix() * f.slope_star.transpose();
  const Matrix scaled = f.sigma_star.solve(signal);
  return scaled.trace() / static_cast<double>(f.l());
}

}  // namespace invreg
