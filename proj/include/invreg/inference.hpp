#pragma once
// Delta-method covariance of the forward slope estimator and the regions
// built from it.

#include "invreg/estimation.hpp"
#include "invreg/linalg.hpp"
#include "invreg/model.hpp"

namespace invreg {

// finite_sample: the column covariance of Â is (YᵀY)⁻¹, so Θ is the covariance
// of vec(Â*) itself. per_sqrt_n: Γ⁻¹ in its place, the covariance of
// √N·vec(Â*) in the limit.
enum class ThetaScaling { finite_sample, per_sqrt_n };

inline constexpr double kThetaEigenFloor = 1e-12;

struct ThetaCov {
  SpdMatrix matrix;  // DL×DL, indexed by vec of an L×D matrix
  ThetaScaling scaling = ThetaScaling::finite_sample;
  Index l = 0;
  Index d = 0;
  Index floored = 0;  // eigenvalues raised to kThetaEigenFloor
  bool nuisance = false;  // includes the Γ̂ and Σ̂ terms of nuisance_covariance
};

// Directional derivative of A ↦ A* = (Γ⁻¹ + AᵀΣ⁻¹A)⁻¹AᵀΣ⁻¹ along h (D×L):
//   Σ*HᵀΣ⁻¹ − Σ*HᵀΣ⁻¹AA* − A*HA*
Matrix dg_apply(const InverseParams& p, const Matrix& h);

// Cov(vec(Dg(A)·(Â − A))) for Â ~ MN(A, Σ, W) with W = (YᵀY)⁻¹:
//
//   Θ = (EᵀΣ⁻¹E ⊗ Σ*WΣ*) + (A*ᵀWA* ⊗ A*ΣA*ᵀ) − C − Cᵀ,
//   C = (EᵀA*ᵀ ⊗ Σ*WA*) · T_LD,   E = I_D − AA*.
//
// Symmetrized; eigenvalues floored at kThetaEigenFloor only if the Cholesky
// factorization fails or is numerically degenerate.
ThetaCov theta(const InverseParams& p, const SpdMatrix& yty, Index n_for_diagnostics = 0);
ThetaCov theta_asymptotic(const InverseParams& p);

// Extra covariance of vec(Â*) when Γ̂ = YᵀY/(N−1) and Σ̂ are plugged into g
// together with Â. Â is conditionally independent of both, so the terms add:
//
//   J_Γ · (I + T_LL)(Γ ⊗ Γ)/(N−1) · J_Γᵀ,   J_Γ = A*ᵀΓ⁻¹ ⊗ Σ*Γ⁻¹
//   Σ_j Var(Σ̂_jj) · m_j m_jᵀ,              m_j = −vec(A*e_j e_jᵀΣ⁻¹E)
//
// with Var(Σ̂_jj) = 2Σ_jj²(N−L−1)/(N−1)².
Matrix nuisance_covariance(const InverseParams& p, Index n);

// theta(p, yty) + nuisance_covariance(p, n), floored the same way.
ThetaCov theta_with_nuisance(const InverseParams& p, const SpdMatrix& yty, Index n);

// Which covariance a region is built from.
enum class RegionCovariance { slope_only, with_nuisance };

class ConfidenceRegion {
 public:
  ConfidenceRegion(Vector center, ThetaCov theta, double level);

  const Vector& center() const noexcept { return center_; }
  const ThetaCov& theta() const noexcept { return theta_; }
  double level() const noexcept { return level_; }
  double radius2() const noexcept { return radius2_; }

  // (vec(a) − vec(Â*))ᵀ Θ̂⁻¹ (vec(a) − vec(Â*)) for an L×D candidate slope.
  double statistic(const Matrix& a_star) const;
  bool contains(const Matrix& a_star) const { return statistic(a_star) <= radius2_; }

 private:
  Vector center_;
  ThetaCov theta_;
  double level_;
  double radius2_;
};

ThetaCov region_theta(const FitResult& fit, RegionCovariance cov);

ConfidenceRegion confidence_region(const FitResult& fit, double level,
                                   RegionCovariance cov = RegionCovariance::with_nuisance);

struct PredictionRegion {
  Ellipsoid ellipsoid;  // dim L, shape = omega + sigma_star
  Matrix omega;         // slope-estimation part, PSD (zero at the training mean)
  SpdMatrix sigma_star;
  double level;
};

// (x ⊗ I_L)ᵀ Θ (x ⊗ I_L), the covariance of (Â* − A*)x.
Matrix omega(const ThetaCov& theta, const Vector& x_centered);

PredictionRegion prediction_region(const FitResult& fit, const Vector& x_new, double level,
                                   RegionCovariance cov = RegionCovariance::with_nuisance);
PredictionRegion prediction_region(const FitResult& fit, const ThetaCov& theta, const Vector& x_new, double level);

// Least-squares counterpart: Ω = (x̃ᵀ(XᵀX)⁻¹x̃) Σ̂*.
PredictionRegion prediction_region(const LseFit& fit, const Vector& x_new, double level);

struct RegionMetrics {
  double volume;
  double normalized_volume;  // volume^{1/L}
};

RegionMetrics region_metrics(const PredictionRegion& r);

}  // namespace invreg
