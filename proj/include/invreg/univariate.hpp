#pragma once
// Scalar-response (L = 1) path written with the gradient of
// g(A) = s*·AᵀΣ⁻¹, s* = (1/γ + AᵀΣ⁻¹A)⁻¹, independently of the Kronecker
// machinery in inference.hpp. At L = 1 both must agree.

#include "invreg/estimation.hpp"
#include "invreg/inference.hpp"
#include "invreg/linalg.hpp"

namespace invreg {

struct UniParams {
  double gamma = 1.0;
  Vector slope;       // A, length D
  Vector sigma_diag;  // Σ, length D
  double s_star = 1.0;

  static UniParams make(double gamma, Vector slope, Vector sigma_diag);
  static UniParams from(const InverseParams& p);  // requires L = 1

  Index d() const noexcept { return slope.size(); }
};

// g(A) as a length-D vector (the single row of A*).
Vector uni_slope_star(const UniParams& p);

// ∇g = s*Σ⁻¹ − 2 s* Σ⁻¹ A A*, D×D with entry (j, k) = ∂g_k / ∂A_j.
Matrix nabla_g(const UniParams& p);

// inverse_gram · ∇gᵀ Σ ∇g. Pass 1/(yᵀy) for the finite-sample covariance of
// Â*, or 1/γ for the per-√N limit.
Matrix uni_covariance(const UniParams& p, double inverse_gram);

// Covariance added by plugging γ̂ and Σ̂ into g, for a fit on N observations:
//   2/(N−1)·(s*/γ)²·a*a*ᵀ + 2(N−2)/(N−1)²·Σ_j (a*_j)² e_j e_jᵀ
// with e_j the j-th row of I − A a*ᵀ.
Matrix uni_nuisance_covariance(const UniParams& p, Index n);

struct Interval {
  double center;
  double half_width;

  double lower() const noexcept { return center - half_width; }
  double upper() const noexcept { return center + half_width; }
  bool contains(double y) const noexcept { return y >= lower() && y <= upper(); }
};

// center Â*x̃ + ȳ, half-width sqrt(v·χ²_1(level)), v = x̃ᵀ Cov x̃ + s*.
Interval uni_prediction_interval(const FitResult& fit, const Vector& x_new, double level,
                                 RegionCovariance cov = RegionCovariance::with_nuisance);

// (a − Â*)ᵀ Cov⁻¹ (a − Â*) for a candidate slope row a.
double uni_confidence_statistic(const FitResult& fit, const Vector& a_star,
                                RegionCovariance cov = RegionCovariance::with_nuisance);

}  // namespace invreg
