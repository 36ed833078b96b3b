#pragma once
// Least-squares fitting of the inverse model and the forward parameters it
// induces through Ψ, plus the ordinary least-squares forward baseline.

#include "invreg/linalg.hpp"
#include "invreg/model.hpp"

namespace invreg {

// Rows are observations. Once centered, x_means / y_means hold the training
// column means that were removed.
struct Dataset {
  Matrix x;  // N×D
  Matrix y;  // N×L
  bool centered = false;
  Vector x_means;
  Vector y_means;

  // Checks N agreement and N >= 2. Means are zero and centered is false.
  static Dataset make(Matrix x, Matrix y);
  // Marks already-centered data as such (zero means) without touching it.
  static Dataset assume_centered(Matrix x, Matrix y);

  Index n() const noexcept { return x.rows(); }
  Index d() const noexcept { return x.cols(); }
  Index l() const noexcept { return y.cols(); }
};

Dataset center(const Dataset& d);

struct FitResult {
  InverseParams inverse;
  ForwardParams forward;
  Index n = 0;
  SpdMatrix yty;  // YᵀY, L×L
  Vector x_means;
  Vector y_means;
};

// Γ̂ = YᵀY/(N−1), Â = XᵀY(YᵀY)⁻¹ (D×L), Σ̂_jj = Σ_i (X_ij − [Â Y_i]_j)² / (N−1).
InverseParams fit_inverse(const Dataset& d);

// Same estimator on raw blocks with no centering precondition. yty receives
// YᵀY when non-null.
InverseParams fit_inverse(const Matrix& x, const Matrix& y, SpdMatrix* yty = nullptr);

// forward = psi(fit_inverse(d)); no D×D matrix is inverted.
FitResult fit_forward(const Dataset& d);

// Rebuilds a FitResult from its stored inverse parameters (as when loading a
// model file); forward parameters are recomputed with psi.
FitResult make_fit(InverseParams inverse, Index n, SpdMatrix yty, Vector x_means, Vector y_means);

struct LseFit {
  ForwardParams forward;
  SpdMatrix xtx;  // XᵀX, D×D
  Index n = 0;
  Vector x_means;
  Vector y_means;
};

// Â* = YᵀX(XᵀX)⁻¹, Σ̂* = RᵀR/(N−D), Γ̂* = XᵀX/(N−1). Requires N > D.
LseFit fit_lse(const Dataset& d);

// XᵀY with the active kernel table (columns are contiguous).
Matrix cross_gram(const Matrix& x, const Matrix& y);

}  // namespace invreg
