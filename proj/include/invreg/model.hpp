#pragma once
// Inverse-model and forward-model parameter triples and the map Ψ between
// them.
//
//   inverse:  Y ~ N_L(0, Γ),   X | Y = A Y + e,  e ~ N_D(0, Σ), Σ diagonal
//   forward:  X ~ N_D(0, Γ*),  Y | X = A* X + ε, ε ~ N_L(0, Σ*)
//
//   Ψ(Γ, A, Σ) = (Σ + AΓAᵀ, Σ* AᵀΣ⁻¹, (Γ⁻¹ + AᵀΣ⁻¹A)⁻¹)

#include "invreg/linalg.hpp"

namespace invreg {

// Entries of Σ below this are raised to it (with a warning).
inline constexpr double kNoiseFloor = 1e-12;

struct InverseParams {
  SpdMatrix gamma;    // L×L
  Matrix slope;       // D×L
  Vector sigma_diag;  // D, strictly positive

  // Validates shapes and SPD-ness; floors sigma_diag at kNoiseFloor.
  static InverseParams make(Matrix gamma, Matrix slope, Vector sigma_diag);

  Index l() const noexcept { return slope.cols(); }
  Index d() const noexcept { return slope.rows(); }
};

struct ForwardParams {
  SpdMatrix gamma_star;  // D×D, diagonal + rank ≤ L; never factored by psi
  Matrix slope_star;     // L×D
  SpdMatrix sigma_star;  // L×L

  Index l() const noexcept { return slope_star.rows(); }
  Index d() const noexcept { return slope_star.cols(); }
};

// Only L×L matrices are inverted.
ForwardParams psi(const InverseParams& p);

// Ψ applied to a forward triple (the same algebra with the roles of the
// dimensions swapped); returns (Γ, A, Σ) as dense matrices. Inverts D×D
// matrices, so it is for checking, not fitting.
struct DenseTriple {
  Matrix gamma;
  Matrix slope;
  Matrix noise;
};
DenseTriple psi_dense(const Matrix& gamma, const Matrix& slope, const Matrix& noise);

// ‖Ψ(Ψ(p)) − p‖_F / ‖p‖_F over the concatenated triple.
double psi_involution_check(const InverseParams& p);

// (1/L) · trace(A* Γ* A*ᵀ (Σ*)⁻¹)
double snr(const ForwardParams& f);

}  // namespace invreg
