#pragma once
// Dense linear-algebra vocabulary: Kronecker products, column-stacking vec,
// commutation permutations, SPD factorizations, matrix-normal sampling and
// ellipsoids.
//
// Storage is Eigen's default column-major order, so vec(M) is exactly the
// underlying buffer of M. Every formula in the library is written in this
// column-stacking convention.

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invreg/rng.hpp"

namespace invreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Symmetric positive-definite matrix with a Cholesky factor computed once and
// shared between copies.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  // Validates symmetry (1e-10 relative to the largest entry), symmetrizes and
  // factors. Throws NotSpdError naming `name` when a pivot is not positive.
  explicit SpdMatrix(Matrix m, std::string name = "matrix");

  // Skips validation; the factor is computed on first use. For matrices that
  // are SPD by construction and may be too large to factor eagerly.
  static SpdMatrix trusted(Matrix m, std::string name = "matrix");

  static SpdMatrix identity(Index dim);

  const Matrix& matrix() const noexcept { return *m_; }
  Index dim() const noexcept { return m_ ? m_->rows() : 0; }
  const std::string& name() const noexcept;

  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  SpdMatrix inverse() const;
  double logdet() const;
  Matrix cholesky_lower() const;

  // vᵀ S⁻¹ v
  double inverse_quadratic_form(const Vector& v) const;

 private:
  struct Cache;
  const Eigen::LLT<Matrix>& factor() const;

  std::shared_ptr<const Matrix> m_;
  std::shared_ptr<Cache> cache_;
};

Matrix kron(const Matrix& a, const Matrix& b);

Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

// Permutation matrix stored as an index map: (P v)[i] = v[map[i]], i.e. the
// dense form has a one at (i, map[i]).
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> map);
  static Permutation identity(std::size_t n);

  std::size_t dim() const noexcept { return map_.size(); }
  std::span<const std::size_t> mapping() const noexcept { return map_; }

  Vector apply(const Vector& v) const;
  // P · m
  Matrix apply_rows(const Matrix& m) const;
  // m · P
  Matrix apply_cols(const Matrix& m) const;

  Permutation inverse() const;
  // (this ∘ other): applying the result equals applying `other` then `this`.
  Permutation compose(const Permutation& other) const;
  bool is_identity() const noexcept;
  Matrix dense() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

// T such that T · vec(M) = vec(Mᵀ) for every rows×cols matrix M.
// T(rows, cols)⁻¹ = T(rows, cols)ᵀ = T(cols, rows).
Permutation commutation_matrix(Index rows, Index cols);

// mean + chol(u) · Z · chol(v)ᵀ with Z iid N(0,1); vec has covariance v ⊗ u.
Matrix sample_matrix_normal(const Matrix& mean, const SpdMatrix& u, const SpdMatrix& v, Rng& rng);

Matrix spd_solve(const SpdMatrix& s, const Matrix& b);
SpdMatrix spd_inverse(const SpdMatrix& s);
double spd_logdet(const SpdMatrix& s);

// Inverse CDF of the chi-square distribution, absolute accuracy 1e-10.
double chi2_quantile(int df, double p);
double chi2_cdf(int df, double x);
// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

// {y : (y − center)ᵀ shape⁻¹ (y − center) ≤ radius2}. The shape is stored in
// covariance form; its factor is cached for membership tests.
class Ellipsoid {
 public:
  Ellipsoid(Vector center, SpdMatrix shape, double radius2);

  const Vector& center() const noexcept { return center_; }
  const SpdMatrix& shape() const noexcept { return shape_; }
  double radius2() const noexcept { return radius2_; }
  Index dim() const noexcept { return center_.size(); }

  double statistic(const Vector& y) const;
  bool contains(const Vector& y) const { return statistic(y) <= radius2_; }
  double volume() const;

 private:
  Vector center_;
  SpdMatrix shape_;
  double radius2_;
};

// (π^{k/2} / Γ(k/2 + 1)) · radius2^{k/2} · det(shape)^{1/2}
double ellipsoid_volume(const Ellipsoid& e);

// max |a − b| / max(max |b|, tiny); both shapes must agree.
double max_relative_diff(const Matrix& a, const Matrix& b);
double relative_frobenius(const Matrix& estimate, const Matrix& reference);

}  // namespace invreg
