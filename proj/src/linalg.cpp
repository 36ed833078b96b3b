#include "invreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "invreg/error.hpp"
#include "invreg/kernels.hpp"

namespace invreg {

struct SpdMatrix::Cache {
  std::string name;
  std::once_flag once;
  Eigen::LLT<Matrix> llt;
  bool ok = false;
};

const std::string& SpdMatrix::name() const noexcept {
  static const std::string unnamed;
  return cache_ ? cache_->name : unnamed;
}

namespace {

void check_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) throw DomainError(name + " has non-finite entries");
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix m, std::string name) {
  if (m.rows() != m.cols()) {
    throw DimensionError(name + " must be square, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  check_finite(m, name);
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300)) {
    throw NotSpdError(name, name + " is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  Matrix sym = 0.5 * (m + m.transpose());
  m_ = std::make_shared<const Matrix>(std::move(sym));
  cache_ = std::make_shared<Cache>();
  cache_->name = std::move(name);
  factor();
}

SpdMatrix SpdMatrix::trusted(Matrix m, std::string name) {
  SpdMatrix s;
  s.m_ = std::make_shared<const Matrix>(std::move(m));
  s.cache_ = std::make_shared<Cache>();
  s.cache_->name = std::move(name);
  return s;
}

SpdMatrix SpdMatrix::identity(Index dim) { return SpdMatrix(Matrix::Identity(dim, dim), "identity"); }

const Eigen::LLT<Matrix>& SpdMatrix::factor() const {
  if (!cache_) throw DomainError("use of an empty SpdMatrix");
  std::call_once(cache_->once, [this] {
    cache_->llt.compute(*m_);
    cache_->ok = cache_->llt.info() == Eigen::Success;
  });
  if (!cache_->ok) {
    throw NotSpdError(cache_->name, "Cholesky factorization of " + cache_->name +
                                        " failed: non-positive pivot (matrix is not SPD)");
  }
  return cache_->llt;
}

Matrix SpdMatrix::solve(const Matrix& b) const {
  if (b.rows() != dim()) throw DimensionError("spd_solve: right-hand side has wrong row count");
  return factor().solve(b);
}

Vector SpdMatrix::solve(const Vector& b) const {
  if (b.size() != dim()) throw DimensionError("spd_solve: right-hand side has wrong length");
  return factor().solve(b);
}

SpdMatrix SpdMatrix::inverse() const {
  Matrix inv = factor().solve(Matrix::Identity(dim(), dim()));
  return SpdMatrix(0.5 * (inv + inv.transpose()), name() + "^-1");
}

double SpdMatrix::logdet() const {
  const Matrix& l = factor().matrixLLT();
  return 2.0 * l.diagonal().array().log().sum();
}

Matrix SpdMatrix::cholesky_lower() const { return factor().matrixL(); }

double SpdMatrix::inverse_quadratic_form(const Vector& v) const {
  if (v.size() != dim()) throw DimensionError("quadratic form: vector has wrong length");
  Vector w = factor().matrixL().solve(v);
  return w.squaredNorm();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const Index m = a.rows(), n = a.cols(), p = b.rows(), q = b.cols();
  Matrix out(m * p, n * q);
  const auto& k = kernels::active();
  for (Index j = 0; j < n; ++j) {
    for (Index l = 0; l < q; ++l) {
      double* col = out.col(j * q + l).data();
      const double* bcol = b.col(l).data();
      for (Index i = 0; i < m; ++i) k.scale(a(i, j), bcol, col + i * p, static_cast<std::size_t>(p));
    }
  }
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw DimensionError("unvec: length " + std::to_string(v.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Permutation::Permutation(std::vector<std::size_t> map) : map_(std::move(map)) {
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t target : map_) {
    if (target >= map_.size() || seen[target]) throw DomainError("permutation map is not a bijection");
    seen[target] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = i;
  return Permutation(std::move(map));
}

Vector Permutation::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != dim()) throw DimensionError("permutation: vector length mismatch");
  Vector out(v.size());
  for (std::size_t i = 0; i < map_.size(); ++i) out[static_cast<Index>(i)] = v[static_cast<Index>(map_[i])];
  return out;
}

Matrix Permutation::apply_rows(const Matrix& m) const {
  if (static_cast<std::size_t>(m.rows()) != dim()) throw DimensionError("permutation: row count mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < map_.size(); ++i) out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(map_[i]));
  return out;
}

Matrix Permutation::apply_cols(const Matrix& m) const {
  if (static_cast<std::size_t>(m.cols()) != dim()) throw DimensionError("permutation: column count mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t k = 0; k < map_.size(); ++k) out.col(static_cast<Index>(map_[k])) = m.col(static_cast<Index>(k));
  return out;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.dim() != dim()) throw DimensionError("permutation: compose dimension mismatch");
  // (this · other · v)[i] = (other · v)[map[i]] = v[other.map[map[i]]]
  std::vector<std::size_t> out(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) out[i] = other.map_[map_[i]];
  return Permutation(std::move(out));
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < map_.size(); ++i)
    if (map_[i] != i) return false;
  return true;
}

Matrix Permutation::dense() const {
  const auto n = static_cast<Index>(dim());
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < map_.size(); ++i) out(static_cast<Index>(i), static_cast<Index>(map_[i])) = 1.0;
  return out;
}

Permutation commutation_matrix(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw DomainError("commutation_matrix: dimensions must be positive");
  const auto r = static_cast<std::size_t>(rows);
  const auto c = static_cast<std::size_t>(cols);
  // vec(Mᵀ)[j + c·i] = Mᵀ(j, i) = M(i, j) = vec(M)[i + r·j]
  std::vector<std::size_t> map(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) map[j + c * i] = i + r * j;
  return Permutation(std::move(map));
}

Matrix sample_matrix_normal(const Matrix& mean, const SpdMatrix& u, const SpdMatrix& v, Rng& rng) {
  if (u.dim() != mean.rows() || v.dim() != mean.cols()) {
    throw DimensionError("sample_matrix_normal: covariance dimensions do not match the mean");
  }
  Matrix z(mean.rows(), mean.cols());
  for (Index j = 0; j < z.cols(); ++j)
    for (Index i = 0; i < z.rows(); ++i) z(i, j) = rng.normal();
  return mean + u.cholesky_lower() * z * v.cholesky_lower().transpose();
}

Matrix spd_solve(const SpdMatrix& s, const Matrix& b) { return s.solve(b); }
SpdMatrix spd_inverse(const SpdMatrix& s) { return s.inverse(); }
double spd_logdet(const SpdMatrix& s) { return s.logdet(); }

Ellipsoid::Ellipsoid(Vector center, SpdMatrix shape, double radius2)
    : center_(std::move(center)), shape_(std::move(shape)), radius2_(radius2) {
  if (shape_.dim() != center_.size()) throw DimensionError("ellipsoid: shape and center dimensions differ");
  if (!(radius2_ > 0.0) || !std::isfinite(radius2_)) throw DomainError("ellipsoid: radius2 must be positive");
}

double Ellipsoid::statistic(const Vector& y) const {
  if (y.size() != center_.size()) throw DimensionError("ellipsoid: point has wrong dimension");
  return shape_.inverse_quadratic_form(y - center_);
}

double Ellipsoid::volume() const { return ellipsoid_volume(*this); }

double ellipsoid_volume(const Ellipsoid& e) {
  const double k = static_cast<double>(e.dim());
  const double log_unit_ball = 0.5 * k * std::log(std::numbers::pi) - std::lgamma(0.5 * k + 1.0);
  return std::exp(log_unit_ball + 0.5 * k * std::log(e.radius2()) + 0.5 * e.shape().logdet());
}

double max_relative_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_relative_diff: shape mismatch");
  if (a.size() == 0) return 0.0;
  const double denom = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / denom;
}

double relative_frobenius(const Matrix& estimate, const Matrix& reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
    throw DimensionError("relative_frobenius: shape mismatch");
  return (estimate - reference).norm() / std::max(reference.norm(), 1e-300);
}

}  // namespace invreg
