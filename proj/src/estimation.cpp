#include "invreg/estimation.hpp"

#include <string>
#include <vector>

#include "invreg/diagnostics.hpp"
#include "invreg/error.hpp"
#include "invreg/kernels.hpp"

namespace invreg {
namespace {

void check_blocks(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    throw DimensionError("x has " + std::to_string(x.rows()) + " rows but y has " + std::to_string(y.rows()));
  }
  if (x.rows() < 2) throw InsufficientSampleError("at least 2 observations are required");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("data contain non-finite values");
}

// Relative pivot threshold below which a Gram matrix is treated as singular.
constexpr double kGramTolerance = 1e-12;

bool well_conditioned(const SpdMatrix& gram) {
  const Vector piv = gram.cholesky_lower().diagonal();
  const double max_diag = gram.matrix().diagonal().maxCoeff();
  return piv.minCoeff() * piv.minCoeff() > kGramTolerance * max_diag;
}

}  // namespace

Dataset Dataset::make(Matrix x, Matrix y) {
  check_blocks(x, y);
  Dataset d;
  d.x_means = Vector::Zero(x.cols());
  d.y_means = Vector::Zero(y.cols());
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

Dataset Dataset::assume_centered(Matrix x, Matrix y) {
  Dataset d = make(std::move(x), std::move(y));
  d.centered = true;
  return d;
}

Dataset center(const Dataset& d) {
  Dataset out = d;
  const Vector xm = d.x.colwise().mean();
  const Vector ym = d.y.colwise().mean();
  out.x.rowwise() -= xm.transpose();
  out.y.rowwise() -= ym.transpose();
  out.x_means = d.x_means + xm;
  out.y_means = d.y_means + ym;
  out.centered = true;
  for (Index l = 0; l < out.y.cols(); ++l) {
    if (out.y.col(l).cwiseAbs().maxCoeff() == 0.0) {
      warn("response column " + std::to_string(l) + " is constant (degenerate response)");
    }
  }
  return out;
}

Matrix cross_gram(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw DimensionError("cross_gram: row counts differ");
  const auto& k = kernels::active();
  const auto n = static_cast<std::size_t>(x.rows());
  Matrix out(x.cols(), y.cols());
  for (Index j = 0; j < y.cols(); ++j)
    for (Index i = 0; i < x.cols(); ++i) out(i, j) = k.dot(x.col(i).data(), y.col(j).data(), n);
  return out;
}

InverseParams fit_inverse(const Matrix& x, const Matrix& y, SpdMatrix* yty_out) {
  check_blocks(x, y);
  const Index n = x.rows();
  const Index l = y.cols();
  const Index d = x.cols();
  if (n <= l) {
    throw InsufficientSampleError("inverse fit needs N > L (N=" + std::to_string(n) + ", L=" + std::to_string(l) + ")");
  }

  Matrix gram = cross_gram(y, y);
  gram = 0.5 * (gram + gram.transpose());
  SpdMatrix yty;
  try {
    yty = SpdMatrix(gram, "Y'Y");
  } catch (const NotSpdError&) {
    throw CollinearResponseError("Y'Y", "Y'Y is singular: responses are collinear or constant");
  }
  if (!well_conditioned(yty)) {
    throw CollinearResponseError("Y'Y", "Y'Y is numerically singular: responses are collinear");
  }

  const Matrix xty = cross_gram(x, y);
  Matrix slope = yty.solve(Matrix(xty.transpose())).transpose();

  const auto& k = kernels::active();
  const auto nn = static_cast<std::size_t>(n);
  const double denom = static_cast<double>(n - 1);
  Vector sigma(d);
  std::vector<double> resid(nn);
  for (Index j = 0; j < d; ++j) {
    std::copy(x.col(j).data(), x.col(j).data() + n, resid.begin());
    for (Index c = 0; c < l; ++c) k.axpy(-slope(j, c), y.col(c).data(), resid.data(), nn);
    sigma[j] = k.dot(resid.data(), resid.data(), nn) / denom;
  }

  Matrix gamma = yty.matrix() / denom;
  if (yty_out != nullptr) *yty_out = yty;
  Index floored = 0;
  for (Index j = 0; j < d; ++j) {
    if (sigma[j] < kNoiseFloor) {
      sigma[j] = kNoiseFloor;
      ++floored;
    }
  }
  if (floored > 0) {
    warn("fit: " + std::to_string(floored) + " residual variance(s) raised to the 1e-12 floor (noiseless columns)");
  }
  return InverseParams::make(std::move(gamma), std::move(slope), std::move(sigma));
}

InverseParams fit_inverse(const Dataset& d) {
  if (!d.centered) throw DomainError("fit_inverse: dataset must be centered (call center() first)");
  return fit_inverse(d.x, d.y);
}

FitResult make_fit(InverseParams inverse, Index n, SpdMatrix yty, Vector x_means, Vector y_means) {
  if (yty.dim() != inverse.l()) throw DimensionError("fit: yty dimension does not match L");
  if (x_means.size() != inverse.d() || y_means.size() != inverse.l()) {
    throw DimensionError("fit: centering means have the wrong length");
  }
  ForwardParams forward = psi(inverse);
  return FitResult{std::move(inverse), std::move(forward), n, std::move(yty), std::move(x_means), std::move(y_means)};
}

FitResult fit_forward(const Dataset& d) {
  if (!d.centered) throw DomainError("fit_forward: dataset must be centered (call center() first)");
  SpdMatrix yty;
  InverseParams inverse = fit_inverse(d.x, d.y, &yty);
  return make_fit(std::move(inverse), d.n(), std::move(yty), d.x_means, d.y_means);
}

LseFit fit_lse(const Dataset& d) {
  if (!d.centered) throw DomainError("fit_lse: dataset must be centered (call center() first)");
  const Index n = d.n();
  const Index p = d.d();
  if (n <= p) {
    throw UnsupportedDesignError("least squares needs N > D (N=" + std::to_string(n) + ", D=" + std::to_string(p) +
                                 "): X'X is not invertible");
  }
  Matrix gram = cross_gram(d.x, d.x);
  gram = 0.5 * (gram + gram.transpose());
  SpdMatrix xtx(gram, "X'X");
  if (!well_conditioned(xtx)) throw SingularMatrixError("X'X", "X'X is numerically singular");

  Matrix slope_star = xtx.solve(cross_gram(d.x, d.y)).transpose();  // L×D
  const Matrix resid = d.y - d.x * slope_star.transpose();
  Matrix sigma_star = resid.transpose() * resid / static_cast<double>(n - p);
  Matrix gamma_star = xtx.matrix() / static_cast<double>(n - 1);
  ForwardParams forward{SpdMatrix::trusted(std::move(gamma_star), "Gamma*_LSE"), std::move(slope_star),
                        SpdMatrix(0.5 * (sigma_star + sigma_star.transpose()), "Sigma*_LSE")};
  return LseFit{std::move(forward), std::move(xtx), n, d.x_means, d.y_means};
}

}  // namespace invreg
