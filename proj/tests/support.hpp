#pragma once
// Helpers shared by the unit tests.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "invreg/diagnostics.hpp"
#include "invreg/linalg.hpp"
#include "invreg/rng.hpp"

namespace invreg::test {

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Matrix random_spd(Index n, Rng& rng) {
  const Matrix b = random_matrix(n, n, rng);
  Matrix s = b * b.transpose();
  s.diagonal().array() += static_cast<double>(n) * 0.25;
  return s;
}

inline Vector random_positive(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(0.3, 3.0);
  return v;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

// Collects warnings for the lifetime of the guard.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { set_warning_sink(previous_); }
  std::vector<std::string> messages;

 private:
  WarningSink previous_;
};

}  // namespace invreg::test
