#pragma once
// Oracle suites shared by the CLI `validate` command and the acceptance tests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invreg/model.hpp"
#include "invreg/rng.hpp"

namespace invreg {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Γ = BBᵀ/L + 0.5·I, A standard normal, Σ_jj ~ U(0.5, 2).
InverseParams random_inverse_params(Index l, Index d, Rng& rng);

// Names accepted by run_suite.
const std::vector<std::string>& suite_names();

// Runs one suite; nullopt for an unknown name.
std::optional<std::vector<CheckResult>> run_suite(const std::string& name, std::uint64_t seed, unsigned threads = 0);

std::string format_check(const CheckResult& c);

CheckResult check_involution(std::uint64_t seed);
CheckResult check_slope_law(std::uint64_t seed);
CheckResult check_theta_oracle(std::uint64_t seed);
CheckResult check_uni_cross_interval(std::uint64_t seed);
CheckResult check_uni_cross_statistic(std::uint64_t seed);
CheckResult check_confidence_coverage(std::uint64_t seed, unsigned threads = 0);

}  // namespace invreg
