#pragma once
// Seeded simulation designs and the Monte Carlo harness that measures
// prediction-region coverage, volume and fit time.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "invreg/estimation.hpp"
#include "invreg/inference.hpp"
#include "invreg/model.hpp"
#include "invreg/rng.hpp"

namespace invreg {

enum class CaseId { case1, case2, case3 };

struct CaseSpec {
  CaseId id = CaseId::case1;
  Index l = 1;
  Index d = 1;
  double target_snr = 7.5;
  std::uint64_t seed = 0;
};

enum class Method { ir, lse };

std::string to_string(CaseId id);
std::string to_string(Method m);
std::optional<CaseId> parse_case(std::string_view s);
std::optional<Method> parse_method(std::string_view s);

struct ExperimentConfig {
  CaseSpec spec;
  Index n = 0;
  Index replications = 1;
  double level = 0.95;
  std::vector<Method> methods{Method::ir};

  // Throws DomainError describing the first violated constraint.
  void validate() const;
};

// Case 1: A has exactly ⌊0.9·D·L⌋ zeros at random positions, the rest
// U(−2, 2); Γ = I_L. Case 2: as Case 1 with Γ = ΛΛᵀ + 0.5·I_L, Λ ∈ L×⌈L/2⌉
// standard normal. Case 3: A full U(−0.5, 0.5), Γ as Case 2. Σ = I_D always.
// A is then rescaled by bisection so that snr(psi(params)) = target_snr.
// Draws that cannot be calibrated (A ≡ 0) are redrawn, at most 10 times.
InverseParams gen_params(const CaseSpec& spec, Rng& rng);

// Parameters for an experiment: gen_params on the (seed, params, 0) substream.
InverseParams experiment_params(const CaseSpec& spec);

// Y rows ~ N_L(0, Γ); X rows = A Y_i + e_i, e_i ~ N_D(0, Σ). Not centered.
Dataset simulate_dataset(const InverseParams& p, Index n, Rng& rng);

struct TestPair {
  Vector x;
  Vector y;
};
TestPair simulate_test_pair(const InverseParams& p, Rng& rng);

struct MethodOutcome {
  Method method = Method::ir;
  bool ok = false;
  bool covered = false;
  double volume = 0.0;
  double normalized_volume = 0.0;
  double cpu_seconds = 0.0;
  std::string error;
};

struct ReplicationResult {
  std::vector<MethodOutcome> outcomes;  // same order as config.methods
};

// One learning set and one test pair drawn from the (seed, replication,
// rep_index) substream; each method is fitted and its region checked.
// Method failures are recorded, not thrown.
ReplicationResult run_replication(const ExperimentConfig& config, const InverseParams& params, Index rep_index);
ReplicationResult run_replication(const ExperimentConfig& config, Index rep_index);

struct MethodSummary {
  Method method = Method::ir;
  Index successes = 0;
  Index failures = 0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double mean_volume = 0.0;
  double mean_normalized_volume = 0.0;
  double mean_cpu_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  double snr = 0.0;  // of the true forward parameters
  std::vector<MethodSummary> methods;

  const MethodSummary& summary(Method m) const;
};

// Thread count from INVREG_THREADS, else the hardware concurrency.
unsigned default_thread_count();

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& body);

// Results are aggregated in replication order, so the report does not depend
// on the thread count.
ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads = 0);

inline constexpr const char* kReportCsvHeader =
    "case,L,D,N,method,coverage,coverage_se,volume,normalized_volume,cpu_mean_s,failures";

// One row per method. With reproducible set the timing column is written as 0.
std::string report_csv_rows(const ExperimentReport& report, bool reproducible);
std::string report_csv(const ExperimentReport& report, bool reproducible);

struct MonteCarloCheck {
  double rel_frobenius_error = 0.0;
  Matrix empirical;
  Matrix reference;
};

// Fixes one Y draw, regenerates X `replications` times, maps each Â through g
// with the true Γ and Σ, and compares Cov(vec(Â*)) with theta(p, YᵀY).
MonteCarloCheck mc_validate_theta(const InverseParams& p, Index n, Index replications, Rng& rng);

// Same fixed-Y scheme for Â itself, against (YᵀY)⁻¹ ⊗ Σ.
MonteCarloCheck mc_validate_slope_law(const InverseParams& p, Index n, Index replications, Rng& rng);

// Fraction of replications whose fitted confidence region contains the true A*.
double confidence_coverage(const CaseSpec& spec, Index n, Index replications, double level, unsigned threads = 0);

}  // namespace invreg
