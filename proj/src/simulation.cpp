#include "invreg/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "invreg/error.hpp"
#include "invreg/kernels.hpp"

namespace invreg {
namespace {

constexpr int kMaxDrawAttempts = 10;
constexpr int kBisectionSteps = 40;

double snr_at_scale(const InverseParams& base, double c) {
  InverseParams scaled{base.gamma, c * base.slope, base.sigma_diag};
  return snr(psi(scaled));
}

Matrix case_gamma(const CaseSpec& spec, Rng& rng) {
  if (spec.id == CaseId::case1) return Matrix::Identity(spec.l, spec.l);
  const Index rank = (spec.l + 1) / 2;
  Matrix loadings(spec.l, rank);
  for (Index j = 0; j < rank; ++j)
    for (Index i = 0; i < spec.l; ++i) loadings(i, j) = rng.normal();
  Matrix g = loadings * loadings.transpose();
  g.diagonal().array() += 0.5;
  return g;
}

Matrix case_slope(const CaseSpec& spec, Rng& rng) {
  Matrix a = Matrix::Zero(spec.d, spec.l);
  if (spec.id == CaseId::case3) {
    for (Index j = 0; j < spec.l; ++j)
      for (Index i = 0; i < spec.d; ++i) a(i, j) = rng.uniform(-0.5, 0.5);
    return a;
  }
  const auto total = static_cast<std::size_t>(spec.d * spec.l);
  const auto zeros = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  for (std::size_t k = zeros; k < total; ++k) a.data()[order[k]] = rng.uniform(-2.0, 2.0);
  return a;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

MethodOutcome run_method(Method method, const Dataset& raw, const TestPair& test, double level) {
  MethodOutcome out;
  out.method = method;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Dataset data = center(raw);
    std::optional<PredictionRegion> region;
    if (method == Method::ir) {
      region.emplace(prediction_region(fit_forward(data), test.x, level));
    } else {
      region.emplace(prediction_region(fit_lse(data), test.x, level));
    }
    out.cpu_seconds = seconds_since(start);
    out.covered = region->ellipsoid.contains(test.y);
    const RegionMetrics m = region_metrics(*region);
    out.volume = m.volume;
    out.normalized_volume = m.normalized_volume;
    out.ok = true;
  } catch (const std::exception& e) {
    out.cpu_seconds = seconds_since(start);
    out.error = e.what();
  }
  return out;
}

Matrix empirical_covariance(const Matrix& samples) {
  // samples: one draw per column
  const Vector mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - mean;
  return centered * centered.transpose() / static_cast<double>(samples.cols() - 1);
}

Matrix draw_responses(const InverseParams& p, Index n, Rng& rng) {
  const Index l = p.l();
  Matrix z(n, l);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < l; ++j) z(i, j) = rng.normal();
  return z * p.gamma.cholesky_lower().transpose();
}

Matrix draw_predictors(const InverseParams& p, const Matrix& y, Rng& rng) {
  const Index n = y.rows();
  const Index d = p.d();
  const auto nn = static_cast<std::size_t>(n);
  const auto& k = kernels::active();
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  for (Index j = 0; j < d; ++j) {
    double* col = x.col(j).data();
    k.scale(std::sqrt(p.sigma_diag[j]), col, col, nn);
    for (Index c = 0; c < p.l(); ++c) k.axpy(p.slope(j, c), y.col(c).data(), col, nn);
  }
  return x;
}

}  // namespace

std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::case1: return "Case1";
    case CaseId::case2: return "Case2";
    case CaseId::case3: return "Case3";
  }
  return "?";
}

std::string to_string(Method m) { return m == Method::ir ? "IR" : "LSE"; }

std::optional<CaseId> parse_case(std::string_view s) {
  if (s == "Case1" || s == "case1" || s == "1") return CaseId::case1;
  if (s == "Case2" || s == "case2" || s == "2") return CaseId::case2;
  if (s == "Case3" || s == "case3" || s == "3") return CaseId::case3;
  return std::nullopt;
}

std::optional<Method> parse_method(std::string_view s) {
  if (s == "IR" || s == "ir") return Method::ir;
  if (s == "LSE" || s == "lse") return Method::lse;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (spec.l < 1 || spec.d < 1) throw DomainError("experiment: L and D must be >= 1");
  if (!(spec.target_snr > 0.0)) throw DomainError("experiment: target_snr must be positive");
  if (n < 2) throw DomainError("experiment: N must be >= 2");
  if (n <= spec.l) throw DomainError("experiment: N must exceed L");
  if (replications < 1) throw DomainError("experiment: replications must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("experiment: level must lie in (0, 1)");
  if (methods.empty()) throw DomainError("experiment: at least one method is required");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (std::find(methods.begin() + static_cast<std::ptrdiff_t>(i) + 1, methods.end(), methods[i]) != methods.end())
      throw DomainError("experiment: duplicate method " + to_string(methods[i]));
    if (methods[i] == Method::lse && n <= spec.d)
      throw DomainError("experiment: LSE requires N > D (N=" + std::to_string(n) + ", D=" + std::to_string(spec.d) + ")");
  }
}

InverseParams gen_params(const CaseSpec& spec, Rng& rng) {
  if (spec.l < 1 || spec.d < 1) throw DomainError("gen_params: L and D must be >= 1");
  if (!(spec.target_snr > 0.0)) throw DomainError("gen_params: target_snr must be positive");
  for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
    Matrix gamma = case_gamma(spec, rng);
    Matrix slope = case_slope(spec, rng);
    if (slope.cwiseAbs().maxCoeff() == 0.0) continue;
    const InverseParams base = InverseParams::make(std::move(gamma), std::move(slope), Vector::Ones(spec.d));

    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (snr_at_scale(base, hi) < spec.target_snr && doublings < 200) {
      lo = hi;
      hi *= 2.0;
      ++doublings;
    }
    if (snr_at_scale(base, hi) < spec.target_snr) continue;
    for (int step = 0; step < kBisectionSteps; ++step) {
      const double mid = 0.5 * (lo + hi);
      if (snr_at_scale(base, mid) < spec.target_snr) lo = mid;
      else hi = mid;
    }
    const double c = 0.5 * (lo + hi);
    if (std::abs(snr_at_scale(base, c) - spec.target_snr) > 0.01) continue;
    return InverseParams{base.gamma, c * base.slope, base.sigma_diag};
  }
  throw DomainError("gen_params: could not calibrate the SNR after 10 draws");
}

InverseParams experiment_params(const CaseSpec& spec) {
  Rng rng = Rng::substream(spec.seed, streams::params, 0);
  return gen_params(spec, rng);
}

Dataset simulate_dataset(const InverseParams& p, Index n, Rng& rng) {
  if (n < 2) throw DomainError("simulate_dataset: n must be >= 2");
  Matrix y = draw_responses(p, n, rng);
  Matrix x = draw_predictors(p, y, rng);
  return Dataset::make(std::move(x), std::move(y));
}

TestPair simulate_test_pair(const InverseParams& p, Rng& rng) {
  const Matrix y = draw_responses(p, 1, rng);
  const Matrix x = draw_predictors(p, y, rng);
  return TestPair{x.row(0).transpose(), y.row(0).transpose()};
}

ReplicationResult run_replication(const ExperimentConfig& config, const InverseParams& params, Index rep_index) {
  Rng rng = Rng::substream(config.spec.seed, streams::replication, static_cast<std::uint64_t>(rep_index));
  const Dataset data = simulate_dataset(params, config.n, rng);
  const TestPair test = simulate_test_pair(params, rng);
  ReplicationResult out;
  out.outcomes.reserve(config.methods.size());
  for (Method m : config.methods) out.outcomes.push_back(run_method(m, data, test, config.level));
  return out;
}

ReplicationResult run_replication(const ExperimentConfig& config, Index rep_index) {
  return run_replication(config, experiment_params(config.spec), rep_index);
}

const MethodSummary& ExperimentReport::summary(Method m) const {
  for (const auto& s : methods)
    if (s.method == m) return s;
  throw DomainError("report has no row for method " + to_string(m));
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("INVREG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& body) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<Index>(threads, std::max<Index>(count, 1)));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
}

ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const InverseParams params = experiment_params(config.spec);
  std::vector<ReplicationResult> results(static_cast<std::size_t>(config.replications));
  parallel_for(config.replications, threads,
               [&](Index rep) { results[static_cast<std::size_t>(rep)] = run_replication(config, params, rep); });

  ExperimentReport report;
  report.config = config;
  report.snr = snr(psi(params));
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    MethodSummary s;
    s.method = config.methods[m];
    Index covered = 0;
    double vol = 0.0, nvol = 0.0, cpu = 0.0;
    for (const auto& r : results) {
      const MethodOutcome& o = r.outcomes[m];
      if (!o.ok) {
        ++s.failures;
        continue;
      }
      ++s.successes;
      covered += o.covered ? 1 : 0;
      vol += o.volume;
      nvol += o.normalized_volume;
      cpu += o.cpu_seconds;
    }
    if (s.successes > 0) {
      const double k = static_cast<double>(s.successes);
      s.coverage = static_cast<double>(covered) / k;
      s.coverage_se = std::sqrt(s.coverage * (1.0 - s.coverage) / k);
      s.mean_volume = vol / k;
      s.mean_normalized_volume = nvol / k;
      s.mean_cpu_seconds = cpu / k;
    }
    report.methods.push_back(s);
  }
  return report;
}

std::string report_csv_rows(const ExperimentReport& report, bool reproducible) {
  std::ostringstream out;
  const auto& c = report.config;
  char buf[512];
  for (const auto& s : report.methods) {
    std::snprintf(buf, sizeof buf, "%s,%lld,%lld,%lld,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%lld\n", to_string(c.spec.id).c_str(),
                  static_cast<long long>(c.spec.l), static_cast<long long>(c.spec.d), static_cast<long long>(c.n),
                  to_string(s.method).c_str(), s.coverage, s.coverage_se, s.mean_volume, s.mean_normalized_volume,
                  reproducible ? 0.0 : s.mean_cpu_seconds, static_cast<long long>(s.failures));
    out << buf;
  }
  return out.str();
}

std::string report_csv(const ExperimentReport& report, bool reproducible) {
  return std::string(kReportCsvHeader) + "\n" + report_csv_rows(report, reproducible);
}

MonteCarloCheck mc_validate_theta(const InverseParams& p, Index n, Index replications, Rng& rng) {
  if (replications < 2) throw DomainError("mc_validate_theta: need at least 2 replications");
  const Matrix y = draw_responses(p, n, rng);
  SpdMatrix yty(cross_gram(y, y), "Y'Y");
  const Matrix w = yty.inverse().matrix();
  const Index dl = p.d() * p.l();
  Matrix samples(dl, replications);
  for (Index r = 0; r < replications; ++r) {
    const Matrix x = draw_predictors(p, y, rng);
    const Matrix a_hat = cross_gram(x, y) * w;
    const InverseParams at_hat{p.gamma, a_hat, p.sigma_diag};
    samples.col(r) = vec(psi(at_hat).slope_star);
  }
  MonteCarloCheck out;
  out.empirical = empirical_covariance(samples);
  out.reference = theta(p, yty).matrix.matrix();
  out.rel_frobenius_error = relative_frobenius(out.empirical, out.reference);
  return out;
}

MonteCarloCheck mc_validate_slope_law(const InverseParams& p, Index n, Index replications, Rng& rng) {
  if (replications < 2) throw DomainError("mc_validate_slope_law: need at least 2 replications");
  const Matrix y = draw_responses(p, n, rng);
  SpdMatrix yty_unused;
  const Index dl = p.d() * p.l();
  Matrix samples(dl, replications);
  for (Index r = 0; r < replications; ++r) {
    const Matrix x = draw_predictors(p, y, rng);
    samples.col(r) = vec(fit_inverse(x, y, &yty_unused).slope);
  }
  MonteCarloCheck out;
  out.empirical = empirical_covariance(samples);
  out.reference = kron(yty_unused.inverse().matrix(), Matrix(p.sigma_diag.asDiagonal()));
  out.rel_frobenius_error = relative_frobenius(out.empirical, out.reference);
  return out;
}

double confidence_coverage(const CaseSpec& spec, Index n, Index replications, double level, unsigned threads) {
  if (replications < 1) throw DomainError("confidence_coverage: replications must be >= 1");
  const InverseParams params = experiment_params(spec);
  const Matrix truth = psi(params).slope_star;
  std::vector<char> hit(static_cast<std::size_t>(replications), 0);
  parallel_for(replications, threads, [&](Index rep) {
    Rng rng = Rng::substream(spec.seed, streams::oracle, static_cast<std::uint64_t>(rep));
    const Dataset data = center(simulate_dataset(params, n, rng));
    hit[static_cast<std::size_t>(rep)] = confidence_region(fit_forward(data), level).contains(truth) ? 1 : 0;
  });
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(replications);
}

}  // namespace invreg
