// invreg: fit, predict, simulate and validate from the command line.
//
// Exit codes: 0 ok, 1 oracle failure, 2 input error, 3 numerical singularity.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "invreg/error.hpp"
#include "invreg/estimation.hpp"
#include "invreg/inference.hpp"
#include "invreg/io.hpp"
#include "invreg/model.hpp"
#include "invreg/simulation.hpp"
#include "invreg/validation.hpp"

namespace {

using namespace invreg;

constexpr int kOk = 0;
constexpr int kOracleFail = 1;
constexpr int kInputError = 2;
constexpr int kSingular = 3;

struct FitArgs {
  std::string x, y, out;
  bool no_center = false;
  bool header = false;
  bool no_header = false;
};

struct PredictArgs {
  std::string model, x_new, out;
  double level = 0.95;
  bool header = false;
  bool no_header = false;
};

struct SimulateArgs {
  std::string config, out;
  bool reproducible = false;
};

struct ValidateArgs {
  std::string suite;
  std::uint64_t seed = 1;
};

io::Header header_mode(bool present, bool absent) {
  if (present) return io::Header::present;
  if (absent) return io::Header::absent;
  return io::Header::autodetect;
}

int cmd_fit(const FitArgs& a) {
  const Matrix x = io::read_csv(a.x, header_mode(a.header, a.no_header));
  const Matrix y = io::read_csv(a.y, header_mode(a.header, a.no_header));
  if (x.rows() != y.rows())
    throw DimensionError("row counts differ: x has " + std::to_string(x.rows()) + ", y has " + std::to_string(y.rows()));
  const Dataset raw = a.no_center ? Dataset::assume_centered(x, y) : center(Dataset::make(x, y));
  const FitResult fit = fit_forward(raw);
  io::write_text(a.out, io::dump(io::to_json(fit)));
  std::printf("N=%lld D=%lld L=%lld SNR=%.6g\n", static_cast<long long>(fit.n),
              static_cast<long long>(fit.inverse.d()), static_cast<long long>(fit.inverse.l()), snr(fit.forward));
  return kOk;
}

int cmd_predict(const PredictArgs& a) {
  const FitResult fit = io::fit_from_json(io::read_json(a.model));
  const Matrix profiles = io::read_csv(a.x_new, header_mode(a.header, a.no_header));
  if (profiles.cols() != fit.inverse.d())
    throw DimensionError("profile has " + std::to_string(profiles.cols()) + " columns, model expects D=" +
                         std::to_string(fit.inverse.d()));
  const ThetaCov th = theta(fit.inverse, fit.yty, fit.n);
  nlohmann::json regions = nlohmann::json::array();
  for (Index i = 0; i < profiles.rows(); ++i)
    regions.push_back(io::to_json(prediction_region(fit, th, profiles.row(i).transpose(), a.level)));
  io::write_text(a.out, io::dump(regions));
  return kOk;
}

int cmd_simulate(const SimulateArgs& a) {
  const ExperimentConfig config = io::experiment_from_json(io::read_json(a.config));
  const ExperimentReport report = run_experiment(config);
  io::write_text(a.out, report_csv(report, a.reproducible));
  return kOk;
}

int cmd_validate(const ValidateArgs& a) {
  const auto results = run_suite(a.suite, a.seed);
  if (!results) throw DomainError("unknown suite \"" + a.suite + "\"");
  bool all = true;
  for (const auto& c : *results) {
    std::printf("%s\n", format_check(c).c_str());
    all = all && c.pass;
  }
  return all ? kOk : kOracleFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse regression for multivariate Gaussian linear models"};
  app.require_subcommand(1, 1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model from x.csv and y.csv");
  fit_cmd->add_option("--x", fit.x, "Predictor CSV (N x D)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--y", fit.y, "Response CSV (N x L)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", fit.out, "Model JSON")->required();
  fit_cmd->add_flag("--no-center", fit.no_center, "Data are already centered");
  auto* fh = fit_cmd->add_flag("--header", fit.header, "First CSV row is a header");
  fit_cmd->add_flag("--no-header", fit.no_header, "First CSV row is data")->excludes(fh);

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Prediction regions for new profiles");
  pred_cmd->add_option("--model", pred.model, "Model JSON")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--x-new", pred.x_new, "Profile CSV (rows x D)")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--level", pred.level, "Confidence level")->check(CLI::Range(0.0, 1.0));
  pred_cmd->add_option("--out", pred.out, "Regions JSON")->required();
  auto* ph = pred_cmd->add_flag("--header", pred.header, "First CSV row is a header");
  pred_cmd->add_flag("--no-header", pred.no_header, "First CSV row is data")->excludes(ph);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation experiment");
  sim_cmd->add_option("--config", sim.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", sim.out, "Report CSV")->required();
  sim_cmd->add_flag("--reproducible", sim.reproducible, "Write the timing column as 0");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Run an oracle suite");
  val_cmd->add_option("--suite", val.suite, "Suite name")->required()->check(CLI::IsMember(suite_names()));
  val_cmd->add_option("--seed", val.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*pred_cmd) return cmd_predict(pred);
    if (*sim_cmd) return cmd_simulate(sim);
    return cmd_validate(val);
  } catch (const SingularMatrixError& e) {
    std::fprintf(stderr, "error: singular %s: %s\n", e.matrix_name().c_str(), e.what());
    return kSingular;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
}
