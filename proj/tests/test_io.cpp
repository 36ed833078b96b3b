#include <filesystem>
#include <fstream>

#include "invreg/error.hpp"
#include "invreg/io.hpp"
#include "invreg/validation.hpp"
#include "support.hpp"

using namespace invreg;

TEST_CASE("CSV header autodetection") {
  const Matrix with = io::parse_csv("a,b\n1,2\n3,4\n");
  CHECK(with.rows() == 2);
  CHECK(with(1, 0) == 3.0);
  const Matrix without = io::parse_csv("1,2\n3,4\n");
  CHECK(without.rows() == 2);
  CHECK(io::parse_csv("1e-3, -2.5\r\n+4,5\n\n")(0, 0) == 1e-3);
}

TEST_CASE("CSV explicit header flags") {
  CHECK(io::parse_csv("1,2\n3,4\n", io::Header::present).rows() == 1);
  CHECK_THROWS_AS(io::parse_csv("x,y\n3,4\n", io::Header::absent), ParseError);
}

TEST_CASE("CSV errors name the line") {
  try {
    io::parse_csv("1,2\n3\n", io::Header::autodetect, "f.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("f.csv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(io::parse_csv("1,2\n3,abc\n"), ParseError);
  CHECK_THROWS_AS(io::parse_csv("a,b\n"), ParseError);
  CHECK_THROWS_AS(io::parse_csv(""), ParseError);
  CHECK_THROWS_AS(io::read_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("CSV formatting round-trips exactly") {
  Rng rng(91);
  const Matrix m = test::random_matrix(4, 3, rng);
  CHECK(io::parse_csv(io::format_csv(m)) == m);
}

TEST_CASE("fit result JSON round-trips without loss") {
  Rng rng(92);
  const InverseParams p = random_inverse_params(2, 6, rng);
  const FitResult fit = fit_forward(center(simulate_dataset(p, 40, rng)));
  const nlohmann::json doc = nlohmann::json::parse(io::dump(io::to_json(fit)));
  for (const char* key : {"gamma", "slope", "sigma_diag", "gamma_star", "slope_star", "sigma_star", "n", "yty",
                          "x_means", "y_means"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["slope"].size() == 6);
  CHECK(doc["slope"][0].size() == 2);
  CHECK(doc["slope"][1][0].get<double>() == fit.inverse.slope(1, 0));

  const FitResult back = io::fit_from_json(doc);
  CHECK(back.inverse.slope == fit.inverse.slope);
  CHECK(back.inverse.sigma_diag == fit.inverse.sigma_diag);
  CHECK(back.yty.matrix() == fit.yty.matrix());
  CHECK(back.n == fit.n);
  CHECK(test::rel_err(back.forward.slope_star, fit.forward.slope_star) <= 1e-12);
}

TEST_CASE("parameter JSON") {
  Rng rng(93);
  const InverseParams p = random_inverse_params(3, 4, rng);
  const InverseParams q = io::inverse_params_from_json(io::to_json(p));
  CHECK(q.gamma.matrix() == p.gamma.matrix());
  const ForwardParams f = psi(p);
  const ForwardParams g = io::forward_params_from_json(io::to_json(f));
  CHECK(g.slope_star == f.slope_star);
  CHECK(g.sigma_star.matrix() == f.sigma_star.matrix());
  nlohmann::json bad = io::to_json(p);
  bad.erase("slope");
  CHECK_THROWS_AS(io::inverse_params_from_json(bad), ParseError);
  bad = io::to_json(p);
  bad["gamma"][0] = nlohmann::json::array({1.0});
  CHECK_THROWS_AS(io::inverse_params_from_json(bad), ParseError);
}

TEST_CASE("region JSON carries the shared schema") {
  Rng rng(94);
  const InverseParams p = random_inverse_params(2, 3, rng);
  const FitResult fit = fit_forward(center(simulate_dataset(p, 50, rng)));
  const nlohmann::json r = io::to_json(prediction_region(fit, fit.x_means, 0.95));
  for (const char* key : {"center", "shape", "radius2", "level", "volume", "normalized_volume"}) CHECK(r.contains(key));
  CHECK(r["shape"].size() == 2);

  const nlohmann::json c = io::to_json(confidence_region(fit, 0.95), psi(p).slope_star);
  CHECK(c.contains("statistic"));
  CHECK(c["center"].size() == 2);
  CHECK(c["center"][0].size() == 3);
  CHECK(c["shape"].size() == 6);
}

TEST_CASE("experiment config JSON") {
  const auto j = nlohmann::json::parse(
      R"({"case":"Case2","L":2,"D":10,"N":30,"replications":5,"level":0.9,"methods":["IR","LSE"],"seed":12,"target_snr":6})");
  const ExperimentConfig c = io::experiment_from_json(j);
  CHECK(c.spec.id == CaseId::case2);
  CHECK(c.spec.l == 2);
  CHECK(c.spec.seed == 12);
  CHECK(c.methods.size() == 2);
  CHECK(c.spec.target_snr == 6.0);
  CHECK(io::experiment_from_json(io::to_json(c)).n == 30);

  auto bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(io::experiment_from_json(bad), ParseError);
  bad = j;
  bad["N"] = 5;
  CHECK_THROWS_AS(io::experiment_from_json(bad), DomainError);
  bad = j;
  bad["case"] = "Case9";
  CHECK_THROWS_AS(io::experiment_from_json(bad), ParseError);
  bad = j;
  bad["seed"] = -1;
  CHECK_THROWS_AS(io::experiment_from_json(bad), ParseError);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "invreg_io_test";
  std::filesystem::create_directories(dir);
  io::write_text(dir / "a.json", "{\"k\": 1}\n");
  CHECK(io::read_json(dir / "a.json")["k"] == 1);
  io::write_text(dir / "b.json", "{broken");
  CHECK_THROWS_AS(io::read_json(dir / "b.json"), ParseError);
  std::filesystem::remove_all(dir);
}
