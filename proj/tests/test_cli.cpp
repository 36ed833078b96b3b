#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "invreg/io.hpp"
#include "invreg/simulation.hpp"
#include "support.hpp"

using namespace invreg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(INVREG_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("invreg_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("fit recovers the slope of noiseless data") {
  TempDir dir("fit");
  Rng rng(101);
  const Matrix y = test::random_matrix(30, 2, rng);
  const Matrix a = test::random_matrix(5, 2, rng);
  io::write_text(dir / "x.csv", "x1,x2,x3,x4,x5\n" + io::format_csv(y * a.transpose()));
  io::write_text(dir / "y.csv", io::format_csv(y));
  const Run r = run("fit --x " + (dir / "x.csv") + " --y " + (dir / "y.csv") + " --out " + (dir / "model.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("N=30 D=5 L=2") != std::string::npos);
  const FitResult fit = io::fit_from_json(io::read_json(dir / "model.json"));
  CHECK(test::rel_err(fit.inverse.slope, a) < 1e-8);
}

TEST_CASE("fit handles D much larger than N") {
  TempDir dir("wide");
  ExperimentConfig c;
  const InverseParams p = experiment_params(CaseSpec{CaseId::case1, 1, 100, 7.5, 3});
  Rng rng(102);
  const Dataset d = simulate_dataset(p, 50, rng);
  io::write_text(dir / "x.csv", io::format_csv(d.x));
  io::write_text(dir / "y.csv", io::format_csv(d.y));
  const Run r = run("fit --x " + (dir / "x.csv") + " --y " + (dir / "y.csv") + " --out " + (dir / "m.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("D=100") != std::string::npos);
}

TEST_CASE("fit reports mismatched row counts with exit code 2") {
  TempDir dir("mismatch");
  io::write_text(dir / "x.csv", "1,2\n3,4\n5,6\n");
  io::write_text(dir / "y.csv", "1\n2\n");
  const Run r = run("fit --x " + (dir / "x.csv") + " --y " + (dir / "y.csv") + " --out " + (dir / "m.json"));
  CHECK(r.code == 2);
  CHECK(r.out.find('3') != std::string::npos);
  CHECK(r.out.find('2') != std::string::npos);
}

TEST_CASE("fit reports a singular Y'Y with exit code 3") {
  TempDir dir("singular");
  io::write_text(dir / "x.csv", "1,2\n3,4\n5,7\n2,2\n");
  io::write_text(dir / "y.csv", "1,2\n2,4\n3,6\n4,8\n");
  const Run r = run("fit --x " + (dir / "x.csv") + " --y " + (dir / "y.csv") + " --out " + (dir / "m.json"));
  CHECK(r.code == 3);
  CHECK(r.out.find("Y'Y") != std::string::npos);
}

TEST_CASE("parse errors and unknown flags exit with code 2") {
  TempDir dir("parse");
  io::write_text(dir / "x.csv", "1,2\n3,oops\n");
  io::write_text(dir / "y.csv", "1\n2\n");
  CHECK(run("fit --x " + (dir / "x.csv") + " --y " + (dir / "y.csv") + " --out " + (dir / "m.json")).code == 2);
  CHECK(run("fit --bogus").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("validate --suite nonsense").code == 2);
}

TEST_CASE("predict writes one region per profile") {
  TempDir dir("predict");
  const InverseParams p = experiment_params(CaseSpec{CaseId::case3, 2, 4, 7.5, 4});
  Rng rng(103);
  const Dataset d = simulate_dataset(p, 80, rng);
  io::write_text(dir / "x.csv", io::format_csv(d.x));
  io::write_text(dir / "y.csv", io::format_csv(d.y));
  REQUIRE(run("fit --x " + (dir / "x.csv") + " --y " + (dir / "y.csv") + " --out " + (dir / "m.json")).code == 0);
  const FitResult fit = io::fit_from_json(io::read_json(dir / "m.json"));

  Matrix profiles(2, 4);
  profiles.row(0) = fit.x_means.transpose();
  profiles.row(1) = d.x.row(5);
  io::write_text(dir / "p.csv", io::format_csv(profiles));
  const std::string base = "predict --model " + (dir / "m.json") + " --x-new " + (dir / "p.csv");
  REQUIRE(run(base + " --level 0.95 --out " + (dir / "r95.json")).code == 0);
  REQUIRE(run(base + " --level 0.99 --out " + (dir / "r99.json")).code == 0);
  const auto r95 = io::read_json(dir / "r95.json");
  const auto r99 = io::read_json(dir / "r99.json");
  REQUIRE(r95.size() == 2);
  CHECK(test::rel_err(io::matrix_from_json(r95[0], "shape"), fit.forward.sigma_star.matrix()) < 1e-12);
  CHECK(r99[1]["volume"].get<double>() > r95[1]["volume"].get<double>());

  io::write_text(dir / "bad.csv", "1,2,3\n");
  CHECK(run("predict --model " + (dir / "m.json") + " --x-new " + (dir / "bad.csv") + " --out " + (dir / "r.json"))
            .code == 2);
}

TEST_CASE("simulate is byte-identical across runs and thread counts") {
  TempDir dir("simulate");
  io::write_text(dir / "cfg.json",
                 R"({"case":"Case1","L":2,"D":20,"N":30,"replications":12,"methods":["IR"],"seed":5})");
  const std::string args = "simulate --reproducible --config " + (dir / "cfg.json") + " --out ";
  REQUIRE(run(args + (dir / "a.csv")).code == 0);
  REQUIRE(std::system(("INVREG_THREADS=1 " + std::string(INVREG_CLI_PATH) + " " + args + (dir / "b.csv")).c_str()) == 0);
  REQUIRE(std::system(("INVREG_THREADS=4 " + std::string(INVREG_CLI_PATH) + " " + args + (dir / "c.csv")).c_str()) == 0);
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a == slurp(dir / "c.csv"));
  CHECK(a.rfind(kReportCsvHeader, 0) == 0);
}

TEST_CASE("simulate with one replication gives a stable golden row") {
  TempDir dir("golden");
  io::write_text(dir / "cfg.json", R"({"case":"Case3","L":1,"D":3,"N":20,"replications":1,"seed":11})");
  REQUIRE(run("simulate --reproducible --config " + (dir / "cfg.json") + " --out " + (dir / "a.csv")).code == 0);
  const std::string csv = slurp(dir / "a.csv");
  CHECK(csv.find("Case3,1,3,20,IR,") != std::string::npos);
  CHECK(csv.find(",0.000000,0\n") != std::string::npos);
  REQUIRE(run("simulate --reproducible --config " + (dir / "cfg.json") + " --out " + (dir / "b.csv")).code == 0);
  CHECK(csv == slurp(dir / "b.csv"));
}

TEST_CASE("simulate rejects least squares when N <= D") {
  TempDir dir("lse");
  io::write_text(dir / "cfg.json", R"({"case":"Case1","L":1,"D":100,"N":50,"methods":["LSE"]})");
  const Run r = run("simulate --config " + (dir / "cfg.json") + " --out " + (dir / "a.csv"));
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dir / "a.csv"));
}

TEST_CASE("validate runs the fast suites") {
  const Run inv = run("validate --suite involution --seed 3");
  CHECK(inv.code == 0);
  CHECK(inv.out.rfind("PASS", 0) == 0);
  const Run uni = run("validate --suite uni-cross --seed 3");
  CHECK(uni.code == 0);
  CHECK(uni.out.find("FAIL") == std::string::npos);
}
