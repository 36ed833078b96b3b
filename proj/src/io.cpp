#include "invreg/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "invreg/error.hpp"

namespace invreg::io {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) return std::nullopt;
  return v;
}

const json& require(const json& j, std::string_view key) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing key \"" + std::string(key) + "\"");
  return *it;
}

double number_at(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw ParseError("\"" + std::string(key) + "\" must be a number");
  return v.get<double>();
}

Index count_at(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw ParseError("\"" + std::string(key) + "\" must be an integer");
  return static_cast<Index>(v.get<std::int64_t>());
}

Matrix matrix_from_value(const json& v, std::string_view key) {
  const std::string name(key);
  if (!v.is_array()) throw ParseError("\"" + name + "\" must be an array of rows");
  const auto rows = static_cast<Index>(v.size());
  if (rows == 0) return Matrix(0, 0);
  if (!v[0].is_array()) throw ParseError("\"" + name + "\" must be an array of rows");
  const auto cols = static_cast<Index>(v[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw ParseError("\"" + name + "\" row " + std::to_string(i) + " has the wrong length");
    for (Index c = 0; c < cols; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_number()) throw ParseError("\"" + name + "\" holds a non-numeric entry");
      m(i, c) = e.get<double>();
    }
  }
  return m;
}

}  // namespace

Matrix parse_csv(std::string_view text, Header header, std::string_view source) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool first = true;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> values;
    values.reserve(fields.size());
    bool numeric = true;
    for (auto f : fields) {
      const auto v = parse_number(f);
      if (!v) {
        numeric = false;
        break;
      }
      values.push_back(*v);
    }
    if (first) {
      first = false;
      const bool skip = header == Header::present || (header == Header::autodetect && !numeric);
      if (skip) continue;
    }
    if (!numeric)
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": non-numeric field");
    if (rows.empty()) width = values.size();
    if (values.size() != width)
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " fields, found " + std::to_string(values.size()));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(std::string(source) + ": no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < width; ++c) m(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
  return m;
}

Matrix read_csv(const std::filesystem::path& path, Header header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), header, path.string());
}

std::string format_csv(const Matrix& m) {
  std::string out;
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index c = 0; c < m.cols(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, m(i, c));
      if (c) out += ',';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Matrix matrix_from_json(const json& j, std::string_view key) { return matrix_from_value(require(j, key), key); }

Vector vector_from_json(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_array()) throw ParseError("\"" + std::string(key) + "\" must be an array");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ParseError("\"" + std::string(key) + "\" holds a non-numeric entry");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

json to_json(const InverseParams& p) {
  return json{{"gamma", to_json(p.gamma.matrix())}, {"slope", to_json(p.slope)}, {"sigma_diag", to_json(p.sigma_diag)}};
}

json to_json(const ForwardParams& f) {
  return json{{"gamma_star", to_json(f.gamma_star.matrix())},
              {"slope_star", to_json(f.slope_star)},
              {"sigma_star", to_json(f.sigma_star.matrix())}};
}

InverseParams inverse_params_from_json(const json& j) {
  return InverseParams::make(matrix_from_json(j, "gamma"), matrix_from_json(j, "slope"),
                             vector_from_json(j, "sigma_diag"));
}

ForwardParams forward_params_from_json(const json& j) {
  Matrix gamma_star = matrix_from_json(j, "gamma_star");
  Matrix slope_star = matrix_from_json(j, "slope_star");
  Matrix sigma_star = matrix_from_json(j, "sigma_star");
  if (gamma_star.rows() != gamma_star.cols() || gamma_star.rows() != slope_star.cols() ||
      sigma_star.rows() != sigma_star.cols() || sigma_star.rows() != slope_star.rows())
    throw DimensionError("forward parameters: gamma_star, slope_star and sigma_star shapes do not conform");
  return ForwardParams{SpdMatrix(std::move(gamma_star), "Gamma*"), std::move(slope_star),
                       SpdMatrix(std::move(sigma_star), "Sigma*")};
}

json to_json(const FitResult& fit) {
  json j = to_json(fit.inverse);
  j.update(to_json(fit.forward));
  j["n"] = fit.n;
  j["yty"] = to_json(fit.yty.matrix());
  j["x_means"] = to_json(fit.x_means);
  j["y_means"] = to_json(fit.y_means);
  return j;
}

FitResult fit_from_json(const json& j) {
  InverseParams inverse = inverse_params_from_json(j);
  const Index n = count_at(j, "n");
  SpdMatrix yty(matrix_from_json(j, "yty"), "Y'Y");
  Vector x_means = vector_from_json(j, "x_means");
  Vector y_means = vector_from_json(j, "y_means");
  if (yty.dim() != inverse.l() || x_means.size() != inverse.d() || y_means.size() != inverse.l())
    throw DimensionError("model: yty, x_means or y_means does not match slope " + std::to_string(inverse.d()) + "x" +
                         std::to_string(inverse.l()));
  return make_fit(std::move(inverse), n, std::move(yty), std::move(x_means), std::move(y_means));
}

json to_json(const PredictionRegion& r) {
  const RegionMetrics m = region_metrics(r);
  return json{{"center", to_json(r.ellipsoid.center())},
              {"shape", to_json(r.ellipsoid.shape().matrix())},
              {"radius2", r.ellipsoid.radius2()},
              {"level", r.level},
              {"volume", m.volume},
              {"normalized_volume", m.normalized_volume}};
}

json to_json(const ConfidenceRegion& r, const std::optional<Matrix>& candidate) {
  const Ellipsoid e(r.center(), r.theta().matrix, r.radius2());
  const double volume = e.volume();
  json j{{"center", to_json(unvec(r.center(), r.theta().l, r.theta().d))},
         {"shape", to_json(r.theta().matrix.matrix())},
         {"radius2", r.radius2()},
         {"level", r.level()},
         {"volume", volume},
         {"normalized_volume", std::pow(volume, 1.0 / static_cast<double>(r.center().size()))}};
  if (candidate) {
    j["statistic"] = r.statistic(*candidate);
    j["contains"] = r.contains(*candidate);
  }
  return j;
}

json to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  return json{{"case", to_string(c.spec.id)},
              {"L", c.spec.l},
              {"D", c.spec.d},
              {"N", c.n},
              {"replications", c.replications},
              {"level", c.level},
              {"methods", methods},
              {"seed", c.spec.seed},
              {"target_snr", c.spec.target_snr}};
}

ExperimentConfig experiment_from_json(const json& j) {
  static const std::vector<std::string> known{"case", "L", "D", "N", "replications", "level", "methods", "seed", "target_snr"};
  if (!j.is_object()) throw ParseError("experiment config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ParseError("experiment config: unknown key \"" + key + "\"");

  ExperimentConfig c;
  const json& id = require(j, "case");
  if (!id.is_string()) throw ParseError("\"case\" must be a string");
  const auto parsed = parse_case(id.get<std::string>());
  if (!parsed) throw ParseError("unknown case \"" + id.get<std::string>() + "\"");
  c.spec.id = *parsed;
  c.spec.l = count_at(j, "L");
  c.spec.d = count_at(j, "D");
  c.n = count_at(j, "N");
  if (j.contains("replications")) c.replications = count_at(j, "replications");
  if (j.contains("level")) c.level = number_at(j, "level");
  if (j.contains("target_snr")) c.spec.target_snr = number_at(j, "target_snr");
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ParseError("\"seed\" must be a non-negative integer");
    c.spec.seed = s.get<std::uint64_t>();
  }
  if (j.contains("methods")) {
    const json& ms = j["methods"];
    if (!ms.is_array()) throw ParseError("\"methods\" must be an array");
    c.methods.clear();
    for (const auto& m : ms) {
      if (!m.is_string()) throw ParseError("\"methods\" entries must be strings");
      const auto method = parse_method(m.get<std::string>());
      if (!method) throw ParseError("unknown method \"" + m.get<std::string>() + "\"");
      c.methods.push_back(*method);
    }
  }
  c.validate();
  return c;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
  if (!out) throw ParseError("failed writing " + path.string());
}

}  // namespace invreg::io
