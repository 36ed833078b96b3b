#pragma once
// CSV datasets and JSON documents for parameters, fits, regions and
// experiment configurations.

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "invreg/estimation.hpp"
#include "invreg/inference.hpp"
#include "invreg/model.hpp"
#include "invreg/simulation.hpp"

namespace invreg::io {

enum class Header { autodetect, present, absent };

// Comma-separated, '.' decimal, rows are observations. With autodetect a first
// row holding any non-numeric field is treated as a header.
Matrix parse_csv(std::string_view text, Header header = Header::autodetect, std::string_view source = "csv");
Matrix read_csv(const std::filesystem::path& path, Header header = Header::autodetect);
std::string format_csv(const Matrix& m);

// Row-major nested arrays; numbers are written with 17 significant digits.
nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j, std::string_view key);
Vector vector_from_json(const nlohmann::json& j, std::string_view key);

nlohmann::json to_json(const InverseParams& p);
nlohmann::json to_json(const ForwardParams& f);
nlohmann::json to_json(const FitResult& fit);
InverseParams inverse_params_from_json(const nlohmann::json& j);
ForwardParams forward_params_from_json(const nlohmann::json& j);
FitResult fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PredictionRegion& r);
// With a candidate the document also carries its statistic and membership.
nlohmann::json to_json(const ConfidenceRegion& r, const std::optional<Matrix>& candidate = std::nullopt);

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

// Parses the whole file; ParseError on malformed input.
nlohmann::json read_json(const std::filesystem::path& path);
// Indented with two spaces and terminated by a newline.
std::string dump(const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace invreg::io
