#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "linkcorr/gaussian.hpp"

namespace linkcorr {

// CSV layout: first line holds n, then n rows of n comma-separated values.
// Values are printed with 17 significant digits so a round trip is bit-exact.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// JSON layout: {"n": n, "data": [row-major values]}.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json gaussian_to_json(const GaussianParams& p);
GaussianParams gaussian_from_json(const nlohmann::json& j);

/// %.17g
std::string format_double(double x);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace linkcorr
