#include "linkcorr/matrix_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "linkcorr/errors.hpp"

namespace linkcorr {

namespace {

double parse_double(const std::string& token) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == begin || (end && *end != '\0')) throw FormatError("not a number: '" + token + "'");
    return v;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("CSV matrix format requires a square matrix");
    out << m.rows() << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("matrix CSV: missing header");
    long n = 0;
    try {
        n = std::stol(line);
    } catch (const std::exception&) {
        throw FormatError("matrix CSV: header must hold the dimension n");
    }
    if (n < 0) throw FormatError("matrix CSV: negative dimension");
    Matrix m(n, n);
    for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw FormatError("matrix CSV: expected " + std::to_string(n) + " rows");
        std::stringstream ss(line);
        std::string cell;
        long j = 0;
        while (std::getline(ss, cell, ',')) {
            if (j >= n) throw FormatError("matrix CSV: row " + std::to_string(i + 1) + " is too long");
            m(i, j++) = parse_double(cell);
        }
        if (j != n) throw FormatError("matrix CSV: row " + std::to_string(i + 1) + " is too short");
    }
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_matrix_csv(out, m);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_matrix_csv(in);
}

nlohmann::json matrix_to_json(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("JSON matrix format requires a square matrix");
    nlohmann::json data = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"n", m.rows()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const auto n = j.at("n").get<long>();
    const auto& data = j.at("data");
    if (n < 0 || !data.is_array() || static_cast<long>(data.size()) != n * n)
        throw FormatError("matrix JSON: data must hold n*n values");
    Matrix m(n, n);
    for (long i = 0; i < n; ++i)
        for (long k = 0; k < n; ++k) m(i, k) = data[static_cast<std::size_t>(i * n + k)].get<double>();
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw FormatError("expected a JSON array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

nlohmann::json gaussian_to_json(const GaussianParams& p) {
    return {{"mean", vector_to_json(p.mean)}, {"cov", matrix_to_json(p.cov)}};
}

GaussianParams gaussian_from_json(const nlohmann::json& j) {
    return {vector_from_json(j.at("mean")), matrix_from_json(j.at("cov"))};
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace linkcorr
