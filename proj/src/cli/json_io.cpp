#include "json_io.hpp"

#include <charconv>
#include <cmath>

namespace kfbound::cli {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j[i];
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.empty()) throw ConfigError(row_path, "expected a non-empty array");
    if (i == 0) cols = row.size();
    if (row.size() != cols) {
      throw ConfigError(row_path, "expected " + std::to_string(cols) + " entries, got " +
                                      std::to_string(row.size()));
    }
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      const auto& x = j[i][k];
      const std::string at = path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      if (!x.is_number()) throw ConfigError(at, "expected a number");
      const double v = x.get<double>();
      if (!std::isfinite(v)) throw ConfigError(at, "expected a finite number");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_number()) throw ConfigError(at, "expected a number");
    const double x = j[i].get<double>();
    if (!std::isfinite(x)) throw ConfigError(at, "expected a finite number");
    v(static_cast<Eigen::Index>(i)) = x;
  }
  return v;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace kfbound::cli
