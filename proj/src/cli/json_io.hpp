#ifndef KFBOUND_SRC_CLI_JSON_IO_HPP
#define KFBOUND_SRC_CLI_JSON_IO_HPP

#include <string>

#include "json.hpp"
#include "kfbound/cli/config.hpp"
#include "kfbound/linalg.hpp"

namespace kfbound::cli {

using json = nlohmann::json;

/// Row-major nested arrays.
json matrix_to_json(const Matrix& m);
json vector_to_json(const Vector& v);

/// Throw ConfigError(path, ...) unless `j` is a non-empty rectangular array
/// of arrays of finite numbers.
Matrix matrix_from_json(const json& j, const std::string& path);
Vector vector_from_json(const json& j, const std::string& path);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

}  // namespace kfbound::cli

#endif  // KFBOUND_SRC_CLI_JSON_IO_HPP
