#pragma once

#include <string>

#include <json.hpp>

#include "sysid/linalg.hpp"

namespace sysid {

/// {"rows": r, "cols": c, "data": [row-major doubles]}
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j, const std::string& field);

}  // namespace sysid
