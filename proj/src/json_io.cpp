#include "sysid/json_io.hpp"

#include <stdexcept>

namespace sysid {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw std::invalid_argument(field + ": expected {rows, cols, data}");
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<long>(data.size()) != rows * cols)
    throw std::invalid_argument(field + ": data length does not match rows*cols");
  Matrix m(rows, cols);
  long at = 0;
  for (long i = 0; i < rows; ++i)
    for (long jj = 0; jj < cols; ++jj) m(i, jj) = data.at(at++).get<double>();
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw std::invalid_argument(field + ": expected an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<long>(i)] = j.at(i).get<double>();
  return v;
}

}  // namespace sysid
