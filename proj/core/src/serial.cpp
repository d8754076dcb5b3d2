#include "xga/serial.hpp"

#include <fstream>

namespace xga {

Json matrix_to_json(const Mat& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

Mat matrix_from_json(const Json& j) {
  require(j.is_object() && j.contains("rows") && j.contains("cols") &&
              j.contains("data"),
          "matrix json must have rows/cols/data");
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  require(data.is_array() &&
              static_cast<Index>(data.size()) == rows * cols,
          "matrix json data size mismatch");
  Mat m(rows, cols);
  std::size_t k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  return m;
}

Json vector_to_json(const Vec& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Vec vector_from_json(const Json& j) {
  require(j.is_array(), "vector json must be an array");
  Vec v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i)
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed: " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid json in " + path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace xga
