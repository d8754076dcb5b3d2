#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "xga/common.hpp"

namespace xga {

using Json = nlohmann::json;

/// Matrices are serialized as {"rows": r, "cols": c, "data": [...]} with the
/// data flattened row-major; vectors as plain arrays. All floats are float64.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

Json vector_to_json(const Vec& v);
Vec vector_from_json(const Json& j);

/// Writes `j.dump(2)` plus a trailing newline; output is byte-stable for
/// equal documents.
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

}  // namespace xga
