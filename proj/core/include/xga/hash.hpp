#pragma once

#include <string>

namespace xga {

/// Hex digest of SHA-1("blob <size>\0" + content), matching `git hash-object`.
std::string git_blob_sha1(const std::string& content);

std::string git_blob_sha1_file(const std::string& path);

}  // namespace xga
