#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bmdl {

/// Writes `content` to a sibling temp file and renames it over `path`.
/// Throws DataError on any I/O failure; `path` is untouched in that case.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Whole-file read; throws DataError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace bmdl
