#pragma once

#include "mtlasso/types.hpp"

#include <filesystem>
#include <string>

namespace mtlasso::io {

// CSV: headerless, comma-separated, one matrix row per line.
// JSON: {"rows": n, "cols": m, "data": [row-major flat array]}.
// Both writers print doubles in shortest round-trip form, so reading back
// reproduces every bit.

Matrix parse_csv(const std::string& text);
std::string to_csv(const Matrix& m);

Matrix parse_json(const std::string& text);
std::string to_json(const Matrix& m);

/// Reads a matrix, choosing the format from the extension (.json, else CSV).
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace mtlasso::io
