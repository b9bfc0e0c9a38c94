#pragma once

#include <string>

#include "json.hpp"

#include "apq/types.hpp"

namespace apq {

// Plain JSON schema for matrix exchange:
//   {"rows": n, "cols": m, "re": [[...]], "im": [[...]]}
// with re/im nested row-major lists of doubles.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// Atomically write `content` to `path` (temp file in the same directory,
// then rename), so interrupted runs never leave partial artifacts.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Shortest-round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

} // namespace apq
