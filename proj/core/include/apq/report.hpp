#pragma once

// Artifact plumbing: stable content hashing for config provenance and
// atomic file emission (temp + rename), so interrupted runs never leave a
// partial artifact at the target path.

#include <string>

namespace apq {

// 64-bit FNV-1a over the raw bytes, rendered as 16 lowercase hex digits.
// Used to stamp summaries with a hash of the exact config text.
std::string fnv1a_hex(const std::string& bytes);

// Writes content to path atomically: the bytes land in a sibling temp file
// which is then renamed over the target.  Parent directories are created.
// Throws std::runtime_error when the filesystem refuses.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace apq
