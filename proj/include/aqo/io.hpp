#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aqo {

// Writes via a temporary file in the same directory followed by a rename,
// so readers never observe a half-written artifact.
void atomic_write_file(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

// FNV-1a over raw bytes; used for host-independent artifact digests.
uint64_t fnv1a64_bytes(const std::string& bytes);

// Digest of a list of (name, content) pairs, order-sensitive. Formatted as
// "fnv1a64:<16 hex digits>".
std::string digest_files(const std::vector<std::pair<std::string, std::string>>& files);

// Shortest round-trip decimal formatting, identical across platforms.
std::string format_double(double v);

}  // namespace aqo
