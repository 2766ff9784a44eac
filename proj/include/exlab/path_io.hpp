#pragma once

// Path serialization.
//
// CSV: '#'-prefixed metadata lines (seed, dt, kind), then "t,value" rows.
// Binary (little-endian): a 16-byte header
//     bytes 0-3   magic "XPTH"
//     bytes 4-7   format version (u32, currently 1)
//     bytes 8-15  dt (f64)
// followed by length (u64), seed (u64), kind (u64) and `length` f64 values.

#include "exlab/paths.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace exlab::io {

inline constexpr std::uint32_t kBinaryVersion = 1;

void write_csv(std::ostream& out, const SamplePath& path);
SamplePath read_csv(std::istream& in);

void write_binary(std::ostream& out, const SamplePath& path);
SamplePath read_binary(std::istream& in);

std::string to_json(const SamplePath& path);
SamplePath path_from_json(std::string_view text);

/// Writes `bytes` to a sibling temporary file and renames it over `target`,
/// so readers never observe a partially written file.
void atomic_write(const std::filesystem::path& target, std::string_view bytes);

}  // namespace exlab::io
