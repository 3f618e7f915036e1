#pragma once

#include "dynlr/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dynlr::io {

// CSV: one matrix row per line, comma separated, '.' radix, no header.
void write_csv(std::ostream& os, const Matrix& m);
Matrix read_csv(std::istream& is);
void save_csv(const std::filesystem::path& path, const Matrix& m);
Matrix load_csv(const std::filesystem::path& path);

// DLR1 binary layout (all little-endian):
//   bytes 0..3   magic "DLR1"
//   u64          rows
//   u64          cols
//   f64 * rows*cols, row-major
void write_dlr1(std::ostream& os, const Matrix& m);
Matrix read_dlr1(std::istream& is);
void save_dlr1(const std::filesystem::path& path, const Matrix& m);
Matrix load_dlr1(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Round-trippable decimal text for a double ("%.17g").
std::string format_double(double v);

}  // namespace dynlr::io
