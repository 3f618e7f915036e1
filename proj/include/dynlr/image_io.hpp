#pragma once

#include "dynlr/linalg.hpp"

#include <cstddef>
#include <filesystem>
#include <string>

namespace dynlr::io {

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples). The frame is a
/// row-major vectorised side x side image; values are mapped from
/// [0, range] to [0, 65535] and clipped.
std::string encode_pgm16(const Vector& frame, std::size_t side, double range);
void save_pgm16(const std::filesystem::path& path, const Vector& frame, std::size_t side, double range);

/// Reads back a P5 16-bit image as raw sample values in [0, 65535].
Vector decode_pgm16(const std::string& bytes, std::size_t& side);

/// One file per column: `<prefix>_0001.pgm` ... with at least four digits.
void save_frame_stack(const std::filesystem::path& dir, const std::string& prefix, const Matrix& frames,
                      std::size_t side, double range);

std::string frame_suffix(std::size_t index, std::size_t total);

}  // namespace dynlr::io
