#include "dynlr/image_io.hpp"

#include "dynlr/errors.hpp"
#include "dynlr/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynlr::io {

std::string encode_pgm16(const Vector& frame, std::size_t side, double range) {
    if (static_cast<std::size_t>(frame.size()) != side * side) {
        throw InvalidInput("encode_pgm16: frame length is not side^2");
    }
    if (!(range > 0.0)) {
        throw InvalidParameter("encode_pgm16: range must be positive");
    }
    std::string out = "P5\n" + std::to_string(side) + " " + std::to_string(side) + "\n65535\n";
    out.reserve(out.size() + 2 * side * side);
    for (Eigen::Index i = 0; i < frame.size(); ++i) {
        const double scaled = std::clamp(frame[i] / range, 0.0, 1.0) * 65535.0;
        const auto v = static_cast<unsigned>(std::lround(scaled));
        out.push_back(static_cast<char>((v >> 8) & 0xffu));
        out.push_back(static_cast<char>(v & 0xffu));
    }
    return out;
}

void save_pgm16(const std::filesystem::path& path, const Vector& frame, std::size_t side, double range) {
    write_file_atomic(path, encode_pgm16(frame, side, range));
}

Vector decode_pgm16(const std::string& bytes, std::size_t& side) {
    std::istringstream is(bytes);
    std::string magic;
    std::size_t w = 0;
    std::size_t h = 0;
    unsigned maxval = 0;
    is >> magic >> w >> h >> maxval;
    if (magic != "P5" || w != h || maxval != 65535) {
        throw InvalidInput("decode_pgm16: unsupported header");
    }
    is.get();
    const auto offset = static_cast<std::size_t>(is.tellg());
    if (bytes.size() < offset + 2 * w * h) {
        throw InvalidInput("decode_pgm16: truncated data");
    }
    side = w;
    Vector out(static_cast<Eigen::Index>(w * h));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const auto hi = static_cast<unsigned char>(bytes[offset + 2 * static_cast<std::size_t>(i)]);
        const auto lo = static_cast<unsigned char>(bytes[offset + 2 * static_cast<std::size_t>(i) + 1]);
        out[i] = static_cast<double>((static_cast<unsigned>(hi) << 8) | lo);
    }
    return out;
}

std::string frame_suffix(std::size_t index, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(4, std::to_string(total).size());
    std::string s = std::to_string(index);
    return std::string(width - std::min(width, s.size()), '0') + s;
}

void save_frame_stack(const std::filesystem::path& dir, const std::string& prefix, const Matrix& frames,
                      std::size_t side, double range) {
    for (Eigen::Index t = 0; t < frames.cols(); ++t) {
        const auto name = prefix + "_" + frame_suffix(static_cast<std::size_t>(t) + 1,
                                                      static_cast<std::size_t>(frames.cols())) + ".pgm";
        save_pgm16(dir / name, frames.col(t), side, range);
    }
}

}  // namespace dynlr::io
