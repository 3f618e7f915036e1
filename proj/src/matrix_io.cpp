#include "dynlr/matrix_io.hpp"

#include "dynlr/errors.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace dynlr::io {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    }
    os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    if (!is) {
        throw InvalidInput("DLR1: truncated stream");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

void write_csv(std::ostream& os, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                os << ',';
            }
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

Matrix read_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            const std::string field = trim(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            double v = 0.0;
            const auto* begin = field.data();
            const auto* end = field.data() + field.size();
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (field.empty() || ec != std::errc{} || ptr != end) {
                throw InvalidInput("CSV: cannot parse field '" + field + "'");
            }
            row.push_back(v);
            if (comma == std::string::npos) {
                break;
            }
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InvalidInput("CSV: ragged rows");
        }
        rows.push_back(std::move(row));
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

void save_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ostringstream os;
    write_csv(os, m);
    write_file_atomic(path, os.str());
}

Matrix load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw InvalidInput("cannot open " + path.string());
    }
    return read_csv(is);
}

void write_dlr1(std::ostream& os, const Matrix& m) {
    os.write("DLR1", 4);
    put_u64(os, static_cast<std::uint64_t>(m.rows()));
    put_u64(os, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            put_u64(os, std::bit_cast<std::uint64_t>(m(i, j)));
        }
    }
}

Matrix read_dlr1(std::istream& is) {
    std::array<char, 4> magic{};
    is.read(magic.data(), 4);
    if (!is || std::memcmp(magic.data(), "DLR1", 4) != 0) {
        throw InvalidInput("DLR1: bad magic");
    }
    const std::uint64_t rows = get_u64(is);
    const std::uint64_t cols = get_u64(is);
    if (rows > (1ull << 31) || cols > (1ull << 31)) {
        throw InvalidInput("DLR1: implausible dimensions");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = std::bit_cast<double>(get_u64(is));
        }
    }
    return m;
}

void save_dlr1(const std::filesystem::path& path, const Matrix& m) {
    std::ostringstream os(std::ios::binary);
    write_dlr1(os, m);
    write_file_atomic(path, os.str());
}

Matrix load_dlr1(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw InvalidInput("cannot open " + path.string());
    }
    return read_dlr1(is);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw InvalidInput("cannot write " + tmp.string());
        }
        os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!os) {
            throw InvalidInput("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace dynlr::io
