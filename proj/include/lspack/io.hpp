#pragma once
//
// Matrix Market (coordinate, real/integer, general/symmetric) and the
// "LSPDENSE" binary container for dense matrices:
//
//   bytes 0..7   magic "LSPDENSE"
//   u64          n (rows), little-endian
//   u64          d (cols), little-endian
//   f64[n*d]     row-major values, little-endian
//

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace lspack {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

namespace detail {

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline const char * skip_space(const char * p, const char * end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r'))
        ++p;
    return p;
}

template <typename T>
const char * parse_number(const char * p, const char * end, T & out, const std::string & what, std::size_t line_no) {
    p             = skip_space(p, end);
    auto [ptr, ec] = std::from_chars(p, end, out);
    if (ec != std::errc())
        throw format_error("line " + std::to_string(line_no) + ": cannot parse " + what);
    return ptr;
}

} // namespace detail

inline SparseMatrix read_matrix_market(std::istream & in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line))
        throw format_error("empty Matrix Market stream");

    std::istringstream header(line);
    std::string        banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket")
        throw format_error("missing %%MatrixMarket banner");
    object   = detail::lowercase(object);
    format   = detail::lowercase(format);
    field    = detail::lowercase(field);
    symmetry = detail::lowercase(symmetry);
    if (object != "matrix")
        throw format_error("unsupported Matrix Market object '" + object + "'");
    if (format != "coordinate")
        throw format_error("unsupported Matrix Market format '" + format + "' (only coordinate)");
    if (field == "complex" || field == "pattern")
        throw format_error("unsupported Matrix Market field '" + field + "' (only real/integer)");
    if (field != "real" && field != "integer" && field != "double")
        throw format_error("unknown Matrix Market field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw format_error("unsupported Matrix Market symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    // size line
    do {
        if (!std::getline(in, line))
            throw format_error("missing size line");
        ++line_no;
    } while (line.empty() || line[0] == '%');

    index_t     rows = 0, cols = 0, entries = 0;
    const char *p   = line.data(), *end = line.data() + line.size();
    p = detail::parse_number(p, end, rows, "row count", line_no);
    p = detail::parse_number(p, end, cols, "column count", line_no);
    detail::parse_number(p, end, entries, "entry count", line_no);
    if (rows < 0 || cols < 0 || entries < 0)
        throw format_error("negative sizes in size line");
    if (symmetric && rows != cols)
        throw format_error("symmetric matrix must be square");

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
    index_t read = 0;
    while (read < entries && std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%')
            continue;
        p   = line.data();
        end = line.data() + line.size();
        index_t i = 0, j = 0;
        double  v = 0.0;
        p = detail::parse_number(p, end, i, "row index", line_no);
        p = detail::parse_number(p, end, j, "column index", line_no);
        detail::parse_number(p, end, v, "value", line_no);
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw format_error("line " + std::to_string(line_no) + ": index (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") out of bounds");
        triplets.push_back({i - 1, j - 1, v});
        if (symmetric && i != j)
            triplets.push_back({j - 1, i - 1, v});
        ++read;
    }
    if (read != entries)
        throw format_error("expected " + std::to_string(entries) + " entries, found " + std::to_string(read));
    return SparseMatrix::from_triplets(rows, cols, std::move(triplets));
}

inline SparseMatrix read_matrix_market(const std::filesystem::path & path) {
    std::ifstream in(path);
    if (!in)
        throw format_error("cannot open " + path.string());
    return read_matrix_market(in);
}

// Values written with 17 significant digits, so reading back is exact.
inline void write_matrix_market(const SparseMatrix & A, std::ostream & out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
    std::array<char, 64> buf{};
    for (index_t i = 0; i < A.rows(); ++i) {
        const auto r = A.row(i);
        for (std::size_t p = 0; p < r.size(); ++p) {
            const int len = std::snprintf(buf.data(), buf.size(), "%lld %d %.17g\n",
                                          static_cast<long long>(i + 1), r.cols[p] + 1, r.vals[p]);
            out.write(buf.data(), len);
        }
    }
}

inline void write_matrix_market(const SparseMatrix & A, const std::filesystem::path & path) {
    std::ofstream out(path);
    if (!out)
        throw format_error("cannot write " + path.string());
    write_matrix_market(A, out);
    if (!out)
        throw format_error("write failed for " + path.string());
}

inline constexpr std::array<char, 8> dense_magic = {'L', 'S', 'P', 'D', 'E', 'N', 'S', 'E'};

inline void write_dense_binary(const DenseMatrix & M, const std::filesystem::path & path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw format_error("cannot write " + path.string());
    const std::uint64_t n = static_cast<std::uint64_t>(M.rows()), d = static_cast<std::uint64_t>(M.cols());
    out.write(dense_magic.data(), dense_magic.size());
    out.write(reinterpret_cast<const char *>(&n), sizeof n);
    out.write(reinterpret_cast<const char *>(&d), sizeof d);
    out.write(reinterpret_cast<const char *>(M.data()), static_cast<std::streamsize>(n * d * sizeof(double)));
    if (!out)
        throw format_error("write failed for " + path.string());
}

inline DenseMatrix read_dense_binary(const std::filesystem::path & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw format_error("cannot open " + path.string());
    std::array<char, 8> magic{};
    std::uint64_t       n = 0, d = 0;
    in.read(magic.data(), magic.size());
    in.read(reinterpret_cast<char *>(&n), sizeof n);
    in.read(reinterpret_cast<char *>(&d), sizeof d);
    if (!in || magic != dense_magic)
        throw format_error(path.string() + ": not an LSPDENSE file");
    const auto expected = std::filesystem::file_size(path);
    if (expected != 24 + n * d * sizeof(double))
        throw format_error(path.string() + ": size does not match header " + std::to_string(n) + "x" + std::to_string(d));
    DenseMatrix M(static_cast<index_t>(n), static_cast<index_t>(d));
    in.read(reinterpret_cast<char *>(M.data()), static_cast<std::streamsize>(n * d * sizeof(double)));
    if (!in)
        throw format_error(path.string() + ": truncated data");
    return M;
}

// Dispatch on content: LSPDENSE magic or Matrix Market text.
inline bool is_dense_binary(const std::filesystem::path & path) {
    std::ifstream       in(path, std::ios::binary);
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    return in && magic == dense_magic;
}

inline SparseMatrix read_matrix(const std::filesystem::path & path) {
    if (is_dense_binary(path))
        return SparseMatrix::from_dense(read_dense_binary(path));
    return read_matrix_market(path);
}

} // namespace lspack
