#include "acdc/linalg.hpp"

#include <cstring>
#include <stdexcept>

namespace acdc {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

Matrix identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void append_row(Matrix& m, std::span<const double> row) {
    if (m.rows == 0 && m.cols == 0) m.cols = row.size();
    require(row.size() == m.cols, "append_row: width mismatch");
    m.data.insert(m.data.end(), row.begin(), row.end());
    ++m.rows;
}

void remove_row(Matrix& m, std::size_t r) {
    require(r < m.rows, "remove_row: index out of range");
    auto first = m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols);
    m.data.erase(first, first + static_cast<std::ptrdiff_t>(m.cols));
    --m.rows;
}

void append_col(Matrix& m, std::span<const double> col) {
    require(col.size() == m.rows, "append_col: height mismatch");
    std::vector<double> out((m.cols + 1) * m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        std::memcpy(out.data() + r * (m.cols + 1), m.data.data() + r * m.cols, m.cols * sizeof(double));
        out[r * (m.cols + 1) + m.cols] = col[r];
    }
    m.data = std::move(out);
    ++m.cols;
}

void append_col_zero(Matrix& m) {
    std::vector<double> zeros(m.rows, 0.0);
    append_col(m, zeros);
}

void remove_col(Matrix& m, std::size_t c) {
    require(c < m.cols, "remove_col: index out of range");
    std::vector<double> out((m.cols - 1) * m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* src = m.data.data() + r * m.cols;
        double* dst = out.data() + r * (m.cols - 1);
        std::memcpy(dst, src, c * sizeof(double));
        std::memcpy(dst + c, src + c + 1, (m.cols - 1 - c) * sizeof(double));
    }
    m.data = std::move(out);
    --m.cols;
}

std::uint64_t fnv1a(const void* bytes, std::size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t hash_matrix(const Matrix& m, std::uint64_t seed) {
    std::uint64_t h = fnv1a(&m.rows, sizeof(m.rows), seed);
    h = fnv1a(&m.cols, sizeof(m.cols), h);
    return fnv1a(m.data.data(), m.data.size() * sizeof(double), h);
}

std::uint64_t hash_vector(const Vector& v, std::uint64_t seed) {
    std::size_t n = v.size();
    std::uint64_t h = fnv1a(&n, sizeof(n), seed);
    return fnv1a(v.data(), v.size() * sizeof(double), h);
}

}  // namespace acdc
