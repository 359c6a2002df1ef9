#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace acdc {

using Vector = std::vector<double>;

// Dense row-major matrix. Rows index output units, columns index inputs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool empty() const { return data.empty(); }
};

Matrix identity(std::size_t n);

// Structural surgery used by the evolving layers. All of these keep the
// row-major layout compact (no tombstones).
void append_row(Matrix& m, std::span<const double> row);
void remove_row(Matrix& m, std::size_t r);
void append_col(Matrix& m, std::span<const double> col);
void append_col_zero(Matrix& m);
void remove_col(Matrix& m, std::size_t c);

void require(bool cond, const char* what);

// FNV-1a over raw bytes; used for parameter fingerprints in the
// test-then-train contract checks.
std::uint64_t fnv1a(const void* bytes, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t hash_matrix(const Matrix& m, std::uint64_t seed);
std::uint64_t hash_vector(const Vector& v, std::uint64_t seed);

}  // namespace acdc
