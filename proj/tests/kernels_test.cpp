#include <stdexcept>
#include <cstring>

#include "acdc/kernels.hpp"
#include "acdc/nn.hpp"
#include "acdc/rand.hpp"
#include "doctest.h"

using namespace acdc;

namespace {
Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = uniform_range(rng, -2.0, 2.0);
    return m;
}
Vector random_vector(std::size_t n, Rng& rng) {
    Vector v(n);
    for (double& x : v) x = uniform_range(rng, -2.0, 2.0);
    return v;
}
bool bits_equal(const Vector& a, const Vector& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * 8) == 0;
}
}  // namespace

TEST_CASE("affine basics") {
    Vector x{1.0, 2.0};

    Matrix zero(3, 2, 0.0);
    Vector b0(3, 0.0);
    CHECK(affine(zero, x, b0) == Vector{0.0, 0.0, 0.0});

    CHECK(affine(identity(2), x, Vector(2, 0.0)) == x);

    Matrix row(1, 2);
    row(0, 0) = 1.0;
    row(0, 1) = 1.0;
    CHECK(affine(row, x, Vector{0.5})[0] == doctest::Approx(3.5));
}

TEST_CASE("affine rejects mismatched dimensions") {
    Matrix w(3, 2);
    CHECK_THROWS_AS(affine(w, Vector(3, 0.0), Vector(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(affine(w, Vector(2, 0.0), Vector(2, 0.0)), std::invalid_argument);
}

TEST_CASE("matvec_t agrees with explicit transpose") {
    Rng rng(11);
    const Matrix w = random_matrix(7, 5, rng);
    const Vector x = random_vector(7, rng);

    Matrix wt(5, 7);
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t c = 0; c < 5; ++c) wt(c, r) = w(r, c);

    Vector a(5), b(5);
    kern::matvec_t(w, x, a);
    kern::serial::matvec(wt, x, b);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]));
}

TEST_CASE("omp kernels are bit-identical to the serial reference") {
    Rng rng(99);
    // spans both below and above the parallelization thresholds
    const std::size_t shapes[][2] = {{1, 1}, {3, 9}, {40, 17}, {64, 300}, {200, 200}, {300, 400}};

    for (const auto& s : shapes) {
        const Matrix w = random_matrix(s[0], s[1], rng);
        const Vector x = random_vector(s[1], rng);
        const Vector xt = random_vector(s[0], rng);
        const Vector b = random_vector(s[0], rng);
        const Vector bt = random_vector(s[1], rng);

        Vector y1(s[0]), y2(s[0]);
        kern::matvec(w, x, y1);
        kern::serial::matvec(w, x, y2);
        CHECK(bits_equal(y1, y2));

        kern::affine(w, x, b, y1);
        kern::serial::affine(w, x, b, y2);
        CHECK(bits_equal(y1, y2));

        Vector z1(s[1]), z2(s[1]);
        kern::matvec_t(w, xt, z1);
        kern::serial::matvec_t(w, xt, z2);
        CHECK(bits_equal(z1, z2));

        kern::affine_t(w, xt, bt, z1);
        kern::serial::affine_t(w, xt, bt, z2);
        CHECK(bits_equal(z1, z2));

        Matrix g1 = random_matrix(s[0], s[1], rng);
        Matrix g2 = g1;
        kern::add_outer(g1, xt, x);
        kern::serial::add_outer(g2, xt, x);
        CHECK(bits_equal(g1.data, g2.data));

        kern::sigmoid(x, z1);
        kern::serial::sigmoid(x, z2);
        CHECK(bits_equal(z1, z2));

        Vector p1 = x, p2 = x, v1 = bt, v2 = bt;
        kern::sgd_momentum(p1, z1, v1, 0.01, 0.95);
        kern::serial::sgd_momentum(p2, z2, v2, 0.01, 0.95);
        CHECK(bits_equal(p1, p2));
        CHECK(bits_equal(v1, v2));
    }
}

TEST_CASE("matrix surgery keeps layout compact") {
    Rng rng(5);
    Matrix m = random_matrix(3, 4, rng);
    const Matrix orig = m;

    Vector row{1, 2, 3, 4};
    append_row(m, row);
    CHECK(m.rows == 4);
    CHECK(m(3, 2) == 3.0);
    CHECK(m(1, 1) == orig(1, 1));

    append_col_zero(m);
    CHECK(m.cols == 5);
    CHECK(m(2, 4) == 0.0);
    CHECK(m(2, 3) == orig(2, 3));

    remove_col(m, 4);
    remove_row(m, 3);
    CHECK(m.rows == orig.rows);
    CHECK(m.cols == orig.cols);
    CHECK(bits_equal(m.data, orig.data));

    remove_row(m, 1);
    CHECK(m.rows == 2);
    CHECK(m(1, 0) == orig(2, 0));

    CHECK_THROWS_AS(remove_col(m, 99), std::invalid_argument);
}
