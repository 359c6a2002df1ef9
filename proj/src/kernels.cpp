#include "acdc/kernels.hpp"

#include <cmath>
#include <cstdint>

namespace acdc::kern {

namespace {
// Below these sizes the omp fork/join overhead dominates; the if() clause
// keeps tiny layers on the calling thread.
constexpr std::size_t kMinRows = 32;
constexpr std::size_t kMinWork = 16384;
constexpr std::size_t kMinElems = 8192;

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline void check_mv(const Matrix& w, std::size_t xn, std::size_t yn) {
    require(w.cols == xn, "matvec: input dimension mismatch");
    require(w.rows == yn, "matvec: output dimension mismatch");
}

inline void check_mvt(const Matrix& w, std::size_t xn, std::size_t yn) {
    require(w.rows == xn, "matvec_t: input dimension mismatch");
    require(w.cols == yn, "matvec_t: output dimension mismatch");
}
}  // namespace

namespace serial {

void matvec(const Matrix& w, std::span<const double> x, std::span<double> y) {
    check_mv(w, x.size(), y.size());
    for (std::size_t r = 0; r < w.rows; ++r)
        y[r] = dot(w.data.data() + r * w.cols, x.data(), w.cols);
}

void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y) {
    check_mv(w, x.size(), y.size());
    require(b.size() == y.size(), "affine: bias dimension mismatch");
    for (std::size_t r = 0; r < w.rows; ++r)
        y[r] = dot(w.data.data() + r * w.cols, x.data(), w.cols) + b[r];
}

void matvec_t(const Matrix& w, std::span<const double> x, std::span<double> y) {
    check_mvt(w, x.size(), y.size());
    for (std::size_t c = 0; c < w.cols; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < w.rows; ++r) s += w.data[r * w.cols + c] * x[r];
        y[c] = s;
    }
}

void affine_t(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y) {
    check_mvt(w, x.size(), y.size());
    require(b.size() == y.size(), "affine_t: bias dimension mismatch");
    for (std::size_t c = 0; c < w.cols; ++c) {
        double s = b[c];
        for (std::size_t r = 0; r < w.rows; ++r) s += w.data[r * w.cols + c] * x[r];
        y[c] = s;
    }
}

void add_outer(Matrix& g, std::span<const double> a, std::span<const double> b) {
    require(g.rows == a.size() && g.cols == b.size(), "add_outer: shape mismatch");
    for (std::size_t r = 0; r < g.rows; ++r) {
        double* row = g.data.data() + r * g.cols;
        const double ar = a[r];
        for (std::size_t c = 0; c < g.cols; ++c) row[c] += ar * b[c];
    }
}

void sigmoid(std::span<const double> x, std::span<double> y) {
    require(x.size() == y.size(), "sigmoid: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void sgd_momentum(std::span<double> p, std::span<const double> g, std::span<double> v,
                  double lr, double momentum) {
    require(p.size() == g.size() && p.size() == v.size(), "sgd_momentum: size mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        p[i] += v[i];
    }
}

}  // namespace serial

void matvec(const Matrix& w, std::span<const double> x, std::span<double> y) {
    check_mv(w, x.size(), y.size());
    const std::int64_t rows = static_cast<std::int64_t>(w.rows);
    const bool par = w.rows >= kMinRows && w.rows * w.cols >= kMinWork;
#pragma omp parallel for if (par) schedule(static)
    for (std::int64_t r = 0; r < rows; ++r)
        y[static_cast<std::size_t>(r)] =
            dot(w.data.data() + static_cast<std::size_t>(r) * w.cols, x.data(), w.cols);
}

void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y) {
    check_mv(w, x.size(), y.size());
    require(b.size() == y.size(), "affine: bias dimension mismatch");
    const std::int64_t rows = static_cast<std::int64_t>(w.rows);
    const bool par = w.rows >= kMinRows && w.rows * w.cols >= kMinWork;
#pragma omp parallel for if (par) schedule(static)
    for (std::int64_t r = 0; r < rows; ++r)
        y[static_cast<std::size_t>(r)] =
            dot(w.data.data() + static_cast<std::size_t>(r) * w.cols, x.data(), w.cols) +
            b[static_cast<std::size_t>(r)];
}

void matvec_t(const Matrix& w, std::span<const double> x, std::span<double> y) {
    check_mvt(w, x.size(), y.size());
    const std::int64_t cols = static_cast<std::int64_t>(w.cols);
    const bool par = w.cols >= kMinRows && w.rows * w.cols >= kMinWork;
#pragma omp parallel for if (par) schedule(static)
    for (std::int64_t c = 0; c < cols; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < w.rows; ++r)
            s += w.data[r * w.cols + static_cast<std::size_t>(c)] * x[r];
        y[static_cast<std::size_t>(c)] = s;
    }
}

void affine_t(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y) {
    check_mvt(w, x.size(), y.size());
    require(b.size() == y.size(), "affine_t: bias dimension mismatch");
    const std::int64_t cols = static_cast<std::int64_t>(w.cols);
    const bool par = w.cols >= kMinRows && w.rows * w.cols >= kMinWork;
#pragma omp parallel for if (par) schedule(static)
    for (std::int64_t c = 0; c < cols; ++c) {
        double s = b[static_cast<std::size_t>(c)];
        for (std::size_t r = 0; r < w.rows; ++r)
            s += w.data[r * w.cols + static_cast<std::size_t>(c)] * x[r];
        y[static_cast<std::size_t>(c)] = s;
    }
}

void add_outer(Matrix& g, std::span<const double> a, std::span<const double> b) {
    require(g.rows == a.size() && g.cols == b.size(), "add_outer: shape mismatch");
    const std::int64_t rows = static_cast<std::int64_t>(g.rows);
    const bool par = g.rows >= kMinRows && g.rows * g.cols >= kMinWork;
#pragma omp parallel for if (par) schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
        double* row = g.data.data() + static_cast<std::size_t>(r) * g.cols;
        const double ar = a[static_cast<std::size_t>(r)];
        for (std::size_t c = 0; c < g.cols; ++c) row[c] += ar * b[c];
    }
}

void sigmoid(std::span<const double> x, std::span<double> y) {
    require(x.size() == y.size(), "sigmoid: size mismatch");
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const bool par = x.size() >= kMinElems;
#pragma omp parallel for if (par) schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        y[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-x[static_cast<std::size_t>(i)]));
}

void sgd_momentum(std::span<double> p, std::span<const double> g, std::span<double> v,
                  double lr, double momentum) {
    require(p.size() == g.size() && p.size() == v.size(), "sgd_momentum: size mismatch");
    const std::int64_t n = static_cast<std::int64_t>(p.size());
    const bool par = p.size() >= kMinElems;
#pragma omp parallel for if (par) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        v[k] = momentum * v[k] - lr * g[k];
        p[k] += v[k];
    }
}

}  // namespace acdc::kern
