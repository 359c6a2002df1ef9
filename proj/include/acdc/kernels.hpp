#pragma once

#include <span>

#include "acdc/linalg.hpp"

// Dense kernels behind every forward/backward pass. Each output element is
// produced by exactly one thread with a serial inner reduction, so results
// are bit-identical to the serial reference for any thread count. The
// kern::serial namespace keeps the plain loops; tests assert bitwise
// equality and bench/ compares throughput.
namespace acdc::kern {

// y = W x
void matvec(const Matrix& w, std::span<const double> x, std::span<double> y);
// y = W x + b
void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y);
// y = W^T x
void matvec_t(const Matrix& w, std::span<const double> x, std::span<double> y);
// y = W^T x + b
void affine_t(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y);
// g += a b^T
void add_outer(Matrix& g, std::span<const double> a, std::span<const double> b);
// elementwise logistic
void sigmoid(std::span<const double> x, std::span<double> y);
// v = momentum * v - lr * g;  p += v
void sgd_momentum(std::span<double> p, std::span<const double> g, std::span<double> v,
                  double lr, double momentum);

namespace serial {
void matvec(const Matrix& w, std::span<const double> x, std::span<double> y);
void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y);
void matvec_t(const Matrix& w, std::span<const double> x, std::span<double> y);
void affine_t(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y);
void add_outer(Matrix& g, std::span<const double> a, std::span<const double> b);
void sigmoid(std::span<const double> x, std::span<double> y);
void sgd_momentum(std::span<double> p, std::span<const double> g, std::span<double> v,
                  double lr, double momentum);
}  // namespace serial

}  // namespace acdc::kern
