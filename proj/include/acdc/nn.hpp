#pragma once

#include <span>

#include "acdc/kernels.hpp"
#include "acdc/linalg.hpp"
#include "acdc/rand.hpp"

namespace acdc {

Vector affine(const Matrix& w, const Vector& x, const Vector& b);
Vector sigmoid(const Vector& x);
double sigmoid_scalar(double x);
Vector softmax(const Vector& z);

enum class LossKind { Mse, BinaryLog, MulticlassLog };

// Loss value plus the gradient with respect to the output unit's
// pre-activation: mse assumes a logistic output, binary-log a logistic
// output, multiclass-log a softmax output.
struct LossResult {
    double value = 0.0;
    Vector grad_preact;
};

// mean over dims of (pred - target)^2; grad folds in the logistic derivative
LossResult mse_loss(const Vector& pred, const Vector& target);
// -[t ln p + (1-t) ln(1-p)] summed over dims; grad = p - t
LossResult binary_log_loss(const Vector& pred, const Vector& target);
// -sum_k t_k ln p_k; grad = p - t
LossResult multiclass_log_loss(const Vector& pred, const Vector& target);
LossResult loss_eval(LossKind kind, const Vector& pred, const Vector& target);

// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
double xavier_bound(std::size_t fan_in, std::size_t fan_out);
Matrix xavier_sample(std::size_t fan_in, std::size_t fan_out, Rng& rng);
double xavier_scalar(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// v <- momentum*v - lr*g; p <- p + v
void sgd_momentum_step(Vector& p, const Vector& g, Vector& v, double lr, double momentum);
void sgd_momentum_step(Matrix& p, const Matrix& g, Matrix& v, double lr, double momentum);

}  // namespace acdc
