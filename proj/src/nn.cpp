#include "acdc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acdc {

namespace {
constexpr double kProbEps = 1e-12;

double clamp_prob(double p, const char* who) {
    if (p < -1e-9 || p > 1.0 + 1e-9)
        throw std::domain_error(std::string(who) + ": value is not a probability");
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}
}  // namespace

Vector affine(const Matrix& w, const Vector& x, const Vector& b) {
    Vector y(w.rows);
    kern::affine(w, x, b, y);
    return y;
}

Vector sigmoid(const Vector& x) {
    Vector y(x.size());
    kern::sigmoid(x, y);
    return y;
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector softmax(const Vector& z) {
    require(!z.empty(), "softmax: empty input");
    const double zmax = *std::max_element(z.begin(), z.end());
    Vector y(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        y[i] = std::exp(z[i] - zmax);
        sum += y[i];
    }
    for (double& v : y) v /= sum;
    return y;
}

LossResult mse_loss(const Vector& pred, const Vector& target) {
    require(pred.size() == target.size(), "mse_loss: dimension mismatch");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    LossResult r;
    r.grad_preact.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        r.value += d * d * inv_n;
        r.grad_preact[i] = 2.0 * inv_n * d * pred[i] * (1.0 - pred[i]);
    }
    return r;
}

LossResult binary_log_loss(const Vector& pred, const Vector& target) {
    require(pred.size() == target.size(), "binary_log_loss: dimension mismatch");
    LossResult r;
    r.grad_preact.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = clamp_prob(pred[i], "binary_log_loss");
        r.value += -(target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p));
        r.grad_preact[i] = pred[i] - target[i];
    }
    return r;
}

LossResult multiclass_log_loss(const Vector& pred, const Vector& target) {
    require(pred.size() == target.size(), "multiclass_log_loss: dimension mismatch");
    LossResult r;
    r.grad_preact.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = clamp_prob(pred[i], "multiclass_log_loss");
        r.value += -target[i] * std::log(p);
        r.grad_preact[i] = pred[i] - target[i];
    }
    return r;
}

LossResult loss_eval(LossKind kind, const Vector& pred, const Vector& target) {
    switch (kind) {
        case LossKind::Mse: return mse_loss(pred, target);
        case LossKind::BinaryLog: return binary_log_loss(pred, target);
        case LossKind::MulticlassLog: return multiclass_log_loss(pred, target);
    }
    throw std::logic_error("loss_eval: unknown kind");
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
    require(fan_in >= 1 && fan_out >= 1, "xavier_bound: fans must be positive");
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix xavier_sample(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = xavier_bound(fan_in, fan_out);
    Matrix m(fan_out, fan_in);
    for (double& v : m.data) v = uniform_range(rng, -a, a);
    return m;
}

double xavier_scalar(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = xavier_bound(fan_in, fan_out);
    return uniform_range(rng, -a, a);
}

void sgd_momentum_step(Vector& p, const Vector& g, Vector& v, double lr, double momentum) {
    kern::sgd_momentum(p, g, v, lr, momentum);
}

void sgd_momentum_step(Matrix& p, const Matrix& g, Matrix& v, double lr, double momentum) {
    require(p.rows == g.rows && p.cols == g.cols, "sgd_momentum_step: grad shape mismatch");
    require(p.rows == v.rows && p.cols == v.cols, "sgd_momentum_step: velocity shape mismatch");
    kern::sgd_momentum(p.data, g.data, v.data, lr, momentum);
}

}  // namespace acdc
