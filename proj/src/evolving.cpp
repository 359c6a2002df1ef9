#include "acdc/evolving.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acdc {

namespace {
constexpr double kMinStdFloor = 1e-12;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

void InputMoments::update(const Vector& x) {
    require(x.size() == mean.size(), "InputMoments::update: dimension mismatch");
    ++count;
    const double inv_n = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double delta = x[i] - mean[i];
        mean[i] += delta * inv_n;
        m2[i] += delta * (x[i] - mean[i]);
        raw2mean[i] += (x[i] * x[i] - raw2mean[i]) * inv_n;
    }
}

Vector InputMoments::variance() const {
    Vector v(mean.size(), 0.0);
    if (count == 0) return v;
    const double inv_n = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m2[i] * inv_n;
    return v;
}

double RunningStat::stddev() const {
    if (count == 0) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count));
}

void RunningStat::update(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
    const double sd = stddev();
    if (count == 1) {
        min_mean = mean;
        min_std = std::max(sd, kMinStdFloor);
    } else {
        min_mean = std::min(min_mean, mean);
        min_std = std::max(std::min(min_std, sd), kMinStdFloor);
    }
}

void RunningStat::reset_mins() {
    min_mean = mean;
    min_std = std::max(stddev(), kMinStdFloor);
}

SpcThresholds spc_thresholds(double bias, double var, double a1, double a2) {
    SpcThresholds t;
    t.beta = a1 * std::exp(-bias) + a2;
    t.lambda = 2.0 * (a1 * std::exp(-var) + a2);
    return t;
}

SpcDecision spc_step(SpcStats& stats, double bias, double var, double a1, double a2) {
    stats.bias.update(bias);
    stats.var.update(var);

    SpcDecision d;
    d.thresholds = spc_thresholds(bias, var, a1, a2);
    d.grow = stats.bias.mean + stats.bias.stddev() >=
             stats.bias.min_mean + d.thresholds.beta * stats.bias.min_std;
    d.prune = stats.var.mean + stats.var.stddev() >=
              stats.var.min_mean + d.thresholds.lambda * stats.var.min_std;

    // Mins reset on condition fire, whether or not the caller executes the
    // structural change (grow precedence, last-node guard).
    if (d.grow) stats.bias.reset_mins();
    if (d.prune) stats.var.reset_mins();
    return d;
}

Vector probit_rescale(const Vector& mean, const Vector& var) {
    require(mean.size() == var.size(), "probit_rescale: dimension mismatch");
    Vector out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
        out[i] = mean[i] / std::sqrt(1.0 + kPi * var[i] / 8.0);
    return out;
}

Vector expected_activation(const Matrix& w_in, const Vector& b_in, const Vector& expected_input) {
    return sigmoid(affine(w_in, expected_input, b_in));
}

std::size_t weakest_node(const Matrix& w_in, const Vector& b_in, const Vector& expected_input) {
    const Vector act = expected_activation(w_in, b_in, expected_input);
    require(!act.empty(), "weakest_node: empty layer");
    std::size_t best = 0;
    for (std::size_t i = 1; i < act.size(); ++i)
        if (act[i] < act[best]) best = i;  // ties keep the lowest index
    return best;
}

BiasVar bias_variance(const Vector& ey, const Vector& ey2, const Vector& target) {
    require(ey.size() == ey2.size() && ey.size() == target.size(),
            "bias_variance: dimension mismatch");
    BiasVar out;
    const double inv_n = 1.0 / static_cast<double>(ey.size());
    for (std::size_t i = 0; i < ey.size(); ++i) {
        const double d = ey[i] - target[i];
        out.bias += d * d * inv_n;
        out.var += (ey2[i] - ey[i] * ey[i]) * inv_n;
    }
    return out;
}

void grow_node(LayerRef layer, const std::vector<DownstreamRef>& downstream, Rng& rng) {
    const std::size_t fan_in = layer.w_in->cols;
    const std::size_t fan_out = layer.w_in->rows + 1;
    const double bound = xavier_bound(fan_in, fan_out);

    Vector row(fan_in);
    for (double& v : row) v = uniform_range(rng, -bound, bound);
    append_row(*layer.w_in, row);
    layer.b_in->push_back(uniform_range(rng, -bound, bound));

    Vector zero_row(fan_in, 0.0);
    append_row(*layer.vel_w, zero_row);
    layer.vel_b->push_back(0.0);

    for (const auto& ds : downstream) {
        append_col_zero(*ds.w);
        append_col_zero(*ds.vel);
    }
}

void prune_node(LayerRef layer, const std::vector<DownstreamRef>& downstream, std::size_t node) {
    require(layer.w_in->rows >= 2, "prune_node: refusing to remove the last node");
    require(node < layer.w_in->rows, "prune_node: index out of range");

    remove_row(*layer.w_in, node);
    layer.b_in->erase(layer.b_in->begin() + static_cast<std::ptrdiff_t>(node));
    remove_row(*layer.vel_w, node);
    layer.vel_b->erase(layer.vel_b->begin() + static_cast<std::ptrdiff_t>(node));

    for (const auto& ds : downstream) {
        remove_col(*ds.w, node);
        remove_col(*ds.vel, node);
    }
}

}  // namespace acdc
