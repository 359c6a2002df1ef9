#pragma once

#include <cstddef>
#include <vector>

#include "acdc/linalg.hpp"
#include "acdc/nn.hpp"

namespace acdc {

// Streaming per-coordinate input statistics (Welford). Cumulative over the
// whole stream; drift reactivity comes from the SPC minimum resets, not
// from resetting these.
struct InputMoments {
    std::size_t count = 0;
    Vector mean;      // running mean of x
    Vector m2;        // Welford sum of squared deviations
    Vector raw2mean;  // running mean of x^2 (second raw moment)

    explicit InputMoments(std::size_t dim = 0)
        : mean(dim, 0.0), m2(dim, 0.0), raw2mean(dim, 0.0) {}

    std::size_t dim() const { return mean.size(); }
    void update(const Vector& x);
    Vector variance() const;  // population variance, elementwise
};

// One Welford accumulator plus the minimum trackers of the modified SPC
// test. min_std carries a 1e-12 floor so a zero-variance start keeps the
// threshold meaningful.
struct RunningStat {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double min_mean = 0.0;
    double min_std = 0.0;

    double stddev() const;
    void update(double x);     // also lowers the min trackers
    void reset_mins();         // re-initialize mins to current values
};

struct SpcStats {
    RunningStat bias;
    RunningStat var;
};

struct SpcThresholds {
    double beta = 0.0;
    double lambda = 0.0;
};

// Dynamic confidence-interval widths. The response is exponential in the
// current bias/variance: beta = a1*exp(-bias) + a2 in (a2, a1+a2], and
// lambda is doubled so pruning never chases a growth step directly. A
// linear response a1*(-x) + a2 keeps beta below 1 for any non-negative
// bias, which makes the growing test fire on every sample once the min
// trackers are seeded; the exponential form is the one that leaves a
// usable dead zone. See README for the resulting ranges.
SpcThresholds spc_thresholds(double bias, double var, double a1, double a2);

struct SpcDecision {
    bool grow = false;
    bool prune = false;
    SpcThresholds thresholds;
};

// One assessment step: fold (bias, var) into the running stats, evaluate
//   grow:  mu_B + sigma_B >= mu_B_min + beta   * sigma_B_min
//   prune: mu_V + sigma_V >= mu_V_min + lambda * sigma_V_min
// and reset the min trackers of whichever condition fired.
SpcDecision spc_step(SpcStats& stats, double bias, double var, double a1, double a2);

// Probit-rescaled input for expected-output propagation:
// mean / sqrt(1 + pi * var / 8), elementwise.
Vector probit_rescale(const Vector& mean, const Vector& var);

// Expected activation of a logistic layer fed with an already-rescaled
// expected input. Row r of w_in is hidden node r.
Vector expected_activation(const Matrix& w_in, const Vector& b_in, const Vector& expected_input);

// argmin of expected_activation; the node contributing least.
std::size_t weakest_node(const Matrix& w_in, const Vector& b_in, const Vector& expected_input);

// Bias^2 / variance decomposition of an expected output against target y:
//   bias = mean_j (E[y_j] - y_j)^2,  var = mean_j (E[y_j^2] - E[y_j]^2)
struct BiasVar {
    double bias = 0.0;
    double var = 0.0;
};
BiasVar bias_variance(const Vector& ey, const Vector& ey2, const Vector& target);

// Weight surgery for one evolving layer. `downstream` are the matrices
// whose columns index this layer's nodes (with their velocity mirrors);
// new columns start at zero so growth never jolts downstream outputs.
struct LayerRef {
    Matrix* w_in;
    Vector* b_in;
    Matrix* vel_w;
    Vector* vel_b;
};
struct DownstreamRef {
    Matrix* w;
    Matrix* vel;
};

void grow_node(LayerRef layer, const std::vector<DownstreamRef>& downstream, Rng& rng);
void prune_node(LayerRef layer, const std::vector<DownstreamRef>& downstream, std::size_t node);

}  // namespace acdc
