#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "acdc/model.hpp"

namespace acdc {

// Central-difference gradient of f over the given parameter span. Test
// oracle only; keeps no knowledge of how f is computed.
Vector finite_diff_grad(const std::function<double()>& f, std::span<double> params, double eps);

// |a-b| / max(|a|,|b|, floor). The floor keeps near-zero components from
// amplifying quadrature noise into false failures.
double grad_rel_err(double analytic, double numeric, double floor_ = 1e-2);

struct CheckResult {
    std::string name;
    bool pass = false;
    double metric = 0.0;  // worst error observed
    std::string detail;
};

// Analytic vs central-difference gradients of the three losses, including
// shared-encoder and tied-weight paths, over `configs` random models with
// u<=8, hidden widths<=6, m<=4. Pass threshold: rel err < 1e-4.
std::vector<CheckResult> run_gradient_checks(std::uint64_t seed, int configs = 20);

// Encoder gradient with reversal must be the exact elementwise negation of
// the gradient without reversal.
CheckResult run_grl_check(std::uint64_t seed);

// Probit expected outputs vs Monte-Carlo estimates over Gaussian inputs
// with matching moments. Pass threshold: abs err < 0.05.
std::vector<CheckResult> run_probit_checks(std::uint64_t seed, int nets = 10,
                                           std::size_t draws = 1000000);

// Everything above; used by the gradcheck CLI command.
std::vector<CheckResult> run_verification_suite(std::uint64_t seed);

}  // namespace acdc
