#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "acdc/rand.hpp"
#include "acdc/stream.hpp"

namespace acdc {

// Scaling-hyperplane drift: the stream is cut into `concepts` equal
// segments; the first is left untouched, each later segment z rescales
// every sample to (d_z * x) / ||x|| with d_z drawn once in [0,2)^u.
struct DriftSchedule {
    std::size_t u = 0;
    std::size_t concepts = 1;
    std::size_t stream_len = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> boundaries;  // start index of each concept; boundaries[0] == 0
    std::vector<Vector> vectors;          // vectors[0] is the identity concept (all ones)
};

DriftSchedule make_schedule(std::size_t u, std::size_t concepts, std::size_t stream_len,
                            std::uint64_t seed);

std::size_t concept_of(const DriftSchedule& s, std::size_t index);

// Pure per-index transform; the norm is the L2 norm of the incoming x.
Vector apply_drift(const Vector& x, const DriftSchedule& s, std::size_t index);

// Two-domain Gaussian benchmark with covariate shift: shared class
// structure, target samples pushed through a fixed rotation (in the first
// two coordinates, around the feature-space center) plus a translation.
struct SynthSpec {
    std::size_t u = 10;
    std::size_t m = 3;
    std::size_t n_source = 20000;
    std::size_t n_target = 8000;
    double class_sep = 0.5;     // scale of the class-mean spread
    double noise_std = 0.08;    // within-class standard deviation
    double shift_angle = 0.5;   // radians
    double shift_offset = 0.15; // added to every target coordinate
    std::uint64_t seed = 7;
};

// Labeled source and target streams (target labels are for offline scoring
// only). Class priors balanced within one sample; deterministic under seed.
std::pair<std::vector<Sample>, std::vector<Sample>> synth_streams(const SynthSpec& spec);

}  // namespace acdc
