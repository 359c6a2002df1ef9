#include "acdc/drift.hpp"

#include <cmath>
#include <stdexcept>

namespace acdc {

DriftSchedule make_schedule(std::size_t u, std::size_t concepts, std::size_t stream_len,
                            std::uint64_t seed) {
    require(concepts >= 1, "make_schedule: need at least one concept");
    require(u >= 1, "make_schedule: need at least one feature");
    DriftSchedule s;
    s.u = u;
    s.concepts = concepts;
    s.stream_len = stream_len;
    s.seed = seed;

    s.boundaries.resize(concepts);
    for (std::size_t z = 0; z < concepts; ++z) s.boundaries[z] = z * stream_len / concepts;

    Rng rng(seed);
    s.vectors.resize(concepts);
    s.vectors[0].assign(u, 1.0);
    for (std::size_t z = 1; z < concepts; ++z) {
        s.vectors[z].resize(u);
        for (double& v : s.vectors[z]) v = uniform_range(rng, 0.0, 2.0);
    }
    return s;
}

std::size_t concept_of(const DriftSchedule& s, std::size_t index) {
    require(index < s.stream_len, "concept_of: index beyond stream length");
    std::size_t z = 0;
    while (z + 1 < s.concepts && index >= s.boundaries[z + 1]) ++z;
    return z;
}

Vector apply_drift(const Vector& x, const DriftSchedule& s, std::size_t index) {
    require(x.size() == s.u, "apply_drift: dimension mismatch");
    const std::size_t z = concept_of(s, index);
    if (z == 0) return x;  // identity concept, no rescaling

    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    if (norm2 == 0.0) return Vector(x.size(), 0.0);
    const double inv_norm = 1.0 / std::sqrt(norm2);

    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = s.vectors[z][i] * x[i] * inv_norm;
    return out;
}

namespace {

std::vector<Vector> class_directions(std::size_t m, std::size_t u, Rng& rng) {
    std::vector<Vector> dirs(m, Vector(u));
    for (auto& d : dirs) {
        double norm2 = 0.0;
        for (double& v : d) {
            v = normal01(rng);
            norm2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-30));
        for (double& v : d) v *= inv;
    }
    return dirs;
}

// Balanced class sequence: round-robin then shuffled.
std::vector<std::size_t> balanced_labels(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i % m;
    fisher_yates(labels, rng);
    return labels;
}

}  // namespace

std::pair<std::vector<Sample>, std::vector<Sample>> synth_streams(const SynthSpec& spec) {
    require(spec.u >= 2, "synth_streams: need at least two features");
    require(spec.m >= 2, "synth_streams: need at least two classes");
    Rng rng(spec.seed);

    const std::vector<Vector> dirs = class_directions(spec.m, spec.u, rng);
    auto class_mean = [&](std::size_t c) {
        Vector mu(spec.u);
        for (std::size_t j = 0; j < spec.u; ++j) mu[j] = 0.5 + spec.class_sep * 0.5 * dirs[c][j];
        return mu;
    };

    const double ca = std::cos(spec.shift_angle), sa = std::sin(spec.shift_angle);
    auto shift = [&](Vector x) {
        // rotate coordinates (0,1) around the 0.5 center, then translate all
        const double a = x[0] - 0.5, b = x[1] - 0.5;
        x[0] = 0.5 + ca * a - sa * b;
        x[1] = 0.5 + sa * a + ca * b;
        for (double& v : x) v += spec.shift_offset;
        return x;
    };

    auto draw = [&](std::size_t c) {
        Vector x = class_mean(c);
        for (double& v : x) v += spec.noise_std * normal01(rng);
        return x;
    };

    std::vector<Sample> source, target;
    source.reserve(spec.n_source);
    target.reserve(spec.n_target);

    for (std::size_t c : balanced_labels(spec.n_source, spec.m, rng)) {
        Sample s;
        s.features = draw(c);
        s.label = static_cast<int>(c);
        s.domain = Domain::Source;
        source.push_back(std::move(s));
    }
    for (std::size_t c : balanced_labels(spec.n_target, spec.m, rng)) {
        Sample s;
        s.features = shift(draw(c));
        s.label = static_cast<int>(c);  // held out; offline scoring only
        s.domain = Domain::Target;
        target.push_back(std::move(s));
    }
    return {std::move(source), std::move(target)};
}

}  // namespace acdc
