#include <stdexcept>
#include <cmath>
#include <set>

#include "acdc/drift.hpp"
#include "acdc/rand.hpp"
#include "doctest.h"

using namespace acdc;

namespace {

// Small multinomial logistic regression, trained offline by batch gradient
// descent. Independent oracle for the covariate-shift construction.
struct LogisticOracle {
    Matrix w;
    Vector b;

    LogisticOracle(std::size_t u, std::size_t m) : w(m, u, 0.0), b(m, 0.0) {}

    void fit(const std::vector<Sample>& data, int iters, double lr) {
        const std::size_t m = w.rows, u = w.cols;
        for (int it = 0; it < iters; ++it) {
            Matrix gw(m, u, 0.0);
            Vector gb(m, 0.0);
            for (const Sample& s : data) {
                const Vector p = softmax(affine(w, s.features, b));
                for (std::size_t k = 0; k < m; ++k) {
                    const double d = p[k] - (static_cast<int>(k) == s.label ? 1.0 : 0.0);
                    gb[k] += d;
                    for (std::size_t j = 0; j < u; ++j) gw(k, j) += d * s.features[j];
                }
            }
            const double scale = lr / static_cast<double>(data.size());
            for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= scale * gw.data[i];
            for (std::size_t k = 0; k < m; ++k) b[k] -= scale * gb[k];
        }
    }

    double accuracy(const std::vector<Sample>& data) const {
        std::size_t correct = 0;
        for (const Sample& s : data) {
            const Vector p = softmax(affine(w, s.features, b));
            std::size_t best = 0;
            for (std::size_t k = 1; k < p.size(); ++k)
                if (p[k] > p[best]) best = k;
            correct += static_cast<int>(best) == s.label;
        }
        return static_cast<double>(correct) / static_cast<double>(data.size());
    }
};

}  // namespace

TEST_CASE("drift schedules") {
    const DriftSchedule one = make_schedule(4, 1, 1000, 5);
    CHECK(one.boundaries == std::vector<std::size_t>{0});
    for (std::size_t i : {0ul, 500ul, 999ul}) CHECK(concept_of(one, i) == 0);

    const DriftSchedule s = make_schedule(4, 5, 1000, 5);
    CHECK(s.boundaries == std::vector<std::size_t>{0, 200, 400, 600, 800});
    CHECK(concept_of(s, 0) == 0);
    CHECK(concept_of(s, 199) == 0);
    CHECK(concept_of(s, 200) == 1);
    CHECK(concept_of(s, 999) == 4);
    CHECK(s.vectors[0] == Vector(4, 1.0));
    for (std::size_t z = 1; z < 5; ++z)
        for (double v : s.vectors[z]) {
            CHECK(v >= 0.0);
            CHECK(v < 2.0);
        }

    const DriftSchedule again = make_schedule(4, 5, 1000, 5);
    for (std::size_t z = 0; z < 5; ++z) CHECK(s.vectors[z] == again.vectors[z]);

    CHECK_THROWS_AS(concept_of(s, 1000), std::invalid_argument);
}

TEST_CASE("coprime concept counts never share an interior boundary") {
    const std::size_t n = 3500;
    const DriftSchedule a = make_schedule(3, 5, n, 1);
    const DriftSchedule b = make_schedule(3, 7, n, 2);
    std::set<std::size_t> interior_a(a.boundaries.begin() + 1, a.boundaries.end());
    for (std::size_t i = 1; i < b.boundaries.size(); ++i)
        CHECK(interior_a.count(b.boundaries[i]) == 0);
}

TEST_CASE("drift application") {
    DriftSchedule s = make_schedule(2, 2, 100, 3);

    // identity concept passes through untouched
    const Vector x{0.3, 0.4};
    CHECK(apply_drift(x, s, 10) == x);

    // hand arithmetic: all-ones drift vector, ||x|| = 2
    s.vectors[1] = Vector{1.0, 1.0};
    const Vector driven = apply_drift(Vector{2.0, 0.0}, s, 60);
    CHECK(driven[0] == doctest::Approx(1.0));
    CHECK(driven[1] == doctest::Approx(0.0));

    // guarded zero norm
    CHECK(apply_drift(Vector{0.0, 0.0}, s, 60) == Vector{0.0, 0.0});

    // pure function of (x, schedule, index)
    const Vector y{0.7, 0.1};
    CHECK(apply_drift(y, s, 75) == apply_drift(y, s, 75));

    // norm bound: entries below 2, unit-normalized input
    Rng rng(8);
    DriftSchedule r = make_schedule(6, 3, 300, 9);
    for (int i = 0; i < 100; ++i) {
        Vector v(6);
        for (double& e : v) e = uniform_range(rng, -3.0, 3.0);
        const Vector out = apply_drift(v, r, 250);
        double norm2 = 0;
        for (double e : out) norm2 += e * e;
        CHECK(std::sqrt(norm2) <= 2.0 + 1e-12);
    }
}

TEST_CASE("synthetic two-domain benchmark") {
    SynthSpec spec;
    spec.u = 6;
    spec.m = 3;
    spec.n_source = 900;
    spec.n_target = 901;
    spec.seed = 17;

    SUBCASE("balanced priors and determinism") {
        auto [src, tgt] = synth_streams(spec);
        CHECK(src.size() == 900);
        CHECK(tgt.size() == 901);
        std::vector<int> counts(3, 0);
        for (const Sample& s : tgt) ++counts[static_cast<std::size_t>(s.label)];
        CHECK(std::abs(counts[0] - counts[1]) <= 1);
        CHECK(std::abs(counts[1] - counts[2]) <= 1);

        auto [src2, tgt2] = synth_streams(spec);
        for (std::size_t i = 0; i < 10; ++i) CHECK(src[i].features == src2[i].features);
    }

    SUBCASE("zero shift: a source-trained classifier transfers freely") {
        SynthSpec same = spec;
        same.shift_angle = 0.0;
        same.shift_offset = 0.0;
        auto [src, tgt] = synth_streams(same);
        LogisticOracle oracle(same.u, same.m);
        oracle.fit(src, 300, 2.0);
        const double on_source = oracle.accuracy(src);
        const double on_target = oracle.accuracy(tgt);
        CHECK(on_source > 0.9);
        CHECK(std::abs(on_source - on_target) < 0.05);
    }

    SUBCASE("covariate shift degrades the source-only classifier") {
        SynthSpec shifted = spec;
        shifted.shift_angle = 0.9;
        shifted.shift_offset = 0.25;
        auto [src, tgt] = synth_streams(shifted);
        LogisticOracle oracle(shifted.u, shifted.m);
        oracle.fit(src, 300, 2.0);
        CHECK(oracle.accuracy(src) > 0.9);
        CHECK(oracle.accuracy(tgt) < oracle.accuracy(src) - 0.05);
    }
}
