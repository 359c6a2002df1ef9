#include <stdexcept>
#include <cmath>
#include <tuple>

#include "acdc/gradcheck.hpp"
#include "acdc/model.hpp"
#include "acdc/rand.hpp"
#include "doctest.h"

using namespace acdc;

namespace {
Vector random_unit_vec(Rng& rng, std::size_t n) {
    Vector v(n);
    for (double& x : v) x = uniform01(rng);
    return v;
}

void zero_params(AcdcModel& m) {
    auto zero = [](auto& v) { std::fill(v.begin(), v.end(), 0.0); };
    zero(m.dae.w.data);
    zero(m.dae.b_hidden);
    zero(m.dae.b_out);
    for (Head* h : {&m.daa, &m.disc}) {
        zero(h->w1.data);
        zero(h->b1);
        zero(h->w2.data);
        zero(h->b2);
    }
}
}  // namespace

TEST_CASE("initial widths") {
    CHECK(init_model(784, 10, {}, 1).dae_width() == 392);
    CHECK(init_model(8, 2, {}, 1).dae_width() == 4);
    CHECK(init_model(9, 2, {}, 1).dae_width() == 5);  // ceil(u/2)

    AcdcModel m = init_model(8, 2, {}, 1);
    CHECK(m.daa_width() == 1);
    CHECK(m.disc_width() == 1);

    AblationFlags c;
    c.dae_starts_single_node = true;
    CHECK(init_model(8, 2, c, 1).dae_width() == 1);

    CHECK_THROWS_AS(init_model(1, 2, {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(init_model(4, 1, {}, 1), std::invalid_argument);
}

TEST_CASE("init is deterministic under the seed") {
    const AcdcModel a = init_model(6, 3, {}, 42);
    const AcdcModel b = init_model(6, 3, {}, 42);
    const AcdcModel c = init_model(6, 3, {}, 43);
    CHECK(param_hash(a) == param_hash(b));
    CHECK(param_hash(a) != param_hash(c));
    // biases start at zero, momentum buffers too
    for (double v : a.dae.b_hidden) CHECK(v == 0.0);
    for (double v : a.vel_dae.w.data) CHECK(v == 0.0);
}

TEST_CASE("encode/decode shapes and zero-weight fixed point") {
    AcdcModel m = init_model(6, 2, {}, 3);
    const Vector x = random_unit_vec(m.rng_noise, 6);
    const Vector h = encode(m, x);
    CHECK(h.size() == m.dae_width());
    CHECK(decode(m, h).size() == 6);

    zero_params(m);
    const Vector h0 = encode(m, x);
    for (double v : h0) CHECK(v == 0.5);
    for (double v : decode(m, h0)) CHECK(v == 0.5);
}

TEST_CASE("tied weights couple encoder and decoder") {
    AcdcModel m = init_model(4, 2, {}, 9);
    const Vector x{0.1, 0.9, 0.4, 0.6};
    const Vector h1 = encode(m, x);
    const Vector r1 = decode(m, h1);

    m.dae.w(0, 0) += 0.25;
    const Vector h2 = encode(m, x);
    const Vector r2 = decode(m, h2);
    CHECK(h1[0] != h2[0]);
    CHECK(r1 != r2);
}

TEST_CASE("masking noise") {
    Rng rng(10);
    const Vector x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

    CHECK(mask_noise(x, 0.0, rng) == x);

    const Vector masked = mask_noise(x, 0.1, rng);
    int zeros = 0;
    for (double v : masked) zeros += v == 0.0;
    CHECK(zeros == 1);

    Rng a(4), b(4);
    CHECK(mask_noise(x, 0.3, a) == mask_noise(x, 0.3, b));

    CHECK(mask_noise(Vector(20, 1.0), 0.1, rng) !=
          Vector(20, 1.0));  // two coordinates zeroed
    CHECK_THROWS_AS(mask_noise(x, 1.0, rng), std::invalid_argument);
}

TEST_CASE("greedy pre-training step") {
    AcdcModel m = init_model(6, 2, {}, 21);
    m.hyper.learning_rate = 0.005;
    m.hyper.momentum = 0.0;
    const Vector x = random_unit_vec(m.rng_noise, 6);

    auto recon_loss = [&] {
        return mse_loss(decode(m, encode(m, x)), x).value;
    };
    const std::uint64_t daa_before = hash_matrix(m.daa.w1, 0) ^ hash_matrix(m.daa.w2, 1);
    const std::uint64_t disc_before = hash_matrix(m.disc.w1, 0) ^ hash_matrix(m.disc.w2, 1);

    const double before = recon_loss();
    greedy_pretrain_step(m, x);
    CHECK(recon_loss() <= before);

    // only the autoencoder moves
    CHECK((hash_matrix(m.daa.w1, 0) ^ hash_matrix(m.daa.w2, 1)) == daa_before);
    CHECK((hash_matrix(m.disc.w1, 0) ^ hash_matrix(m.disc.w2, 1)) == disc_before);

    // zero rate: nothing moves
    AcdcModel z = init_model(6, 2, {}, 21);
    z.hyper.learning_rate = 0.0;
    const std::uint64_t h0 = param_hash(z);
    greedy_pretrain_step(z, x);
    CHECK(param_hash(z) == h0);
}

TEST_CASE("paired reconstruction loss") {
    // zero weights reconstruct the all-0.5 vector exactly
    AcdcModel m = init_model(6, 2, {}, 33);
    zero_params(m);
    const Vector half(6, 0.5);
    TiedAutoencoder g = zero_like(m.dae);
    CHECK(dae_loss_grads(m, half, half, half, half, g) == 0.0);

    // the loss is symmetric in the pair, corruption held fixed
    AcdcModel r = init_model(6, 2, {}, 34);
    Rng rng(2);
    const Vector a = random_unit_vec(rng, 6), b = random_unit_vec(rng, 6);
    const Vector an = mask_noise(a, 0.2, rng), bn = mask_noise(b, 0.2, rng);
    TiedAutoencoder g1 = zero_like(r.dae), g2 = zero_like(r.dae);
    CHECK(dae_loss_grads(r, an, bn, a, b, g1) ==
          doctest::Approx(dae_loss_grads(r, bn, an, b, a, g2)).epsilon(1e-15));
}

TEST_CASE("domain loss at the zero model") {
    AcdcModel m = init_model(6, 2, {}, 40);
    zero_params(m);
    Rng rng(1);
    Head g = zero_like(m.daa);
    EncoderGrads ge{Matrix(m.dae.w.rows, m.dae.w.cols), Vector(m.dae.b_hidden.size(), 0.0)};
    // both domain scores are exactly 0.5
    const double loss =
        daa_loss_grads(m, random_unit_vec(rng, 6), random_unit_vec(rng, 6), false, g, ge);
    CHECK(loss == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("class loss values") {
    AcdcModel m = init_model(6, 5, {}, 41);
    zero_params(m);
    Rng rng(1);
    Head g = zero_like(m.disc);
    EncoderGrads ge{Matrix(m.dae.w.rows, m.dae.w.cols), Vector(m.dae.b_hidden.size(), 0.0)};
    // zero weights give the uniform class posterior
    const double loss = disc_loss_grads(m, random_unit_vec(rng, 6), one_hot(3, 5), g, ge);
    CHECK(loss == doctest::Approx(std::log(5.0)));

    // a saturated output bias on the true class drives the loss to zero
    m.disc.b2[3] = 40.0;
    Head g2 = zero_like(m.disc);
    EncoderGrads ge2{Matrix(m.dae.w.rows, m.dae.w.cols), Vector(m.dae.b_hidden.size(), 0.0)};
    CHECK(disc_loss_grads(m, random_unit_vec(rng, 6), one_hot(3, 5), g2, ge2) ==
          doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("analytic gradients match central differences") {
    // the acceptance suite runs the full 20 configurations; keep unit fast
    for (const CheckResult& r : run_gradient_checks(1234, 4)) {
        INFO(r.name, " worst ", r.metric, " at ", r.detail);
        CHECK(r.pass);
    }
}

TEST_CASE("gradient reversal is an exact negation") {
    const CheckResult r = run_grl_check(99);
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("adversarial module trains to separate fixed separable domains") {
    AcdcModel m = init_model(2, 2, {}, 50);
    Rng rng(8);
    // frozen encoder; only the head trains
    std::vector<Vector> src, tgt;
    for (int i = 0; i < 40; ++i) {
        src.push_back({0.15 + 0.05 * uniform01(rng), 0.15 + 0.05 * uniform01(rng)});
        tgt.push_back({0.85 + 0.05 * uniform01(rng), 0.85 + 0.05 * uniform01(rng)});
    }
    for (int epoch = 0; epoch < 400; ++epoch) {
        for (std::size_t i = 0; i < src.size(); ++i) {
            Head g = zero_like(m.daa);
            EncoderGrads ge{Matrix(m.dae.w.rows, m.dae.w.cols),
                            Vector(m.dae.b_hidden.size(), 0.0)};
            daa_loss_grads(m, src[i], tgt[i], false, g, ge);
            sgd_momentum_step(m.daa.w1, g.w1, m.vel_daa.w1, 0.05, 0.9);
            sgd_momentum_step(m.daa.b1, g.b1, m.vel_daa.b1, 0.05, 0.9);
            sgd_momentum_step(m.daa.w2, g.w2, m.vel_daa.w2, 0.05, 0.9);
            sgd_momentum_step(m.daa.b2, g.b2, m.vel_daa.b2, 0.05, 0.9);
        }
    }
    int errors = 0;
    for (const Vector& x : src) errors += daa_domain_score(m, x) >= 0.5;
    for (const Vector& x : tgt) errors += daa_domain_score(m, x) < 0.5;
    CHECK(errors == 0);
}

TEST_CASE("learn_step order and ablation A") {
    Rng rng(3);
    const Vector xs = random_unit_vec(rng, 6), xt = random_unit_vec(rng, 6);
    const Vector y = one_hot(1, 3);

    AcdcModel a = init_model(6, 3, {}, 7);
    AcdcModel b = init_model(6, 3, {}, 7);
    const Losses la = learn_step(a, xs, y, xt);
    const Losses lb = learn_step(b, xs, y, xt);
    CHECK(param_hash(a) == param_hash(b));  // bit-deterministic
    CHECK(la.total() == la.dae + la.daa + la.disc);
    CHECK(lb.daa > 0.0);

    // ablation A: no adversarial loss, no adversarial encoder update
    AblationFlags fa;
    fa.daa_enabled = false;
    AcdcModel c = init_model(6, 3, fa, 7);
    const Losses lc = learn_step(c, xs, y, xt);
    CHECK(lc.daa == 0.0);

    AcdcModel d = init_model(6, 3, {}, 7);
    d.flags.daa_enabled = false;  // same weights as a/b, adversarial path off
    dae_learn(d, xs, xt);
    disc_learn(d, xs, y);
    CHECK(param_hash(c) == param_hash(d));
}

TEST_CASE("adaptation step bookkeeping") {
    Rng rng(12);
    const Vector xs = random_unit_vec(rng, 6), xt = random_unit_vec(rng, 6);
    const Vector y = one_hot(0, 2);

    SUBCASE("ablation B freezes everything") {
        AblationFlags fb;
        fb.evolution_enabled = false;
        AcdcModel m = init_model(6, 2, fb, 5);
        const auto w0 = std::tuple{m.dae_width(), m.daa_width(), m.disc_width()};
        for (int i = 0; i < 20; ++i) {
            const AdaptEvents ev = adapt_step(m, xs, y, xt);
            CHECK(ev.grows() == 0);
            CHECK(ev.prunes() == 0);
        }
        CHECK(std::tuple{m.dae_width(), m.daa_width(), m.disc_width()} == w0);
        CHECK(m.moments_dae.count == 0);  // the whole step is skipped
    }

    SUBCASE("first pair updates moments but cannot fire") {
        AcdcModel m = init_model(6, 2, {}, 5);
        const AdaptEvents ev = adapt_step(m, xs, y, xt);
        CHECK(ev.grows() == 0);
        CHECK(ev.prunes() == 0);
        CHECK(m.moments_dae.count == 2);   // both directions assessed
        CHECK(m.moments_daa.count == 2);
        CHECK(m.moments_disc.count == 1);  // labeled source only
        validate_shapes(m);
    }

    SUBCASE("ablation A skips the adversarial assessment") {
        AblationFlags fa;
        fa.daa_enabled = false;
        AcdcModel m = init_model(6, 2, fa, 5);
        adapt_step(m, xs, y, xt);
        CHECK(m.moments_daa.count == 0);
        CHECK(m.moments_dae.count == 2);
    }
}

TEST_CASE("daa growth signals disc growth") {
    AcdcModel m = init_model(6, 2, {}, 77);
    AdaptEvents ev;
    apply_growth(m, ModuleKind::Daa, ev);
    CHECK(m.daa_width() == 2);
    CHECK(m.disc_width() == 2);  // forced
    CHECK(ev.grow_daa == 1);
    CHECK(ev.grow_disc == 1);
    validate_shapes(m);

    AblationFlags fd;
    fd.daa_signals_disc = false;
    AcdcModel d = init_model(6, 2, fd, 77);
    AdaptEvents ev2;
    apply_growth(d, ModuleKind::Daa, ev2);
    CHECK(d.daa_width() == 2);
    CHECK(d.disc_width() == 1);  // ablation D: no signal
    validate_shapes(d);
}

TEST_CASE("dae growth resizes downstream inputs with zero columns") {
    AcdcModel m = init_model(6, 3, {}, 11);
    Rng rng(1);
    const Vector x = random_unit_vec(rng, 6);
    const Vector daa_before{daa_domain_score(m, x)};
    const auto [cls_before, probs_before] = predict(m, x);

    AdaptEvents ev;
    apply_growth(m, ModuleKind::Dae, ev);
    validate_shapes(m);
    CHECK(m.dae_width() == 4);
    CHECK(m.daa.w1.cols == 4);
    CHECK(m.disc.w1.cols == 4);
    // new encoder node feeds zero columns downstream: heads are unaffected
    CHECK(daa_domain_score(m, x) == daa_before[0]);
    const auto [cls_after, probs_after] = predict(m, x);
    CHECK(probs_after == probs_before);
}

TEST_CASE("expected output degenerates to the plain pass at zero variance") {
    AcdcModel m = init_model(5, 3, {}, 13);
    Rng rng(2);
    const Vector x = random_unit_vec(rng, 5);
    // a single accumulated sample has zero variance and mean == x
    m.moments_dae.update(x);
    m.moments_daa.update(x);
    m.moments_disc.update(x);

    for (ModuleKind kind : {ModuleKind::Dae, ModuleKind::Daa, ModuleKind::Disc}) {
        const auto [ey, ey2] = expected_output(m, kind);
        const Vector plain = assessment_forward(m, kind, x);
        CHECK(ey == plain);  // bitwise: the rescale is exactly the identity
    }
    CHECK_THROWS_AS(expected_output(init_model(5, 3, {}, 1), ModuleKind::Dae),
                    std::invalid_argument);
}

TEST_CASE("prediction is pure and normalized") {
    AcdcModel m = init_model(6, 4, {}, 19);
    Rng rng(3);
    const Vector x = random_unit_vec(rng, 6);

    const std::uint64_t h0 = param_hash(m);
    const auto [cls1, p1] = predict(m, x);
    const auto [cls2, p2] = predict(m, x);
    CHECK(param_hash(m) == h0);
    CHECK(cls1 == cls2);
    CHECK(p1 == p2);
    double sum = 0;
    for (double v : p1) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(cls1 < 4);
}

TEST_CASE("empirical h-divergence") {
    AcdcModel m = init_model(4, 2, {}, 23);
    Rng rng(4);
    std::vector<Vector> ws, wt;
    for (int i = 0; i < 20; ++i) {
        ws.push_back(random_unit_vec(rng, 4));
        wt.push_back(random_unit_vec(rng, 4));
    }

    // constant-source classifier: all source right, all target wrong
    zero_params(m);
    m.daa.b2[0] = -10.0;
    CHECK(empirical_h_divergence(m, ws, wt) == doctest::Approx(0.0));

    // identical windows give exactly zero for any deterministic classifier
    AcdcModel r = init_model(4, 2, {}, 24);
    CHECK(empirical_h_divergence(r, ws, ws) == doctest::Approx(0.0));

    CHECK_THROWS_AS(empirical_h_divergence(m, {}, wt), std::invalid_argument);
}

TEST_CASE("structural fuzz keeps every shape consistent") {
    Rng rng(31);
    AcdcModel m = init_model(7, 3, {}, 99);
    Vector probe = random_unit_vec(rng, 7);
    m.moments_dae.update(probe);
    m.moments_daa.update(probe);
    m.moments_disc.update(probe);

    AdaptEvents ev;
    for (int i = 0; i < 300; ++i) {
        const auto kind = static_cast<ModuleKind>(uniform_index(rng, 3));
        if (uniform01(rng) < 0.5)
            apply_growth(m, kind, ev);
        else
            apply_prune_weakest(m, kind, ev);
        validate_shapes(m);
        CHECK(m.dae_width() >= 1);
        CHECK(m.daa_width() >= 1);
        CHECK(m.disc_width() >= 1);
        // the model still runs end to end
        if (i % 50 == 0) {
            predict(m, probe);
            learn_step(m, probe, one_hot(1, 3), probe);
        }
    }
    CHECK(ev.grows() > 0);
    CHECK(ev.prunes() > 0);
}
