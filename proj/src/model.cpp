#include "acdc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acdc {

namespace {

Vector sigmoid_deriv_mul(const Vector& delta, const Vector& act) {
    Vector out(delta.size());
    for (std::size_t i = 0; i < delta.size(); ++i) out[i] = delta[i] * act[i] * (1.0 - act[i]);
    return out;
}

void add_into(Vector& acc, const Vector& v) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

// Deterministic propagation of an expected input through a module's
// assessment path. The probit rescale is applied before calling this.
Vector propagate_expected(const AcdcModel& model, ModuleKind kind, const Vector& rescaled_input) {
    const Vector h = sigmoid(affine(model.dae.w, rescaled_input, model.dae.b_hidden));
    switch (kind) {
        case ModuleKind::Dae: {
            Vector z(model.u);
            kern::affine_t(model.dae.w, h, model.dae.b_out, z);
            return sigmoid(z);
        }
        case ModuleKind::Daa:
            return sigmoid(affine(model.daa.w2, sigmoid(affine(model.daa.w1, h, model.daa.b1)),
                                  model.daa.b2));
        case ModuleKind::Disc:
            return softmax(affine(model.disc.w2, sigmoid(affine(model.disc.w1, h, model.disc.b1)),
                                  model.disc.b2));
    }
    throw std::logic_error("propagate_expected: unknown module");
}

const InputMoments& moments_of(const AcdcModel& model, ModuleKind kind) {
    switch (kind) {
        case ModuleKind::Dae: return model.moments_dae;
        case ModuleKind::Daa: return model.moments_daa;
        case ModuleKind::Disc: return model.moments_disc;
    }
    throw std::logic_error("moments_of: unknown module");
}

InputMoments& moments_of(AcdcModel& model, ModuleKind kind) {
    return const_cast<InputMoments&>(moments_of(static_cast<const AcdcModel&>(model), kind));
}

LayerRef dae_layer(AcdcModel& m) {
    return {&m.dae.w, &m.dae.b_hidden, &m.vel_dae.w, &m.vel_dae.b_hidden};
}
LayerRef daa_layer(AcdcModel& m) { return {&m.daa.w1, &m.daa.b1, &m.vel_daa.w1, &m.vel_daa.b1}; }
LayerRef disc_layer(AcdcModel& m) {
    return {&m.disc.w1, &m.disc.b1, &m.vel_disc.w1, &m.vel_disc.b1};
}

std::vector<DownstreamRef> dae_downstream(AcdcModel& m) {
    return {{&m.daa.w1, &m.vel_daa.w1}, {&m.disc.w1, &m.vel_disc.w1}};
}
std::vector<DownstreamRef> daa_downstream(AcdcModel& m) { return {{&m.daa.w2, &m.vel_daa.w2}}; }
std::vector<DownstreamRef> disc_downstream(AcdcModel& m) { return {{&m.disc.w2, &m.vel_disc.w2}}; }


struct HeadActivations {
    Vector h;    // encoder hidden
    Vector h1;   // head hidden
    Vector out;  // head output after logistic/softmax
};

HeadActivations head_forward(const AcdcModel& model, const Head& head, const Vector& x,
                             bool softmax_out) {
    HeadActivations a;
    a.h = encode(model, x);
    a.h1 = sigmoid(affine(head.w1, a.h, head.b1));
    const Vector z2 = affine(head.w2, a.h1, head.b2);
    a.out = softmax_out ? softmax(z2) : sigmoid(z2);
    return a;
}

// Shared backward pass for daa/disc heads. Returns the loss; accumulates
// head gradients and (optionally sign-flipped) encoder gradients.
double head_term_grads(const AcdcModel& model, const Head& head, const Vector& x,
                       const Vector& target, bool softmax_out, bool reverse, Head& g,
                       EncoderGrads& g_enc) {
    const HeadActivations a = head_forward(model, head, x, softmax_out);
    const LossResult lr = softmax_out ? multiclass_log_loss(a.out, target)
                                      : binary_log_loss(a.out, target);

    const Vector& d2 = lr.grad_preact;
    add_into(g.b2, d2);
    kern::add_outer(g.w2, d2, a.h1);

    Vector back(head.w2.cols);
    kern::matvec_t(head.w2, d2, back);
    const Vector d1 = sigmoid_deriv_mul(back, a.h1);
    add_into(g.b1, d1);
    kern::add_outer(g.w1, d1, a.h);

    Vector dh(head.w1.cols);
    kern::matvec_t(head.w1, d1, dh);
    if (reverse)
        for (double& v : dh) v = -v;
    const Vector da = sigmoid_deriv_mul(dh, a.h);
    add_into(g_enc.b_hidden, da);
    kern::add_outer(g_enc.w, da, x);

    return lr.value;
}

void apply_sgd(AcdcModel& model, const TiedAutoencoder& g) {
    const double lr = model.hyper.learning_rate, mu = model.hyper.momentum;
    sgd_momentum_step(model.dae.w, g.w, model.vel_dae.w, lr, mu);
    sgd_momentum_step(model.dae.b_hidden, g.b_hidden, model.vel_dae.b_hidden, lr, mu);
    sgd_momentum_step(model.dae.b_out, g.b_out, model.vel_dae.b_out, lr, mu);
}

void apply_sgd_head(AcdcModel& model, Head& head, Head& vel, const Head& g) {
    const double lr = model.hyper.learning_rate, mu = model.hyper.momentum;
    sgd_momentum_step(head.w1, g.w1, vel.w1, lr, mu);
    sgd_momentum_step(head.b1, g.b1, vel.b1, lr, mu);
    sgd_momentum_step(head.w2, g.w2, vel.w2, lr, mu);
    sgd_momentum_step(head.b2, g.b2, vel.b2, lr, mu);
}

void apply_sgd_encoder(AcdcModel& model, const EncoderGrads& g) {
    const double lr = model.hyper.learning_rate, mu = model.hyper.momentum;
    sgd_momentum_step(model.dae.w, g.w, model.vel_dae.w, lr, mu);
    sgd_momentum_step(model.dae.b_hidden, g.b_hidden, model.vel_dae.b_hidden, lr, mu);
}

}  // namespace

TiedAutoencoder zero_like(const TiedAutoencoder& p) {
    TiedAutoencoder z;
    z.w = Matrix(p.w.rows, p.w.cols);
    z.b_hidden.assign(p.b_hidden.size(), 0.0);
    z.b_out.assign(p.b_out.size(), 0.0);
    return z;
}

Head zero_like(const Head& p) {
    Head z;
    z.w1 = Matrix(p.w1.rows, p.w1.cols);
    z.b1.assign(p.b1.size(), 0.0);
    z.w2 = Matrix(p.w2.rows, p.w2.cols);
    z.b2.assign(p.b2.size(), 0.0);
    return z;
}

AcdcModel init_model(std::size_t u, std::size_t m, AblationFlags flags, std::uint64_t seed,
                     Hyper hyper) {
    require(u >= 2, "init_model: feature dim must be >= 2");
    require(m >= 2, "init_model: class count must be >= 2");

    AcdcModel model;
    model.u = u;
    model.m = m;
    model.flags = flags;
    model.hyper = hyper;
    model.rng_weights.seed(seed);
    model.rng_noise.seed(seed ^ 0x9e3779b97f4a7c15ull);

    const std::size_t r_dae = flags.dae_starts_single_node ? 1 : (u + 1) / 2;

    model.dae.w = xavier_sample(u, r_dae, model.rng_weights);
    model.dae.b_hidden.assign(r_dae, 0.0);
    model.dae.b_out.assign(u, 0.0);

    model.daa.w1 = xavier_sample(r_dae, 1, model.rng_weights);
    model.daa.b1.assign(1, 0.0);
    model.daa.w2 = xavier_sample(1, 1, model.rng_weights);
    model.daa.b2.assign(1, 0.0);

    model.disc.w1 = xavier_sample(r_dae, 1, model.rng_weights);
    model.disc.b1.assign(1, 0.0);
    model.disc.w2 = xavier_sample(1, m, model.rng_weights);
    model.disc.b2.assign(m, 0.0);

    model.vel_dae = zero_like(model.dae);
    model.vel_daa = zero_like(model.daa);
    model.vel_disc = zero_like(model.disc);

    model.moments_dae = InputMoments(u);
    model.moments_daa = InputMoments(u);
    model.moments_disc = InputMoments(u);

    validate_shapes(model);
    return model;
}

Vector encode(const AcdcModel& model, const Vector& x) {
    require(x.size() == model.u, "encode: input dimension mismatch");
    return sigmoid(affine(model.dae.w, x, model.dae.b_hidden));
}

Vector decode(const AcdcModel& model, const Vector& h) {
    require(h.size() == model.dae_width(), "decode: hidden dimension mismatch");
    Vector z(model.u);
    kern::affine_t(model.dae.w, h, model.dae.b_out, z);
    return sigmoid(z);
}

Vector mask_noise(const Vector& x, double frac, Rng& rng) {
    require(frac >= 0.0 && frac < 1.0, "mask_noise: fraction out of range");
    const auto k = static_cast<std::size_t>(
        std::llround(frac * static_cast<double>(x.size())));
    Vector out = x;
    if (k == 0) return out;
    // partial Fisher-Yates over index slots; first k slots get zeroed
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
        out[idx[i]] = 0.0;
    }
    return out;
}

Vector one_hot(std::size_t label, std::size_t m) {
    require(label < m, "one_hot: label out of range");
    Vector y(m, 0.0);
    y[label] = 1.0;
    return y;
}

double dae_term_grads(const AcdcModel& model, const Vector& input, const Vector& target,
                      TiedAutoencoder& g) {
    const Vector h = encode(model, input);
    const Vector xhat = decode(model, h);
    const LossResult lr = mse_loss(xhat, target);

    // decoder half: z_out[j] = sum_i W(i,j) h[i] + b_out[j]
    const Vector& d_out = lr.grad_preact;
    add_into(g.b_out, d_out);
    kern::add_outer(g.w, h, d_out);

    // encoder half through the tied weights
    Vector dh(model.dae_width());
    kern::matvec(model.dae.w, d_out, dh);
    const Vector da = sigmoid_deriv_mul(dh, h);
    add_into(g.b_hidden, da);
    kern::add_outer(g.w, da, input);

    return lr.value;
}

double dae_loss_grads(const AcdcModel& model, const Vector& xs_noisy, const Vector& xt_noisy,
                      const Vector& xs, const Vector& xt, TiedAutoencoder& g) {
    double loss = dae_term_grads(model, xs_noisy, xt, g);
    loss += dae_term_grads(model, xt_noisy, xs, g);
    return loss;
}

double daa_loss_grads(const AcdcModel& model, const Vector& xs, const Vector& xt, bool reverse,
                      Head& g_head, EncoderGrads& g_enc) {
    double loss = head_term_grads(model, model.daa, xs, Vector{0.0}, false, reverse, g_head, g_enc);
    loss += head_term_grads(model, model.daa, xt, Vector{1.0}, false, reverse, g_head, g_enc);
    return loss;
}

double disc_loss_grads(const AcdcModel& model, const Vector& x, const Vector& y_onehot,
                       Head& g_head, EncoderGrads& g_enc) {
    require(y_onehot.size() == model.m, "disc_loss_grads: label dimension mismatch");
    return head_term_grads(model, model.disc, x, y_onehot, true, false, g_head, g_enc);
}

void greedy_pretrain_step(AcdcModel& model, const Vector& x) {
    TiedAutoencoder g = zero_like(model.dae);
    dae_term_grads(model, x, x, g);
    apply_sgd(model, g);
}

double dae_learn(AcdcModel& model, const Vector& xs, const Vector& xt) {
    greedy_pretrain_step(model, xs);
    greedy_pretrain_step(model, xt);

    const Vector xs_noisy = mask_noise(xs, model.hyper.noise_fraction, model.rng_noise);
    const Vector xt_noisy = mask_noise(xt, model.hyper.noise_fraction, model.rng_noise);
    TiedAutoencoder g = zero_like(model.dae);
    const double loss = dae_loss_grads(model, xs_noisy, xt_noisy, xs, xt, g);
    apply_sgd(model, g);
    return loss;
}

double daa_learn(AcdcModel& model, const Vector& xs, const Vector& xt) {
    if (!model.flags.daa_enabled) return 0.0;
    Head g_head = zero_like(model.daa);
    EncoderGrads g_enc{Matrix(model.dae.w.rows, model.dae.w.cols),
                       Vector(model.dae.b_hidden.size(), 0.0)};
    const double loss = daa_loss_grads(model, xs, xt, /*reverse=*/true, g_head, g_enc);
    apply_sgd_head(model, model.daa, model.vel_daa, g_head);
    apply_sgd_encoder(model, g_enc);
    return loss;
}

double disc_learn(AcdcModel& model, const Vector& xs, const Vector& y_onehot) {
    Head g_head = zero_like(model.disc);
    EncoderGrads g_enc{Matrix(model.dae.w.rows, model.dae.w.cols),
                       Vector(model.dae.b_hidden.size(), 0.0)};
    const double loss = disc_loss_grads(model, xs, y_onehot, g_head, g_enc);
    apply_sgd_head(model, model.disc, model.vel_disc, g_head);
    apply_sgd_encoder(model, g_enc);
    return loss;
}

Losses learn_step(AcdcModel& model, const Vector& xs, const Vector& y_onehot, const Vector& xt) {
    Losses l;
    l.dae = dae_learn(model, xs, xt);
    l.daa = daa_learn(model, xs, xt);
    l.disc = disc_learn(model, xs, y_onehot);
    return l;
}

// One SPC assessment for a module: fold the sample into the moments, score
// the probit expectation against the target, and act on the decision. Grow
// wins when both conditions fire; pruning the last node is skipped.
AdaptEvents assess_and_adapt(AcdcModel& model, ModuleKind kind, const Vector& sample,
                             const Vector& target) {
    AdaptEvents ev;
    if (!model.flags.evolution_enabled) return ev;
    moments_of(model, kind).update(sample);

    const auto [ey, ey2] = expected_output(model, kind);
    const BiasVar bv = bias_variance(ey, ey2, target);

    SpcStats& spc = kind == ModuleKind::Dae   ? model.spc_dae
                    : kind == ModuleKind::Daa ? model.spc_daa
                                              : model.spc_disc;
    const SpcDecision dec = spc_step(spc, bv.bias, bv.var, model.hyper.spc_a1, model.hyper.spc_a2);

    if (dec.grow)
        apply_growth(model, kind, ev);
    else if (dec.prune)
        apply_prune_weakest(model, kind, ev);
    return ev;
}

AdaptEvents adapt_step(AcdcModel& model, const Vector& xs, const Vector& y_onehot,
                       const Vector& xt) {
    AdaptEvents ev;
    if (!model.flags.evolution_enabled) return ev;

    ev.add(assess_and_adapt(model, ModuleKind::Dae, xs, xt));
    ev.add(assess_and_adapt(model, ModuleKind::Dae, xt, xs));
    if (model.flags.daa_enabled) {
        ev.add(assess_and_adapt(model, ModuleKind::Daa, xs, Vector{0.0}));
        ev.add(assess_and_adapt(model, ModuleKind::Daa, xt, Vector{1.0}));
    }
    ev.add(assess_and_adapt(model, ModuleKind::Disc, xs, y_onehot));
    return ev;
}

void apply_growth(AcdcModel& model, ModuleKind kind, AdaptEvents& ev) {
    switch (kind) {
        case ModuleKind::Dae: {
            auto ds = dae_downstream(model);
            grow_node(dae_layer(model), ds, model.rng_weights);
            ++ev.grow_dae;
            break;
        }
        case ModuleKind::Daa: {
            auto ds = daa_downstream(model);
            grow_node(daa_layer(model), ds, model.rng_weights);
            ++ev.grow_daa;
            if (model.flags.daa_signals_disc) apply_growth(model, ModuleKind::Disc, ev);
            break;
        }
        case ModuleKind::Disc: {
            auto ds = disc_downstream(model);
            grow_node(disc_layer(model), ds, model.rng_weights);
            ++ev.grow_disc;
            break;
        }
    }
}

bool apply_prune_weakest(AcdcModel& model, ModuleKind kind, AdaptEvents& ev) {
    const InputMoments& mom = moments_of(model, kind);
    require(mom.count >= 1, "apply_prune_weakest: no samples accumulated");
    const Vector rescaled = probit_rescale(mom.mean, mom.variance());

    switch (kind) {
        case ModuleKind::Dae: {
            if (model.dae_width() < 2) return false;
            const std::size_t r = weakest_node(model.dae.w, model.dae.b_hidden, rescaled);
            auto ds = dae_downstream(model);
            prune_node(dae_layer(model), ds, r);
            ++ev.prune_dae;
            return true;
        }
        case ModuleKind::Daa: {
            if (model.daa_width() < 2) return false;
            const Vector eh = sigmoid(affine(model.dae.w, rescaled, model.dae.b_hidden));
            const std::size_t r = weakest_node(model.daa.w1, model.daa.b1, eh);
            auto ds = daa_downstream(model);
            prune_node(daa_layer(model), ds, r);
            ++ev.prune_daa;
            return true;
        }
        case ModuleKind::Disc: {
            if (model.disc_width() < 2) return false;
            const Vector eh = sigmoid(affine(model.dae.w, rescaled, model.dae.b_hidden));
            const std::size_t r = weakest_node(model.disc.w1, model.disc.b1, eh);
            auto ds = disc_downstream(model);
            prune_node(disc_layer(model), ds, r);
            ++ev.prune_disc;
            return true;
        }
    }
    return false;
}

Vector assessment_forward(const AcdcModel& model, ModuleKind kind, const Vector& x) {
    return propagate_expected(model, kind, x);
}

std::pair<Vector, Vector> expected_output(const AcdcModel& model, ModuleKind kind) {
    const InputMoments& mom = moments_of(model, kind);
    require(mom.count >= 1, "expected_output: no samples accumulated");
    const Vector var = mom.variance();
    Vector ey = propagate_expected(model, kind, probit_rescale(mom.mean, var));
    Vector ey2 = propagate_expected(model, kind, probit_rescale(mom.raw2mean, var));
    return {std::move(ey), std::move(ey2)};
}

std::pair<std::size_t, Vector> predict(const AcdcModel& model, const Vector& x) {
    const HeadActivations a = head_forward(model, model.disc, x, /*softmax_out=*/true);
    std::size_t best = 0;
    for (std::size_t k = 1; k < a.out.size(); ++k)
        if (a.out[k] > a.out[best]) best = k;
    return {best, a.out};
}

double daa_domain_score(const AcdcModel& model, const Vector& x) {
    return head_forward(model, model.daa, x, /*softmax_out=*/false).out[0];
}

double empirical_h_divergence(const AcdcModel& model, std::span<const Vector> source,
                              std::span<const Vector> target) {
    require(!source.empty() && !target.empty(), "empirical_h_divergence: empty window");
    std::size_t err_s = 0, err_t = 0;
    for (const Vector& x : source)
        if (daa_domain_score(model, x) >= 0.5) ++err_s;
    for (const Vector& x : target)
        if (daa_domain_score(model, x) < 0.5) ++err_t;
    const double sum = static_cast<double>(err_s) / static_cast<double>(source.size()) +
                       static_cast<double>(err_t) / static_cast<double>(target.size());
    // symmetric hypothesis class: the complement classifier is always available
    return 2.0 * std::abs(1.0 - sum);
}

std::uint64_t param_hash(const AcdcModel& model) {
    std::uint64_t h = fnv1a(&model.u, sizeof(model.u));
    h = fnv1a(&model.m, sizeof(model.m), h);
    h = hash_matrix(model.dae.w, h);
    h = hash_vector(model.dae.b_hidden, h);
    h = hash_vector(model.dae.b_out, h);
    for (const Head* head : {&model.daa, &model.disc}) {
        h = hash_matrix(head->w1, h);
        h = hash_vector(head->b1, h);
        h = hash_matrix(head->w2, h);
        h = hash_vector(head->b2, h);
    }
    return h;
}

void validate_shapes(const AcdcModel& model) {
    const std::size_t r_dae = model.dae_width();
    const std::size_t r_daa = model.daa_width();
    const std::size_t r_disc = model.disc_width();
    auto check = [](bool ok, const char* what) {
        if (!ok) throw std::logic_error(std::string("validate_shapes: ") + what);
    };
    check(r_dae >= 1 && r_daa >= 1 && r_disc >= 1, "width dropped below 1");
    check(model.dae.w.cols == model.u, "dae.w cols != u");
    check(model.dae.b_hidden.size() == r_dae, "dae.b_hidden size");
    check(model.dae.b_out.size() == model.u, "dae.b_out size");
    check(model.daa.w1.rows == r_daa && model.daa.w1.cols == r_dae, "daa.w1 shape");
    check(model.daa.b1.size() == r_daa, "daa.b1 size");
    check(model.daa.w2.rows == 1 && model.daa.w2.cols == r_daa, "daa.w2 shape");
    check(model.daa.b2.size() == 1, "daa.b2 size");
    check(model.disc.w1.rows == r_disc && model.disc.w1.cols == r_dae, "disc.w1 shape");
    check(model.disc.b1.size() == r_disc, "disc.b1 size");
    check(model.disc.w2.rows == model.m && model.disc.w2.cols == r_disc, "disc.w2 shape");
    check(model.disc.b2.size() == model.m, "disc.b2 size");

    auto same_shape_ae = [&](const TiedAutoencoder& a, const TiedAutoencoder& b) {
        return a.w.rows == b.w.rows && a.w.cols == b.w.cols &&
               a.b_hidden.size() == b.b_hidden.size() && a.b_out.size() == b.b_out.size();
    };
    auto same_shape_head = [&](const Head& a, const Head& b) {
        return a.w1.rows == b.w1.rows && a.w1.cols == b.w1.cols && a.b1.size() == b.b1.size() &&
               a.w2.rows == b.w2.rows && a.w2.cols == b.w2.cols && a.b2.size() == b.b2.size();
    };
    check(same_shape_ae(model.dae, model.vel_dae), "dae velocity shape");
    check(same_shape_head(model.daa, model.vel_daa), "daa velocity shape");
    check(same_shape_head(model.disc, model.vel_disc), "disc velocity shape");

    check(model.moments_dae.dim() == model.u && model.moments_daa.dim() == model.u &&
              model.moments_disc.dim() == model.u,
          "moment dims");
}

}  // namespace acdc
