#include "acdc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace acdc {

namespace {

constexpr double kFdEps = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr double kProbitTol = 0.05;

struct NamedSpan {
    const char* name;
    std::span<double> analytic;  // same layout as the parameter span
    std::span<double> params;
};

double max_rel_err(const std::function<double()>& loss, const std::vector<NamedSpan>& blocks,
                   std::string* where) {
    double worst = 0.0;
    for (const auto& blk : blocks) {
        const Vector fd = finite_diff_grad(loss, blk.params, kFdEps);
        for (std::size_t i = 0; i < fd.size(); ++i) {
            const double e = grad_rel_err(blk.analytic[i], fd[i]);
            if (e > worst) {
                worst = e;
                if (where) {
                    std::ostringstream os;
                    os << blk.name << "[" << i << "] analytic=" << blk.analytic[i]
                       << " numeric=" << fd[i];
                    *where = os.str();
                }
            }
        }
    }
    return worst;
}

void jitter(std::span<double> v, Rng& rng, double scale) {
    for (double& x : v) x += uniform_range(rng, -scale, scale);
}

// A model in a generic position: random dims, a few extra nodes grown
// through the regular path, then all parameters perturbed so no weight
// sits at an exact zero.
AcdcModel random_model(Rng& rng, std::size_t max_u = 8, std::size_t max_width = 6,
                       std::size_t max_m = 4) {
    const std::size_t u = 2 + uniform_index(rng, max_u - 1);
    const std::size_t m = 2 + uniform_index(rng, max_m - 1);
    AcdcModel model = init_model(u, m, AblationFlags{}, rng());

    AdaptEvents ev;
    model.flags.daa_signals_disc = false;  // keep widths independent here
    while (model.daa_width() < 1 + uniform_index(rng, max_width))
        apply_growth(model, ModuleKind::Daa, ev);
    while (model.disc_width() < 1 + uniform_index(rng, max_width))
        apply_growth(model, ModuleKind::Disc, ev);
    while (model.dae_width() < 1 + uniform_index(rng, max_width))
        apply_growth(model, ModuleKind::Dae, ev);
    model.flags.daa_signals_disc = true;

    jitter(model.dae.w.data, rng, 0.4);
    jitter(model.dae.b_hidden, rng, 0.4);
    jitter(model.dae.b_out, rng, 0.4);
    for (Head* h : {&model.daa, &model.disc}) {
        jitter(h->w1.data, rng, 0.4);
        jitter(h->b1, rng, 0.4);
        jitter(h->w2.data, rng, 0.4);
        jitter(h->b2, rng, 0.4);
    }
    return model;
}

Vector random_unit_vec(Rng& rng, std::size_t n) {
    Vector v(n);
    for (double& x : v) x = uniform01(rng);
    return v;
}

void set_moments(InputMoments& mom, const Vector& mean, const Vector& var, std::size_t count) {
    mom.count = count;
    mom.mean = mean;
    mom.m2.resize(mean.size());
    mom.raw2mean.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        mom.m2[i] = var[i] * static_cast<double>(count);
        mom.raw2mean[i] = mean[i] * mean[i] + var[i];
    }
}

}  // namespace

Vector finite_diff_grad(const std::function<double()>& f, std::span<double> params, double eps) {
    require(eps > 0.0, "finite_diff_grad: eps must be positive");
    Vector grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double fp = f();
        params[i] = saved - eps;
        const double fm = f();
        params[i] = saved;
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

double grad_rel_err(double analytic, double numeric, double floor_) {
    return std::abs(analytic - numeric) /
           std::max({std::abs(analytic), std::abs(numeric), floor_});
}

std::vector<CheckResult> run_gradient_checks(std::uint64_t seed, int configs) {
    Rng rng(seed);
    CheckResult dae{"gradient: reconstruction loss", true, 0.0, ""};
    CheckResult daa{"gradient: domain loss", true, 0.0, ""};
    CheckResult disc{"gradient: class loss", true, 0.0, ""};

    for (int c = 0; c < configs; ++c) {
        AcdcModel model = random_model(rng);
        const Vector xs = random_unit_vec(rng, model.u);
        const Vector xt = random_unit_vec(rng, model.u);
        const Vector ys = one_hot(uniform_index(rng, model.m), model.m);
        const Vector xs_noisy = mask_noise(xs, model.hyper.noise_fraction, rng);
        const Vector xt_noisy = mask_noise(xt, model.hyper.noise_fraction, rng);

        {
            TiedAutoencoder g = zero_like(model.dae);
            dae_loss_grads(model, xs_noisy, xt_noisy, xs, xt, g);
            auto loss = [&] {
                TiedAutoencoder scratch = zero_like(model.dae);
                return dae_loss_grads(model, xs_noisy, xt_noisy, xs, xt, scratch);
            };
            std::string where;
            const double err = max_rel_err(
                loss,
                {{"dae.w", g.w.data, model.dae.w.data},
                 {"dae.b_hidden", g.b_hidden, model.dae.b_hidden},
                 {"dae.b_out", g.b_out, model.dae.b_out}},
                &where);
            if (err > dae.metric) {
                dae.metric = err;
                dae.detail = where;
            }
        }
        {
            Head g = zero_like(model.daa);
            EncoderGrads ge{Matrix(model.dae.w.rows, model.dae.w.cols),
                            Vector(model.dae.b_hidden.size(), 0.0)};
            daa_loss_grads(model, xs, xt, /*reverse=*/false, g, ge);
            auto loss = [&] {
                Head sg = zero_like(model.daa);
                EncoderGrads sge{Matrix(model.dae.w.rows, model.dae.w.cols),
                                 Vector(model.dae.b_hidden.size(), 0.0)};
                return daa_loss_grads(model, xs, xt, false, sg, sge);
            };
            std::string where;
            const double err = max_rel_err(loss,
                                           {{"daa.w1", g.w1.data, model.daa.w1.data},
                                            {"daa.b1", g.b1, model.daa.b1},
                                            {"daa.w2", g.w2.data, model.daa.w2.data},
                                            {"daa.b2", g.b2, model.daa.b2},
                                            {"enc.w", ge.w.data, model.dae.w.data},
                                            {"enc.b", ge.b_hidden, model.dae.b_hidden}},
                                           &where);
            if (err > daa.metric) {
                daa.metric = err;
                daa.detail = where;
            }
        }
        {
            Head g = zero_like(model.disc);
            EncoderGrads ge{Matrix(model.dae.w.rows, model.dae.w.cols),
                            Vector(model.dae.b_hidden.size(), 0.0)};
            disc_loss_grads(model, xs, ys, g, ge);
            auto loss = [&] {
                Head sg = zero_like(model.disc);
                EncoderGrads sge{Matrix(model.dae.w.rows, model.dae.w.cols),
                                 Vector(model.dae.b_hidden.size(), 0.0)};
                return disc_loss_grads(model, xs, ys, sg, sge);
            };
            std::string where;
            const double err = max_rel_err(loss,
                                           {{"disc.w1", g.w1.data, model.disc.w1.data},
                                            {"disc.b1", g.b1, model.disc.b1},
                                            {"disc.w2", g.w2.data, model.disc.w2.data},
                                            {"disc.b2", g.b2, model.disc.b2},
                                            {"enc.w", ge.w.data, model.dae.w.data},
                                            {"enc.b", ge.b_hidden, model.dae.b_hidden}},
                                           &where);
            if (err > disc.metric) {
                disc.metric = err;
                disc.detail = where;
            }
        }
    }

    dae.pass = dae.metric < kGradTol;
    daa.pass = daa.metric < kGradTol;
    disc.pass = disc.metric < kGradTol;
    return {dae, daa, disc};
}

CheckResult run_grl_check(std::uint64_t seed) {
    Rng rng(seed);
    CheckResult res{"gradient reversal: exact negation", true, 0.0, ""};
    for (int c = 0; c < 10; ++c) {
        AcdcModel model = random_model(rng);
        const Vector xs = random_unit_vec(rng, model.u);
        const Vector xt = random_unit_vec(rng, model.u);

        Head gf = zero_like(model.daa), gr = zero_like(model.daa);
        EncoderGrads ef{Matrix(model.dae.w.rows, model.dae.w.cols),
                        Vector(model.dae.b_hidden.size(), 0.0)};
        EncoderGrads er = ef;
        const double lf = daa_loss_grads(model, xs, xt, false, gf, ef);
        const double lr = daa_loss_grads(model, xs, xt, true, gr, er);

        bool ok = lf == lr;
        for (std::size_t i = 0; i < ef.w.data.size() && ok; ++i)
            ok = er.w.data[i] == -ef.w.data[i];
        for (std::size_t i = 0; i < ef.b_hidden.size() && ok; ++i)
            ok = er.b_hidden[i] == -ef.b_hidden[i];
        for (std::size_t i = 0; i < gf.w1.data.size() && ok; ++i)
            ok = gr.w1.data[i] == gf.w1.data[i];
        if (!ok) {
            res.pass = false;
            res.detail = "mismatch in config " + std::to_string(c);
            return res;
        }
    }
    return res;
}

std::vector<CheckResult> run_probit_checks(std::uint64_t seed, int nets, std::size_t draws) {
    Rng rng(seed);
    std::vector<CheckResult> out;
    const ModuleKind kinds[] = {ModuleKind::Dae, ModuleKind::Daa, ModuleKind::Disc};
    const char* names[] = {"probit vs monte-carlo: dae", "probit vs monte-carlo: daa",
                           "probit vs monte-carlo: disc"};
    double worst[3] = {0.0, 0.0, 0.0};

    for (int n = 0; n < nets; ++n) {
        AcdcModel model = random_model(rng, 6, 8, 4);
        Vector mean(model.u), var(model.u);
        for (std::size_t i = 0; i < model.u; ++i) {
            mean[i] = uniform_range(rng, -1.0, 1.0);
            var[i] = uniform_range(rng, 0.0, 1.0);
        }
        set_moments(model.moments_dae, mean, var, 1000);
        set_moments(model.moments_daa, mean, var, 1000);
        set_moments(model.moments_disc, mean, var, 1000);

        const int k = n % 3;
        const auto [ey, ey2] = expected_output(model, kinds[k]);

        Vector mc(ey.size(), 0.0);
        Vector x(model.u);
        for (std::size_t d = 0; d < draws; ++d) {
            for (std::size_t i = 0; i < model.u; ++i)
                x[i] = mean[i] + std::sqrt(var[i]) * normal01(rng);
            const Vector y = assessment_forward(model, kinds[k], x);
            for (std::size_t i = 0; i < y.size(); ++i) mc[i] += y[i];
        }
        for (double& v : mc) v /= static_cast<double>(draws);

        for (std::size_t i = 0; i < ey.size(); ++i)
            worst[k] = std::max(worst[k], std::abs(ey[i] - mc[i]));
    }

    for (int k = 0; k < 3; ++k) {
        CheckResult r{names[k], worst[k] < kProbitTol, worst[k], ""};
        out.push_back(r);
    }
    return out;
}

std::vector<CheckResult> run_verification_suite(std::uint64_t seed) {
    std::vector<CheckResult> all = run_gradient_checks(seed);
    all.push_back(run_grl_check(seed + 1));
    const auto probit = run_probit_checks(seed + 2);
    all.insert(all.end(), probit.begin(), probit.end());
    return all;
}

}  // namespace acdc
