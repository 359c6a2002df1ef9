#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "acdc/evolving.hpp"
#include "acdc/linalg.hpp"
#include "acdc/nn.hpp"
#include "acdc/rand.hpp"

namespace acdc {

// Ablation toggles. Defaults run the full system.
struct AblationFlags {
    bool daa_enabled = true;        // off: no adversarial module at all
    bool evolution_enabled = true;  // off: widths stay fixed forever
    bool dae_starts_single_node = false;
    bool daa_signals_disc = true;   // a daa growth also grows disc
};

struct Hyper {
    double learning_rate = 0.01;
    double momentum = 0.95;
    double spc_a1 = 1.25;
    double spc_a2 = 0.75;
    double noise_fraction = 0.10;
};

// Tied-weight autoencoder: encode h = s(W x + b_hidden), decode through the
// transpose, xhat = s(W^T h + b_out).
struct TiedAutoencoder {
    Matrix w;  // hidden x input
    Vector b_hidden;
    Vector b_out;  // input-dim
};

// A head on top of the shared encoder: one evolving logistic hidden layer
// plus an output map (logistic for the domain adapter, softmax for the
// discriminator).
struct Head {
    Matrix w1;  // hidden x encoder-width
    Vector b1;
    Matrix w2;  // outputs x hidden
    Vector b2;
};

struct EncoderGrads {
    Matrix w;
    Vector b_hidden;
};

enum class ModuleKind { Dae, Daa, Disc };

struct AdaptEvents {
    int grow_dae = 0, prune_dae = 0;
    int grow_daa = 0, prune_daa = 0;
    int grow_disc = 0, prune_disc = 0;
    int grows() const { return grow_dae + grow_daa + grow_disc; }
    int prunes() const { return prune_dae + prune_daa + prune_disc; }
    void add(const AdaptEvents& o) {
        grow_dae += o.grow_dae;
        prune_dae += o.prune_dae;
        grow_daa += o.grow_daa;
        prune_daa += o.prune_daa;
        grow_disc += o.grow_disc;
        prune_disc += o.prune_disc;
    }
};

struct Losses {
    double dae = 0.0;
    double daa = 0.0;
    double disc = 0.0;
    double total() const { return dae + daa + disc; }
};

struct AcdcModel {
    std::size_t u = 0;  // feature dim
    std::size_t m = 0;  // class count
    AblationFlags flags;
    Hyper hyper;

    TiedAutoencoder dae;
    Head daa;   // output dim 1: 0 = source, 1 = target
    Head disc;  // output dim m

    // Momentum mirrors, always shape-identical to the parameters.
    TiedAutoencoder vel_dae;
    Head vel_daa, vel_disc;

    // Input statistics per module: dae and daa see both streams, disc sees
    // only labeled source samples.
    InputMoments moments_dae, moments_daa, moments_disc;
    SpcStats spc_dae, spc_daa, spc_disc;

    Rng rng_weights;  // initialization and node growth
    Rng rng_noise;    // masking noise

    std::size_t dae_width() const { return dae.w.rows; }
    std::size_t daa_width() const { return daa.w1.rows; }
    std::size_t disc_width() const { return disc.w1.rows; }
};

AcdcModel init_model(std::size_t u, std::size_t m, AblationFlags flags, std::uint64_t seed,
                     Hyper hyper = {});

Vector encode(const AcdcModel& model, const Vector& x);
Vector decode(const AcdcModel& model, const Vector& h);

// Zeroes round(frac*dim) uniformly chosen coordinates.
Vector mask_noise(const Vector& x, double frac, Rng& rng);

Vector one_hot(std::size_t label, std::size_t m);

// --- loss/gradient cores (exact analytic gradients; exercised against
// --- central differences by the verification suite) ---

// Accumulates tied-weight reconstruction gradients for input -> target into
// g; returns the mse loss.
double dae_term_grads(const AcdcModel& model, const Vector& input, const Vector& target,
                      TiedAutoencoder& g);

// Both directions of the paired reconstruction loss:
//   mse(dec(enc(xs_noisy)), xt) + mse(dec(enc(xt_noisy)), xs)
double dae_loss_grads(const AcdcModel& model, const Vector& xs_noisy, const Vector& xt_noisy,
                      const Vector& xs, const Vector& xt, TiedAutoencoder& g);

// Domain classification loss d'(xs) -> 0, d'(xt) -> 1. With reverse set the
// encoder gradient is sign-flipped at the encoder boundary (gradient
// reversal); head gradients are unaffected.
double daa_loss_grads(const AcdcModel& model, const Vector& xs, const Vector& xt, bool reverse,
                      Head& g_head, EncoderGrads& g_enc);

double disc_loss_grads(const AcdcModel& model, const Vector& x, const Vector& y_onehot,
                       Head& g_head, EncoderGrads& g_enc);

// --- training steps ---

// One clean self-reconstruction step (x -> x), encoder/decoder only.
void greedy_pretrain_step(AcdcModel& model, const Vector& x);

// Greedy pre-training pass on both samples, then one noisy tied-weight step
// on the paired loss. Returns the paired loss.
double dae_learn(AcdcModel& model, const Vector& xs, const Vector& xt);

// Adversarial step: head descends, encoder ascends via reversal. Returns 0
// and does nothing when the module is ablated.
double daa_learn(AcdcModel& model, const Vector& xs, const Vector& xt);

double disc_learn(AcdcModel& model, const Vector& xs, const Vector& y_onehot);

// Full learning pass for one pair, in fixed order: dae, daa, disc.
Losses learn_step(AcdcModel& model, const Vector& xs, const Vector& y_onehot, const Vector& xt);

// Structural adaptation for one pair (first internal epoch only): updates
// module input moments, runs the probit bias/variance assessment through
// the SPC conditions, and applies node growth/pruning.
AdaptEvents adapt_step(AcdcModel& model, const Vector& xs, const Vector& y_onehot,
                       const Vector& xt);

// One SPC assessment for a single module; adapt_step is five of these.
// Windows with no target samples assess only the discriminator.
AdaptEvents assess_and_adapt(AcdcModel& model, ModuleKind kind, const Vector& sample,
                             const Vector& target);

// Structural events routed through the same wiring the adaptation step
// uses (a daa growth still signals disc when that flag is on).
void apply_growth(AcdcModel& model, ModuleKind kind, AdaptEvents& ev);
// Removes the weakest node by expected activation; refuses on a last node
// (returns false). Needs at least one accumulated moment sample.
bool apply_prune_weakest(AcdcModel& model, ModuleKind kind, AdaptEvents& ev);

// Expected module output under the probit approximation, from the module's
// accumulated input moments. Returns {E[y], E[y^2]}; E[y^2] re-runs the
// propagation with the second raw moment in place of the mean.
std::pair<Vector, Vector> expected_output(const AcdcModel& model, ModuleKind kind);

// Plain forward pass of the assessment graph (what expected_output
// propagates through) evaluated at a concrete input.
Vector assessment_forward(const AcdcModel& model, ModuleKind kind, const Vector& x);

std::pair<std::size_t, Vector> predict(const AcdcModel& model, const Vector& x);

// Domain score in [0,1]; >= 0.5 reads as "target".
double daa_domain_score(const AcdcModel& model, const Vector& x);

// Empirical H-divergence of two windows under the current domain adapter,
// in [0, 2]. Diagnostic only.
double empirical_h_divergence(const AcdcModel& model, std::span<const Vector> source,
                              std::span<const Vector> target);

std::uint64_t param_hash(const AcdcModel& model);

// Throws if any matrix/vector shape disagrees with the widths.
void validate_shapes(const AcdcModel& model);

TiedAutoencoder zero_like(const TiedAutoencoder& p);
Head zero_like(const Head& p);

}  // namespace acdc
