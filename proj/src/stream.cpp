#include "acdc/stream.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acdc/io.hpp"

namespace acdc {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double ratio_or_nan(std::size_t num, std::size_t den) {
    return den == 0 ? kNan : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

std::optional<Domain> next_sample_domain(ThroughputState& state, Rng& rng) {
    const std::size_t rs = state.remaining_source();
    const std::size_t rt = state.remaining_target();
    if (rs == 0 && rt == 0) return std::nullopt;

    Domain d;
    if (rs == 0) {
        d = Domain::Target;
    } else if (rt == 0) {
        d = Domain::Source;
    } else {
        const double p_source = static_cast<double>(rs) / static_cast<double>(rs + rt);
        d = uniform01(rng) < p_source ? Domain::Source : Domain::Target;
    }
    if (d == Domain::Source)
        ++state.seen_source;
    else
        ++state.seen_target;
    return d;
}

WindowPair fill_window(SampleSource& source, SampleSource& target, ThroughputState& state,
                       std::size_t window_size, Rng& rng) {
    require(window_size >= 1, "fill_window: window size must be positive");
    WindowPair w;
    for (std::size_t i = 0; i < window_size; ++i) {
        const auto dom = next_sample_domain(state, rng);
        if (!dom) break;
        SampleSource& reader = *dom == Domain::Source ? source : target;
        auto s = reader.next();
        if (!s) throw std::runtime_error("fill_window: stream ended before its declared size");
        s->domain = *dom;
        s->index = state.seen_source + state.seen_target - 1;
        (*dom == Domain::Source ? w.source : w.target).push_back(std::move(*s));
    }
    return w;
}

void pair_permute(WindowPair& window, Rng& rng) {
    require(!window.source.empty() && !window.target.empty(),
            "pair_permute: both sides must be nonempty");
    const bool source_major = window.source.size() >= window.target.size();
    const std::size_t major = std::max(window.source.size(), window.target.size());
    const std::size_t minor = std::min(window.source.size(), window.target.size());

    // Whole shuffled cycles of the smaller side, truncated to the larger
    // side's length: every minor sample is used floor or ceil(major/minor)
    // times.
    std::vector<std::size_t> cycle(minor);
    std::vector<std::size_t> seq;
    seq.reserve(major);
    while (seq.size() < major) {
        for (std::size_t i = 0; i < minor; ++i) cycle[i] = i;
        fisher_yates(cycle, rng);
        for (std::size_t i = 0; i < minor && seq.size() < major; ++i) seq.push_back(cycle[i]);
    }

    window.pairs.clear();
    window.pairs.reserve(major);
    for (std::size_t i = 0; i < major; ++i) {
        if (source_major)
            window.pairs.emplace_back(i, seq[i]);
        else
            window.pairs.emplace_back(seq[i], i);
    }
}

void prequential_run(AcdcModel& model, SampleSource& source, SampleSource& target,
                     const RunParams& params, MetricsTrace& trace, const RunHooks& hooks,
                     const RunState* resume) {
    require(params.window_size >= 2, "prequential_run: window size must be >= 2");
    require(params.epochs >= 1, "prequential_run: epochs must be >= 1");

    RunState st;
    if (resume) {
        st = *resume;
        source.skip(st.throughput.seen_source);
        target.skip(st.throughput.seen_target);
    } else {
        st.throughput.total_source = params.total_source;
        st.throughput.total_target = params.total_target;
        st.rng_stream.seed(params.seed_stream);
        st.rng_pair.seed(params.seed_stream ^ 0xa0761d6478bd642full);
    }

    while (!st.throughput.exhausted()) {
        const auto t0 = std::chrono::steady_clock::now();
        WindowPair w =
            fill_window(source, target, st.throughput, params.window_size, st.rng_stream);
        if (w.source.empty() && w.target.empty()) break;

        WindowRow row;
        row.window = st.next_window;

        // Test phase: score everything before this window touches the model.
        std::size_t tc = 0, ts = 0, sc = 0, ss = 0;
        std::vector<int> target_preds;
        target_preds.reserve(w.target.size());
        for (const Sample& s : w.target) {
            const auto [cls, probs] = predict(model, s.features);
            target_preds.push_back(static_cast<int>(cls));
            if (s.label >= 0) {
                ++ts;
                if (static_cast<int>(cls) == s.label) ++tc;
            }
        }
        for (const Sample& s : w.source) {
            const auto [cls, probs] = predict(model, s.features);
            ++ss;
            if (static_cast<int>(cls) == s.label) ++sc;
        }
        st.target_correct += tc;
        st.target_scored += ts;
        st.source_correct += sc;
        st.source_scored += ss;

        row.target_acc_window = ratio_or_nan(tc, ts);
        row.target_acc_cum = ratio_or_nan(st.target_correct, st.target_scored);
        row.source_acc_window = ratio_or_nan(sc, ss);
        row.source_acc_cum = ratio_or_nan(st.source_correct, st.source_scored);

        if (!w.source.empty() && !w.target.empty()) {
            std::vector<Vector> fs, ft;
            fs.reserve(w.source.size());
            ft.reserve(w.target.size());
            for (const Sample& s : w.source) fs.push_back(s.features);
            for (const Sample& s : w.target) ft.push_back(s.features);
            row.h_divergence = empirical_h_divergence(model, fs, ft);
        } else {
            row.h_divergence = kNan;
        }

        if (hooks.on_target_predictions) hooks.on_target_predictions(row.window, target_preds);
        if (hooks.after_predict && !hooks.after_predict(row.window, param_hash(model))) return;

        // Train phase.
        AdaptEvents events;
        double sum_dae = 0, sum_daa = 0, sum_disc = 0;
        std::size_t steps = 0;
        if (!w.source.empty() && !w.target.empty()) {
            pair_permute(w, st.rng_pair);
            for (int e = 0; e < params.epochs; ++e) {
                for (const auto& [si, ti] : w.pairs) {
                    const Sample& s = w.source[si];
                    const Sample& t = w.target[ti];
                    if (s.label < 0)
                        throw std::runtime_error("prequential_run: unlabeled source sample");
                    const Vector y = one_hot(static_cast<std::size_t>(s.label), model.m);
                    if (e == 0) events.add(adapt_step(model, s.features, y, t.features));
                    const Losses l = learn_step(model, s.features, y, t.features);
                    sum_dae += l.dae;
                    sum_daa += l.daa;
                    sum_disc += l.disc;
                    ++steps;
                }
            }
            row.loss_dae = sum_dae / static_cast<double>(steps);
            row.loss_daa = sum_daa / static_cast<double>(steps);
            row.loss_disc = sum_disc / static_cast<double>(steps);
        } else if (!w.source.empty()) {
            // No targets arrived: train the discriminator on what exists.
            for (int e = 0; e < params.epochs; ++e) {
                for (const Sample& s : w.source) {
                    if (s.label < 0)
                        throw std::runtime_error("prequential_run: unlabeled source sample");
                    const Vector y = one_hot(static_cast<std::size_t>(s.label), model.m);
                    if (e == 0) events.add(assess_and_adapt(model, ModuleKind::Disc, s.features, y));
                    sum_disc += disc_learn(model, s.features, y);
                    ++steps;
                }
            }
            row.loss_dae = kNan;
            row.loss_daa = kNan;
            row.loss_disc = sum_disc / static_cast<double>(steps);
        } else {
            // No source samples: predictions were logged, nothing to train on.
            row.loss_dae = kNan;
            row.loss_daa = kNan;
            row.loss_disc = kNan;
        }

        row.r_dae = model.dae_width();
        row.r_daa = model.daa_width();
        row.r_disc = model.disc_width();
        row.grow_dae = events.grow_dae;
        row.prune_dae = events.prune_dae;
        row.grow_daa = events.grow_daa;
        row.prune_daa = events.prune_daa;
        row.grow_disc = events.grow_disc;
        row.prune_disc = events.prune_disc;
        row.source_seen = st.throughput.seen_source;
        row.target_seen = st.throughput.seen_target;
        row.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();

        trace.rows.push_back(row);
        if (hooks.after_window) hooks.after_window(row.window, param_hash(model));

        ++st.next_window;
        if (params.checkpoint_every > 0 && !params.checkpoint_path.empty() &&
            st.next_window % params.checkpoint_every == 0)
            save_checkpoint(model, params.checkpoint_path, &st);
    }
}

}  // namespace acdc
