#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acdc/model.hpp"
#include "acdc/rand.hpp"

namespace acdc {

enum class Domain { Source, Target };

struct Sample {
    Vector features;
    int label = -1;  // -1: unlabeled
    Domain domain = Domain::Source;
    std::size_t index = 0;  // global arrival order
};

// One processing batch. `pairs` maps positions: the larger side appears
// exactly once each, the smaller side is reused by whole shuffled cycles.
struct WindowPair {
    std::vector<Sample> source;
    std::vector<Sample> target;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct ThroughputState {
    std::size_t total_source = 0, total_target = 0;
    std::size_t seen_source = 0, seen_target = 0;

    std::size_t remaining_source() const { return total_source - seen_source; }
    std::size_t remaining_target() const { return total_target - seen_target; }
    bool exhausted() const { return remaining_source() == 0 && remaining_target() == 0; }
};

// Draws Source with probability remaining_source / remaining_total and
// advances the corresponding counter. An exhausted stream forces the other;
// nullopt when both are done.
std::optional<Domain> next_sample_domain(ThroughputState& state, Rng& rng);

// Single-pass sample producer; io provides file-backed implementations.
class SampleSource {
  public:
    virtual ~SampleSource() = default;
    virtual std::optional<Sample> next() = 0;
    virtual void skip(std::size_t n) = 0;
};

// In-memory source, used by tests and the synthetic generators.
class MemorySource final : public SampleSource {
  public:
    explicit MemorySource(std::vector<Sample> samples) : samples_(std::move(samples)) {}
    std::optional<Sample> next() override {
        if (pos_ >= samples_.size()) return std::nullopt;
        return samples_[pos_++];
    }
    void skip(std::size_t n) override { pos_ += n; }

  private:
    std::vector<Sample> samples_;
    std::size_t pos_ = 0;
};

// Reads up to `window_size` samples, interleaved by next_sample_domain, and
// splits them by domain. The tail of the stream yields a smaller window.
WindowPair fill_window(SampleSource& source, SampleSource& target, ThroughputState& state,
                       std::size_t window_size, Rng& rng);

// Pairs the two sides positionally after extending the smaller side with
// independent shuffled copies of itself.
void pair_permute(WindowPair& window, Rng& rng);

struct WindowRow {
    std::size_t window = 0;
    double target_acc_window = 0, target_acc_cum = 0;
    double source_acc_window = 0, source_acc_cum = 0;
    double loss_dae = 0, loss_daa = 0, loss_disc = 0;
    std::size_t r_dae = 0, r_daa = 0, r_disc = 0;
    int grow_dae = 0, prune_dae = 0, grow_daa = 0, prune_daa = 0, grow_disc = 0, prune_disc = 0;
    double h_divergence = 0;
    std::size_t source_seen = 0, target_seen = 0;
    double wall_ms = 0;  // kept out of the metrics csv (not reproducible)
};

struct MetricsTrace {
    std::vector<WindowRow> rows;
};

// Mutable protocol state; checkpointed so a resumed run replays the exact
// remaining trace.
struct RunState {
    std::size_t next_window = 0;
    ThroughputState throughput;
    std::size_t target_correct = 0, target_scored = 0;
    std::size_t source_correct = 0, source_scored = 0;
    Rng rng_stream, rng_pair;
};

struct RunParams {
    std::size_t window_size = 1000;
    int epochs = 1;  // structural adaptation happens in the first one only
    std::uint64_t seed_stream = 2;
    std::size_t total_source = 0, total_target = 0;
    std::size_t checkpoint_every = 0;  // windows between checkpoints; 0 = off
    std::string checkpoint_path;
};

struct RunHooks {
    // After the prediction pass of a window, before any training on it.
    // Returning false aborts the run (window is not trained).
    std::function<bool(std::size_t window, std::uint64_t params_hash)> after_predict;
    std::function<void(std::size_t window, const std::vector<int>& target_predictions)>
        on_target_predictions;
    std::function<void(std::size_t window, std::uint64_t params_hash)> after_window;
};

// Prequential test-then-train loop: per window, predict everything first,
// then pair-permute and run `epochs` passes (adaptation only in the first).
// Windows are never revisited. `resume` continues a checkpointed run; the
// readers are fresh and get skipped forward internally.
void prequential_run(AcdcModel& model, SampleSource& source, SampleSource& target,
                     const RunParams& params, MetricsTrace& trace, const RunHooks& hooks = {},
                     const RunState* resume = nullptr);

}  // namespace acdc
