#pragma once

#include <cstdint>
#include <string>

#include "acdc/model.hpp"

namespace acdc {

// Everything a run needs, serializable as flat key=value lines so an output
// directory can be replayed byte-for-byte. Precedence: CLI flags over file
// over these defaults.
struct RunConfig {
    std::size_t window_size = 1000;
    int epochs = 1;
    double learning_rate = 0.01;
    double momentum = 0.95;
    double spc_a1 = 1.25;
    double spc_a2 = 0.75;
    double noise_fraction = 0.10;
    std::uint64_t seed_model = 1;
    std::uint64_t seed_stream = 2;
    std::uint64_t seed_drift = 3;
    bool ablate_daa = false;          // study A: no adversarial module
    bool fixed_structure = false;     // study B: no width evolution
    bool dae_single_node = false;     // study C: autoencoder starts at one node
    bool no_daa_disc_signal = false;  // study D: daa growth does not grow disc
    std::string source_manifest;
    std::string target_manifest;
    std::string out_dir = "run-out";
    std::size_t checkpoint_every = 0;
    std::string resume_from;

    AblationFlags flags() const {
        return {!ablate_daa, !fixed_structure, dae_single_node, !no_daa_disc_signal};
    }
    Hyper hyper() const {
        return {learning_rate, momentum, spc_a1, spc_a2, noise_fraction};
    }
};

RunConfig load_config_file(const std::string& path, RunConfig base = {});
void write_config(const RunConfig& cfg, const std::string& path);

}  // namespace acdc
