#include "acdc/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace acdc {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }

    auto get_u64 = [&](const char* k, std::uint64_t& out) {
        if (auto it = kv.find(k); it != kv.end()) out = std::stoull(it->second);
    };
    auto get_size = [&](const char* k, std::size_t& out) {
        if (auto it = kv.find(k); it != kv.end()) out = std::stoull(it->second);
    };
    auto get_int = [&](const char* k, int& out) {
        if (auto it = kv.find(k); it != kv.end()) out = std::stoi(it->second);
    };
    auto get_double = [&](const char* k, double& out) {
        if (auto it = kv.find(k); it != kv.end()) out = std::stod(it->second);
    };
    auto get_bool = [&](const char* k, bool& out) {
        if (auto it = kv.find(k); it != kv.end()) {
            if (it->second == "true" || it->second == "1")
                out = true;
            else if (it->second == "false" || it->second == "0")
                out = false;
            else
                throw std::runtime_error(std::string("config key '") + k + "' must be boolean");
        }
    };
    auto get_str = [&](const char* k, std::string& out) {
        if (auto it = kv.find(k); it != kv.end()) out = it->second;
    };

    RunConfig c = base;
    get_size("window_size", c.window_size);
    get_int("epochs", c.epochs);
    get_double("learning_rate", c.learning_rate);
    get_double("momentum", c.momentum);
    get_double("spc_a1", c.spc_a1);
    get_double("spc_a2", c.spc_a2);
    get_double("noise_fraction", c.noise_fraction);
    get_u64("seed_model", c.seed_model);
    get_u64("seed_stream", c.seed_stream);
    get_u64("seed_drift", c.seed_drift);
    get_bool("ablate_daa", c.ablate_daa);
    get_bool("fixed_structure", c.fixed_structure);
    get_bool("dae_single_node", c.dae_single_node);
    get_bool("no_daa_disc_signal", c.no_daa_disc_signal);
    get_str("source_manifest", c.source_manifest);
    get_str("target_manifest", c.target_manifest);
    get_str("out_dir", c.out_dir);
    get_size("checkpoint_every", c.checkpoint_every);
    get_str("resume_from", c.resume_from);
    return c;
}

void write_config(const RunConfig& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write config file: " + path);
    f << "window_size = " << c.window_size << "\n"
      << "epochs = " << c.epochs << "\n"
      << "learning_rate = " << c.learning_rate << "\n"
      << "momentum = " << c.momentum << "\n"
      << "spc_a1 = " << c.spc_a1 << "\n"
      << "spc_a2 = " << c.spc_a2 << "\n"
      << "noise_fraction = " << c.noise_fraction << "\n"
      << "seed_model = " << c.seed_model << "\n"
      << "seed_stream = " << c.seed_stream << "\n"
      << "seed_drift = " << c.seed_drift << "\n"
      << "ablate_daa = " << (c.ablate_daa ? "true" : "false") << "\n"
      << "fixed_structure = " << (c.fixed_structure ? "true" : "false") << "\n"
      << "dae_single_node = " << (c.dae_single_node ? "true" : "false") << "\n"
      << "no_daa_disc_signal = " << (c.no_daa_disc_signal ? "true" : "false") << "\n"
      << "source_manifest = " << c.source_manifest << "\n"
      << "target_manifest = " << c.target_manifest << "\n"
      << "out_dir = " << c.out_dir << "\n"
      << "checkpoint_every = " << c.checkpoint_every << "\n"
      << "resume_from = " << c.resume_from << "\n";
}

}  // namespace acdc
