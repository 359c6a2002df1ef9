#include "acdc/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace acdc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMetricsHeader[] = "# acdc metrics v1";
constexpr char kCheckpointMagic[8] = {'A', 'C', 'D', 'C', 'K', 'P', 'T', '1'};

[[noreturn]] void io_fail(const std::string& what, const std::string& path) {
    throw std::runtime_error(what + ": " + path);
}

std::ofstream open_out(const std::string& path, std::ios_base::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) io_fail("cannot open for writing", path);
    return f;
}

std::ifstream open_in(const std::string& path, std::ios_base::openmode mode = std::ios::in) {
    std::ifstream f(path, mode);
    if (!f) io_fail("cannot open for reading", path);
    return f;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --- binary primitives ---

void put_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }
std::uint8_t get_u8(std::istream& is) { return static_cast<std::uint8_t>(is.get()); }

void put_doubles(std::ostream& os, const double* p, std::size_t n) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
void get_doubles(std::istream& is, double* p, std::size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void put_matrix(std::ostream& os, const Matrix& m) {
    put_u64(os, m.rows);
    put_u64(os, m.cols);
    put_doubles(os, m.data.data(), m.data.size());
}
Matrix get_matrix(std::istream& is) {
    Matrix m;
    m.rows = get_u64(is);
    m.cols = get_u64(is);
    m.data.resize(m.rows * m.cols);
    get_doubles(is, m.data.data(), m.data.size());
    return m;
}

void put_vector(std::ostream& os, const Vector& v) {
    put_u64(os, v.size());
    put_doubles(os, v.data(), v.size());
}
Vector get_vector(std::istream& is) {
    Vector v(get_u64(is));
    get_doubles(is, v.data(), v.size());
    return v;
}

// mt19937_64 exposes its state only through stream insertion; embed that
// text blob length-prefixed.
void put_rng(std::ostream& os, const Rng& rng) {
    std::ostringstream ss;
    ss << rng;
    const std::string s = ss.str();
    put_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void get_rng(std::istream& is, Rng& rng) {
    std::string s(get_u64(is), '\0');
    is.read(s.data(), static_cast<std::streamsize>(s.size()));
    std::istringstream ss(s);
    ss >> rng;
}

void put_moments(std::ostream& os, const InputMoments& m) {
    put_u64(os, m.count);
    put_vector(os, m.mean);
    put_vector(os, m.m2);
    put_vector(os, m.raw2mean);
}
InputMoments get_moments(std::istream& is) {
    InputMoments m;
    m.count = get_u64(is);
    m.mean = get_vector(is);
    m.m2 = get_vector(is);
    m.raw2mean = get_vector(is);
    return m;
}

void put_stat(std::ostream& os, const RunningStat& s) {
    put_u64(os, s.count);
    const double d[4] = {s.mean, s.m2, s.min_mean, s.min_std};
    put_doubles(os, d, 4);
}
RunningStat get_stat(std::istream& is) {
    RunningStat s;
    s.count = get_u64(is);
    double d[4];
    get_doubles(is, d, 4);
    s.mean = d[0];
    s.m2 = d[1];
    s.min_mean = d[2];
    s.min_std = d[3];
    return s;
}

void put_head(std::ostream& os, const Head& h) {
    put_matrix(os, h.w1);
    put_vector(os, h.b1);
    put_matrix(os, h.w2);
    put_vector(os, h.b2);
}
Head get_head(std::istream& is) {
    Head h;
    h.w1 = get_matrix(is);
    h.b1 = get_vector(is);
    h.w2 = get_matrix(is);
    h.b2 = get_vector(is);
    return h;
}

void put_ae(std::ostream& os, const TiedAutoencoder& a) {
    put_matrix(os, a.w);
    put_vector(os, a.b_hidden);
    put_vector(os, a.b_out);
}
TiedAutoencoder get_ae(std::istream& is) {
    TiedAutoencoder a;
    a.w = get_matrix(is);
    a.b_hidden = get_vector(is);
    a.b_out = get_vector(is);
    return a;
}

int parse_label(const std::string& tok, const std::string& path, std::size_t line) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line) + ": bad label '" + tok + "'");
    }
}

class CsvSource final : public SampleSource {
  public:
    CsvSource(DatasetManifest m) : manifest_(std::move(m)), in_(open_in(manifest_.data_path)) {}

    std::optional<Sample> next() override {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty()) continue;
            return parse(line);
        }
        return std::nullopt;
    }

    void skip(std::size_t n) override {
        for (std::size_t i = 0; i < n; ++i)
            if (!next()) io_fail("skip ran past end of stream", manifest_.data_path);
    }

  private:
    Sample parse(const std::string& line) {
        Sample s;
        s.features.reserve(manifest_.feature_dim);
        std::size_t start = 0;
        std::vector<std::string> toks;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::size_t end = comma == std::string::npos ? line.size() : comma;
            toks.push_back(line.substr(start, end - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }

        const std::size_t u = manifest_.feature_dim;
        const bool labeled = manifest_.has_labels;
        if (toks.size() != u + (labeled ? 1 : 0)) {
            if (labeled && toks.size() == u && manifest_.role == "source")
                throw std::runtime_error(manifest_.data_path + ":" + std::to_string(line_no_) +
                                         ": missing label on a source row");
            throw std::runtime_error(manifest_.data_path + ":" + std::to_string(line_no_) +
                                     ": expected " + std::to_string(u + (labeled ? 1 : 0)) +
                                     " fields, got " + std::to_string(toks.size()));
        }
        for (std::size_t i = 0; i < u; ++i) {
            try {
                std::size_t pos = 0;
                s.features.push_back(std::stod(toks[i], &pos));
                if (pos != toks[i].size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw std::runtime_error(manifest_.data_path + ":" + std::to_string(line_no_) +
                                         ": bad value '" + toks[i] + "'");
            }
        }
        if (labeled) {
            const int label = parse_label(toks[u], manifest_.data_path, line_no_);
            if (label < 0 || static_cast<std::size_t>(label) >= manifest_.class_count)
                throw std::runtime_error(manifest_.data_path + ":" + std::to_string(line_no_) +
                                         ": label out of range");
            s.label = label;
        }
        s.domain = manifest_.role == "target" ? Domain::Target : Domain::Source;
        return s;
    }

    DatasetManifest manifest_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
};

constexpr char kStreamMagic[8] = {'A', 'C', 'D', 'C', 'S', 'T', 'R', '1'};

class BinSource final : public SampleSource {
  public:
    BinSource(DatasetManifest m)
        : manifest_(std::move(m)), in_(open_in(manifest_.data_path, std::ios::binary)) {
        char magic[8];
        in_.read(magic, 8);
        if (std::memcmp(magic, kStreamMagic, 8) != 0)
            io_fail("not a packed stream file", manifest_.data_path);
        const std::uint64_t u = get_u64(in_);
        count_ = get_u64(in_);
        labeled_ = get_u8(in_) != 0;
        if (u != manifest_.feature_dim)
            io_fail("feature dim disagrees with manifest", manifest_.data_path);
    }

    std::optional<Sample> next() override {
        if (read_ >= count_) return std::nullopt;
        Sample s;
        s.features.resize(manifest_.feature_dim);
        get_doubles(in_, s.features.data(), s.features.size());
        if (labeled_) {
            const auto raw = static_cast<std::int64_t>(get_u64(in_));
            s.label = static_cast<int>(raw);
        }
        if (!in_) io_fail("truncated packed stream", manifest_.data_path);
        s.domain = manifest_.role == "target" ? Domain::Target : Domain::Source;
        ++read_;
        return s;
    }

    void skip(std::size_t n) override {
        const std::size_t rec = manifest_.feature_dim * sizeof(double) + (labeled_ ? 8 : 0);
        in_.seekg(static_cast<std::streamoff>(n * rec), std::ios::cur);
        read_ += n;
    }

  private:
    DatasetManifest manifest_;
    std::ifstream in_;
    std::uint64_t count_ = 0;
    bool labeled_ = false;
    std::uint64_t read_ = 0;
};

}  // namespace

DatasetManifest read_manifest(const std::string& path) {
    json j = json::parse(open_in(path));
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    m.class_count = j.at("class_count").get<std::size_t>();
    m.role = j.at("role").get<std::string>();
    m.data_path = j.at("data_path").get<std::string>();
    m.format = j.at("format").get<std::string>();
    m.has_labels = j.at("has_labels").get<bool>();
    m.labels_held_out = j.value("labels_held_out", false);
    m.sample_count = j.at("sample_count").get<std::size_t>();
    if (m.role != "source" && m.role != "target")
        io_fail("manifest role must be 'source' or 'target'", path);
    if (m.role == "source" && !m.has_labels) io_fail("source stream must be labeled", path);

    const fs::path data(m.data_path);
    if (data.is_relative()) m.data_path = (fs::path(path).parent_path() / data).string();
    return m;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    json j{{"name", m.name},
           {"feature_dim", m.feature_dim},
           {"class_count", m.class_count},
           {"role", m.role},
           {"data_path", m.data_path},
           {"format", m.format},
           {"has_labels", m.has_labels},
           {"labels_held_out", m.labels_held_out},
           {"sample_count", m.sample_count}};
    open_out(path) << j.dump(2) << "\n";
}

std::unique_ptr<SampleSource> open_stream(const DatasetManifest& m) {
    if (m.format == "csv") return std::make_unique<CsvSource>(m);
    if (m.format == "bin") return std::make_unique<BinSource>(m);
    io_fail("unknown stream format '" + m.format + "'", m.data_path);
}

void write_stream_csv(const std::vector<Sample>& samples, const std::string& path,
                      bool with_labels) {
    std::ofstream f = open_out(path);
    for (const Sample& s : samples) {
        for (std::size_t i = 0; i < s.features.size(); ++i) {
            if (i) f << ',';
            f << fmt_double(s.features[i]);
        }
        if (with_labels) {
            if (s.label < 0) io_fail("write_stream_csv: sample without label", path);
            f << ',' << s.label;
        }
        f << '\n';
    }
}

void write_stream_bin(const std::vector<Sample>& samples, const std::string& path,
                      bool with_labels) {
    std::ofstream f = open_out(path, std::ios::binary);
    f.write(kStreamMagic, 8);
    put_u64(f, samples.empty() ? 0 : samples.front().features.size());
    put_u64(f, samples.size());
    put_u8(f, with_labels ? 1 : 0);
    for (const Sample& s : samples) {
        put_doubles(f, s.features.data(), s.features.size());
        if (with_labels) {
            if (s.label < 0) io_fail("write_stream_bin: sample without label", path);
            put_u64(f, static_cast<std::uint64_t>(static_cast<std::int64_t>(s.label)));
        }
    }
}

void write_metrics(const MetricsTrace& trace, const std::string& path) {
    std::ofstream f = open_out(path);
    f << kMetricsHeader << "\n";
    f << "window,target_acc_window,target_acc_cum,source_acc_window,source_acc_cum,"
         "loss_dae,loss_daa,loss_disc,r_dae,r_daa,r_disc,"
         "grow_dae,prune_dae,grow_daa,prune_daa,grow_disc,prune_disc,"
         "h_divergence,source_seen,target_seen\n";
    for (const WindowRow& r : trace.rows) {
        f << r.window << ',' << fmt_double(r.target_acc_window) << ','
          << fmt_double(r.target_acc_cum) << ',' << fmt_double(r.source_acc_window) << ','
          << fmt_double(r.source_acc_cum) << ',' << fmt_double(r.loss_dae) << ','
          << fmt_double(r.loss_daa) << ',' << fmt_double(r.loss_disc) << ',' << r.r_dae << ','
          << r.r_daa << ',' << r.r_disc << ',' << r.grow_dae << ',' << r.prune_dae << ','
          << r.grow_daa << ',' << r.prune_daa << ',' << r.grow_disc << ',' << r.prune_disc << ','
          << fmt_double(r.h_divergence) << ',' << r.source_seen << ',' << r.target_seen << '\n';
    }
}

void write_timings(const MetricsTrace& trace, const std::string& path) {
    std::ofstream f = open_out(path);
    f << "window,wall_ms\n";
    for (const WindowRow& r : trace.rows) f << r.window << ',' << fmt_double(r.wall_ms) << '\n';
}

MetricsTrace read_metrics(const std::string& path) {
    std::ifstream f = open_in(path);
    MetricsTrace trace;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {  // column header
            header_seen = true;
            continue;
        }
        WindowRow r;
        double grow[6];
        double rd, ra, ri, ss, ts, win;
        const int n = std::sscanf(
            line.c_str(),
            "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf",
            &win, &r.target_acc_window, &r.target_acc_cum, &r.source_acc_window,
            &r.source_acc_cum, &r.loss_dae, &r.loss_daa, &r.loss_disc, &rd, &ra, &ri, &grow[0],
            &grow[1], &grow[2], &grow[3], &grow[4], &grow[5], &r.h_divergence, &ss, &ts);
        if (n != 20)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        r.window = static_cast<std::size_t>(win);
        r.r_dae = static_cast<std::size_t>(rd);
        r.r_daa = static_cast<std::size_t>(ra);
        r.r_disc = static_cast<std::size_t>(ri);
        r.grow_dae = static_cast<int>(grow[0]);
        r.prune_dae = static_cast<int>(grow[1]);
        r.grow_daa = static_cast<int>(grow[2]);
        r.prune_daa = static_cast<int>(grow[3]);
        r.grow_disc = static_cast<int>(grow[4]);
        r.prune_disc = static_cast<int>(grow[5]);
        r.source_seen = static_cast<std::size_t>(ss);
        r.target_seen = static_cast<std::size_t>(ts);
        trace.rows.push_back(r);
    }
    return trace;
}

void save_checkpoint(const AcdcModel& model, const std::string& path, const RunState* state) {
    std::ofstream f = open_out(path, std::ios::binary);
    f.write(kCheckpointMagic, 8);
    put_u64(f, model.u);
    put_u64(f, model.m);
    put_u8(f, model.flags.daa_enabled);
    put_u8(f, model.flags.evolution_enabled);
    put_u8(f, model.flags.dae_starts_single_node);
    put_u8(f, model.flags.daa_signals_disc);
    const double hyper[5] = {model.hyper.learning_rate, model.hyper.momentum, model.hyper.spc_a1,
                             model.hyper.spc_a2, model.hyper.noise_fraction};
    put_doubles(f, hyper, 5);

    put_ae(f, model.dae);
    put_head(f, model.daa);
    put_head(f, model.disc);
    put_ae(f, model.vel_dae);
    put_head(f, model.vel_daa);
    put_head(f, model.vel_disc);

    put_moments(f, model.moments_dae);
    put_moments(f, model.moments_daa);
    put_moments(f, model.moments_disc);
    for (const SpcStats* s : {&model.spc_dae, &model.spc_daa, &model.spc_disc}) {
        put_stat(f, s->bias);
        put_stat(f, s->var);
    }
    put_rng(f, model.rng_weights);
    put_rng(f, model.rng_noise);

    put_u8(f, state ? 1 : 0);
    if (state) {
        put_u64(f, state->next_window);
        put_u64(f, state->throughput.total_source);
        put_u64(f, state->throughput.total_target);
        put_u64(f, state->throughput.seen_source);
        put_u64(f, state->throughput.seen_target);
        put_u64(f, state->target_correct);
        put_u64(f, state->target_scored);
        put_u64(f, state->source_correct);
        put_u64(f, state->source_scored);
        put_rng(f, state->rng_stream);
        put_rng(f, state->rng_pair);
    }
    if (!f) io_fail("checkpoint write failed", path);
}

bool load_checkpoint(const std::string& path, AcdcModel& model, RunState* state) {
    std::ifstream f = open_in(path, std::ios::binary);
    char magic[8];
    f.read(magic, 8);
    if (std::memcmp(magic, kCheckpointMagic, 8) != 0) io_fail("not a checkpoint file", path);

    model.u = get_u64(f);
    model.m = get_u64(f);
    model.flags.daa_enabled = get_u8(f) != 0;
    model.flags.evolution_enabled = get_u8(f) != 0;
    model.flags.dae_starts_single_node = get_u8(f) != 0;
    model.flags.daa_signals_disc = get_u8(f) != 0;
    double hyper[5];
    get_doubles(f, hyper, 5);
    model.hyper = {hyper[0], hyper[1], hyper[2], hyper[3], hyper[4]};

    model.dae = get_ae(f);
    model.daa = get_head(f);
    model.disc = get_head(f);
    model.vel_dae = get_ae(f);
    model.vel_daa = get_head(f);
    model.vel_disc = get_head(f);

    model.moments_dae = get_moments(f);
    model.moments_daa = get_moments(f);
    model.moments_disc = get_moments(f);
    for (SpcStats* s : {&model.spc_dae, &model.spc_daa, &model.spc_disc}) {
        s->bias = get_stat(f);
        s->var = get_stat(f);
    }
    get_rng(f, model.rng_weights);
    get_rng(f, model.rng_noise);

    const bool has_state = get_u8(f) != 0;
    if (has_state && state) {
        state->next_window = get_u64(f);
        state->throughput.total_source = get_u64(f);
        state->throughput.total_target = get_u64(f);
        state->throughput.seen_source = get_u64(f);
        state->throughput.seen_target = get_u64(f);
        state->target_correct = get_u64(f);
        state->target_scored = get_u64(f);
        state->source_correct = get_u64(f);
        state->source_scored = get_u64(f);
        get_rng(f, state->rng_stream);
        get_rng(f, state->rng_pair);
    }
    if (!f) io_fail("truncated checkpoint", path);
    validate_shapes(model);
    return has_state;
}

void write_schedule(const DriftSchedule& s, const std::string& path) {
    json j{{"u", s.u},          {"concepts", s.concepts}, {"stream_len", s.stream_len},
           {"seed", s.seed},    {"boundaries", s.boundaries}, {"vectors", s.vectors}};
    open_out(path) << j.dump(2) << "\n";
}

DriftSchedule read_schedule(const std::string& path) {
    json j = json::parse(open_in(path));
    DriftSchedule s;
    s.u = j.at("u").get<std::size_t>();
    s.concepts = j.at("concepts").get<std::size_t>();
    s.stream_len = j.at("stream_len").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.boundaries = j.at("boundaries").get<std::vector<std::size_t>>();
    s.vectors = j.at("vectors").get<std::vector<Vector>>();
    return s;
}

}  // namespace acdc
