#pragma once

#include <memory>
#include <string>

#include "acdc/drift.hpp"
#include "acdc/model.hpp"
#include "acdc/stream.hpp"

namespace acdc {

// Describes one feature-vector file. `data_path` may be relative to the
// manifest's own directory; read_manifest resolves it.
struct DatasetManifest {
    std::string name;
    std::size_t feature_dim = 0;
    std::size_t class_count = 0;
    std::string role;  // "source" | "target"
    std::string data_path;
    std::string format = "csv";  // "csv" | "bin"
    bool has_labels = false;
    bool labels_held_out = false;  // target labels are never shown to the model
    std::size_t sample_count = 0;
};

DatasetManifest read_manifest(const std::string& path);
void write_manifest(const DatasetManifest& m, const std::string& path);

// Single-pass reader for the manifest's file. Labels follow the manifest:
// a source stream missing a label on any row is an error.
std::unique_ptr<SampleSource> open_stream(const DatasetManifest& m);

// One sample per row: feature values then an optional trailing integer
// label. The binary format is a small packed header plus raw doubles.
void write_stream_csv(const std::vector<Sample>& samples, const std::string& path,
                      bool with_labels);
void write_stream_bin(const std::vector<Sample>& samples, const std::string& path,
                      bool with_labels);

// Metrics CSV (versioned header, fixed column set, %.17g doubles). Wall
// times go to a separate timings file since they never reproduce.
void write_metrics(const MetricsTrace& trace, const std::string& path);
void write_timings(const MetricsTrace& trace, const std::string& path);
MetricsTrace read_metrics(const std::string& path);

// Versioned binary checkpoint: every parameter, velocity, width, moment,
// SPC statistic, and generator state; optionally the protocol state so a
// run can resume mid-stream. Round-trips are bit-exact.
void save_checkpoint(const AcdcModel& model, const std::string& path,
                     const RunState* state = nullptr);
// Returns true when the file also carried protocol state (written to
// *state when non-null).
bool load_checkpoint(const std::string& path, AcdcModel& model, RunState* state = nullptr);

void write_schedule(const DriftSchedule& s, const std::string& path);
DriftSchedule read_schedule(const std::string& path);

}  // namespace acdc
