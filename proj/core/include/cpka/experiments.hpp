#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpka/metrics.hpp"
#include "cpka/plot.hpp"
#include "cpka/radar.hpp"
#include "cpka/separators.hpp"

namespace cpka {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct AudioSegment {
    std::string path;
    double offset = 0.0;    // s
    double duration = 0.0;  // s, 0 = up to audio_duration
};

// Mirrors the JSON config file field for field.
struct ExperimentConfig {
    std::string experiment;  // validate | waves | audio | radar
    std::vector<std::string> algorithms;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "out";
    int threads = 1;
    bool write_signals = false;

    // PKA settings; the direction defaults per experiment when unset
    double pka_alpha = 1e-2;
    double pka_tol = 1e-9;
    int pka_max_iter = 5000;
    int max_restarts = 20;
    double det_floor = 1e-12;
    std::optional<Direction> pka_direction;

    // validate
    int n_tensors = 100;
    int dim = 3;
    int l_samples = 10000;
    std::vector<double> thresholds;

    // waves
    double wave_rate = 1000.0;
    double wave_duration = 0.5;
    std::vector<double> sine_freqs{9.0, 9.5};
    double square_freq = 8.0;

    // audio
    std::vector<AudioSegment> audio;  // empty -> bundled surrogates
    std::string audio_dir;            // where the surrogates live
    double audio_rate = 16000.0;
    double audio_duration = 2.0;

    // radar
    std::vector<std::string> radar_kinds{"csi", "isrj"};
    std::string axis = "dtheta";  // dtheta | snr | sir
    std::vector<double> values;
    double dtheta = 1.0, snr_db = 10.0, sir_db = 0.0;
    UlaConfig ula;
    WaveformParams waveform;
    bool export_scenes = false;
};

ExperimentConfig default_config(const std::string& experiment);
// Overlay a JSON object onto `base`; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base);
std::string config_to_json(const ExperimentConfig& cfg);
void validate_config(const ExperimentConfig& cfg);

struct RunInfo {
    std::string id;
    double wall_seconds = 0.0;
    bool completed = true;
    std::string error;
};

// ---- validation ----
struct Extraction {
    std::string algorithm;
    int tensor = 0;
    std::uint64_t tensor_seed = 0;
    int vector = 0;
    double s = 0.0;  // NaN when the run failed
    double lambda = 0.0;
    double residual = 0.0;
    bool converged = false;
};

struct ValidationResult {
    std::vector<Extraction> extractions;
    std::vector<double> thresholds;
    std::map<std::string, std::vector<int>> curve;  // successes per threshold
    std::vector<RunInfo> runs;
};

ValidationResult run_validation(const ExperimentConfig& cfg);

// ---- separation (waves, audio) ----
struct SeparationRun {
    SeparationReport report;
    SourceSet estimate;  // kept only when write_signals is set
};

struct SeparationResult {
    std::vector<SeparationRun> runs;
    std::vector<RunInfo> info;
    RMatrix source_covariance;
    SourceSet sources;
};

SeparationResult run_waves(const ExperimentConfig& cfg);
SeparationResult run_audio(const ExperimentConfig& cfg);

// Writes the four bundled surrogate WAVs into `dir`.
std::vector<std::string> write_surrogates(const std::string& dir, double rate, double duration);

// ---- radar ----
struct RadarRow {
    std::string kind, algorithm;
    double value = 0.0;
    std::uint64_t seed = 0;
    double sir_improvement = 0.0;
    bool converged = true;
};

struct RadarPoint {
    std::string kind, algorithm;
    double value = 0.0;
    double mean = 0.0, stddev = 0.0;
    int count = 0;
};

struct RadarResult {
    std::vector<RadarRow> rows;
    std::vector<RadarPoint> summary;
    std::vector<RunInfo> info;
};

RadarResult run_radar_sweep(const ExperimentConfig& cfg);

// Tidy tables and figures for each experiment.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
    static Table from_csv(const std::string& text);
};

struct PlotData {
    Table results;
    std::optional<Table> summary;
    std::vector<Figure> figures;
};

PlotData emit_plotdata(const ValidationResult& r);
PlotData emit_plotdata(const SeparationResult& r, const std::string& experiment, const ExperimentConfig& cfg);
PlotData emit_plotdata(const RadarResult& r, const ExperimentConfig& cfg);

// Runs the configured experiment and writes manifest.json, results.csv,
// summary.csv (where applicable), *.svg and optional signal files.
// Returns true when every run completed.
bool run_experiment(const ExperimentConfig& cfg);

}  // namespace cpka
