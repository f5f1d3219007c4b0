#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpka/experiments.hpp"

namespace {

// "0-19", "1,4,7" or a mix such as "0-3,10"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const auto dash = tok.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoull(tok));
        } else {
            const auto lo = std::stoull(tok.substr(0, dash)), hi = std::stoull(tok.substr(dash + 1));
            if (hi < lo) throw cpka::InputError("bad seed range '" + tok + "'");
            for (auto s = lo; s <= hi; ++s) out.push_back(s);
        }
    }
    if (out.empty()) throw cpka::InputError("empty seed list");
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

struct Common {
    std::string seeds, algorithms, out_dir, config;
    int threads = 0;
    bool write_signals = false;
    std::string direction;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seeds", c.seeds, "seed list, e.g. 0-19 or 1,5,9");
    app->add_option("--algorithms", c.algorithms, "comma separated: pka,cfastica,jade,psa,deflation");
    app->add_option("--out-dir", c.out_dir, "output directory");
    app->add_option("--config", c.config, "JSON config overlaid on the defaults")->check(CLI::ExistingFile);
    app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--write-signals", c.write_signals, "write separated signals (CSV, WAV for audio)");
    app->add_option("--pka-direction", c.direction, "ascent or descent")->check(CLI::IsMember({"ascent", "descent"}));
}

cpka::ExperimentConfig resolve(const std::string& experiment, const Common& c) {
    auto cfg = cpka::default_config(experiment);
    if (!c.config.empty()) {
        std::ifstream is(c.config);
        std::stringstream buf;
        buf << is.rdbuf();
        cfg = cpka::config_from_json(buf.str(), cfg);
        if (cfg.experiment != experiment) throw cpka::InputError("config is for '" + cfg.experiment + "'");
    }
    // command line wins over the config file
    if (!c.seeds.empty()) cfg.seeds = parse_seeds(c.seeds);
    if (!c.algorithms.empty()) cfg.algorithms = split(c.algorithms);
    if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
    if (c.threads > 0) cfg.threads = c.threads;
    if (c.write_signals) cfg.write_signals = true;
    if (!c.direction.empty()) cfg.pka_direction = cpka::direction_from_string(c.direction);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Separation experiments: tensor validation, synthetic waves, audio and radar"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cpka::kToolkitVersion);

    Common cv, cw, ca, cr;

    auto* validate = app.add_subcommand("validate", "eigenvector recovery on random statistical tensors");
    add_common(validate, cv);
    std::optional<int> n_tensors, dim, l_samples;
    validate->add_option("--tensors", n_tensors, "number of tensors")->check(CLI::PositiveNumber);
    validate->add_option("--dim", dim, "tensor dimension")->check(CLI::Range(2, 16));
    validate->add_option("--samples", l_samples, "samples per tensor")->check(CLI::PositiveNumber);

    auto* waves = app.add_subcommand("waves", "two sines and a square wave");
    add_common(waves, cw);
    std::optional<double> wave_rate, wave_duration;
    waves->add_option("--rate", wave_rate, "sample rate (Hz)");
    waves->add_option("--duration", wave_duration, "duration (s)");

    auto* audio = app.add_subcommand("audio", "four speech-like recordings");
    add_common(audio, ca);
    std::vector<std::string> wavs;
    std::string audio_dir;
    bool make_surrogates = false;
    std::optional<double> audio_duration;
    audio->add_option("--wav", wavs, "input WAV (16-bit PCM), repeat per source");
    audio->add_option("--audio-dir", audio_dir, "directory with surrogate_0..3.wav");
    audio->add_option("--duration", audio_duration, "seconds taken from each file");
    audio->add_flag("--make-surrogates", make_surrogates, "regenerate the bundled surrogate WAVs into --audio-dir");

    auto* radar = app.add_subcommand("radar", "main-lobe jamming suppression sweep");
    add_common(radar, cr);
    std::string kinds, axis, values;
    std::optional<double> dtheta, snr, sir;
    bool export_scenes = false;
    radar->add_option("--kinds", kinds, "csi,isrj");
    radar->add_option("--axis", axis, "sweep axis")->check(CLI::IsMember({"dtheta", "snr", "sir"}));
    radar->add_option("--values", values, "comma separated sweep values");
    radar->add_option("--dtheta", dtheta, "jammer offset in beamwidths when not swept");
    radar->add_option("--snr", snr, "input SNR (dB) when not swept");
    radar->add_option("--sir", sir, "input SIR (dB) when not swept");
    radar->add_flag("--export-scenes", export_scenes, "write every scene as CSV + JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        cpka::ExperimentConfig cfg;
        if (validate->parsed()) {
            cfg = resolve("validate", cv);
            if (n_tensors) cfg.n_tensors = *n_tensors;
            if (dim) cfg.dim = *dim;
            if (l_samples) cfg.l_samples = *l_samples;
        } else if (waves->parsed()) {
            cfg = resolve("waves", cw);
            if (wave_rate) cfg.wave_rate = *wave_rate;
            if (wave_duration) cfg.wave_duration = *wave_duration;
        } else if (audio->parsed()) {
            cfg = resolve("audio", ca);
            if (!audio_dir.empty()) cfg.audio_dir = audio_dir;
            if (audio_duration) cfg.audio_duration = *audio_duration;
            if (!wavs.empty()) {
                cfg.audio.clear();
                for (const auto& w : wavs) cfg.audio.push_back({w});
            }
            if (make_surrogates) {
                for (const auto& p : cpka::write_surrogates(cfg.audio_dir, cfg.audio_rate, 4.0)) std::cout << p << '\n';
                return 0;
            }
        } else {
            cfg = resolve("radar", cr);
            if (!kinds.empty()) cfg.radar_kinds = split(kinds);
            if (!axis.empty()) cfg.axis = axis;
            if (!values.empty()) {
                cfg.values.clear();
                for (const auto& v : split(values)) cfg.values.push_back(std::stod(v));
            }
            if (dtheta) cfg.dtheta = *dtheta;
            if (snr) cfg.snr_db = *snr;
            if (sir) cfg.sir_db = *sir;
            if (export_scenes) cfg.export_scenes = true;
        }
        const bool ok = cpka::run_experiment(cfg);
        std::cout << cfg.experiment << ": " << (ok ? "all runs completed" : "some runs failed") << ", output in "
                  << cfg.out_dir << '\n';
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
