#include "cpka/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cpka/io.hpp"
#include "cpka/wav.hpp"
#include "cpka/whitening.hpp"

#ifndef CPKA_DATA_DIR
#define CPKA_DATA_DIR "data"
#endif

namespace cpka {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// fixed RNG stream per algorithm so results do not depend on list order
std::uint64_t algo_stream(const std::string& a) {
    if (a == "pka") return 101;
    if (a == "cfastica") return 102;
    if (a == "jade") return 103;
    if (a == "psa") return 104;
    if (a == "deflation") return 105;
    throw InputError("unknown algorithm '" + a + "'");
}

const std::set<std::string> kSeparators{"pka", "cfastica", "jade", "psa", "deflation"};
const std::set<std::string> kEigenSolvers{"pka", "cfastica", "deflation"};

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    for (std::size_t t = 0; t < count; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Direction pka_direction(const ExperimentConfig& cfg) {
    if (cfg.pka_direction) return *cfg.pka_direction;
    return cfg.experiment == "audio" ? Direction::Ascent : Direction::Descent;
}

PkaConfig pka_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    PkaConfig p;
    p.alpha = cfg.pka_alpha;
    p.tol = cfg.pka_tol;
    p.max_iter = cfg.pka_max_iter;
    p.max_restarts = cfg.max_restarts;
    p.det_floor = cfg.det_floor;
    p.direction = pka_direction(cfg);
    p.rng_seed = seed;
    return p;
}

DeflationConfig deflation_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    DeflationConfig d;
    d.max_restarts = cfg.max_restarts;
    d.rng_seed = seed;
    d.direction = pka_direction(cfg);
    return d;
}

// Runs one separator. PKA vectors that exhausted their restarts are kept
// (best pair) and flagged through the diagnostics.
UnmixingMatrix separate(const std::string& alg, const FourthOrderTensor& c, const CMatrix& z, int n,
                        const ExperimentConfig& cfg, std::uint64_t seed) {
    if (alg == "pka") {
        try {
            return pka(c, n, pka_config(cfg, seed));
        } catch (const PkaIncomplete& e) {
            return e.partial();
        }
    }
    if (alg == "cfastica") return cfastica(c, n, deflation_config(cfg, seed));
    if (alg == "deflation") return fixed_point_deflation(c, n, deflation_config(cfg, seed));
    if (alg == "jade") return jade(z, n);
    if (alg == "psa") return psa(coskewness_tensor(z), n, deflation_config(cfg, seed));
    throw InputError("unknown algorithm '" + alg + "'");
}

std::string join_ids(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : "/") + p;
    return s;
}

}  // namespace

// ------------------------------------------------------------------ config

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "validate") {
        c.algorithms = {"pka", "deflation", "cfastica"};
        c.seeds = {0};
        for (int k = 1; k <= 8; ++k) c.thresholds.push_back(1.0 - std::pow(10.0, -k));
    } else if (experiment == "waves") {
        c.algorithms = {"pka", "cfastica", "jade", "psa"};
        for (std::uint64_t s = 0; s < 20; ++s) c.seeds.push_back(s);
    } else if (experiment == "audio") {
        c.algorithms = {"pka", "cfastica", "jade", "psa"};
        for (std::uint64_t s = 0; s < 20; ++s) c.seeds.push_back(s);
        c.audio_dir = std::string(CPKA_DATA_DIR) + "/surrogates";
    } else if (experiment == "radar") {
        c.algorithms = {"pka", "cfastica", "jade", "psa"};
        for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
        c.values = {0.25, 0.5, 1.0, 2.0};
    } else {
        throw InputError("unknown experiment '" + experiment + "'");
    }
    return c;
}

namespace {

template <class T>
void take(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig c) {
    const json j = json::parse(text);
    if (!j.is_object()) throw InputError("config: top level must be a JSON object");
    static const std::set<std::string> known{
        "experiment", "algorithms", "seeds", "out_dir", "threads", "write_signals", "pka_alpha", "pka_tol",
        "pka_max_iter", "max_restarts", "det_floor", "pka_direction", "n_tensors", "dim", "l_samples", "thresholds",
        "wave_rate", "wave_duration", "sine_freqs", "square_freq", "audio", "audio_dir", "audio_rate",
        "audio_duration", "radar_kinds", "axis", "values", "dtheta", "snr_db", "sir_db", "ula", "waveform",
        "export_scenes"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw InputError("config: unknown key '" + k + "'");

    if (j.contains("experiment") && j.at("experiment").get<std::string>() != c.experiment) {
        // switching experiment resets defaults before overlaying
        c = default_config(j.at("experiment").get<std::string>());
    }
    take(j, "algorithms", c.algorithms);
    take(j, "seeds", c.seeds);
    take(j, "out_dir", c.out_dir);
    take(j, "threads", c.threads);
    take(j, "write_signals", c.write_signals);
    take(j, "pka_alpha", c.pka_alpha);
    take(j, "pka_tol", c.pka_tol);
    take(j, "pka_max_iter", c.pka_max_iter);
    take(j, "max_restarts", c.max_restarts);
    take(j, "det_floor", c.det_floor);
    if (j.contains("pka_direction") && !j.at("pka_direction").is_null())
        c.pka_direction = direction_from_string(j.at("pka_direction").get<std::string>());
    take(j, "n_tensors", c.n_tensors);
    take(j, "dim", c.dim);
    take(j, "l_samples", c.l_samples);
    take(j, "thresholds", c.thresholds);
    take(j, "wave_rate", c.wave_rate);
    take(j, "wave_duration", c.wave_duration);
    take(j, "sine_freqs", c.sine_freqs);
    take(j, "square_freq", c.square_freq);
    if (j.contains("audio")) {
        c.audio.clear();
        for (const auto& s : j.at("audio"))
            c.audio.push_back({s.at("path").get<std::string>(), s.value("offset", 0.0), s.value("duration", 0.0)});
    }
    take(j, "audio_dir", c.audio_dir);
    take(j, "audio_rate", c.audio_rate);
    take(j, "audio_duration", c.audio_duration);
    take(j, "radar_kinds", c.radar_kinds);
    take(j, "axis", c.axis);
    take(j, "values", c.values);
    take(j, "dtheta", c.dtheta);
    take(j, "snr_db", c.snr_db);
    take(j, "sir_db", c.sir_db);
    if (j.contains("ula")) {
        const auto& u = j.at("ula");
        take(u, "n_elements", c.ula.n_elements);
        take(u, "spacing_over_lambda", c.ula.spacing_over_lambda);
    }
    if (j.contains("waveform")) {
        const auto& w = j.at("waveform");
        take(w, "bandwidth", c.waveform.bandwidth);
        take(w, "pulse_width", c.waveform.pulse_width);
        take(w, "sample_rate", c.waveform.sample_rate);
        take(w, "csi_teeth", c.waveform.csi_teeth);
        take(w, "csi_spacing", c.waveform.csi_spacing);
        take(w, "isrj_slice_period", c.waveform.isrj_slice_period);
        take(w, "isrj_duty", c.waveform.isrj_duty);
        take(w, "isrj_delay", c.waveform.isrj_delay);
    }
    take(j, "export_scenes", c.export_scenes);
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["algorithms"] = c.algorithms;
    j["seeds"] = c.seeds;
    j["out_dir"] = c.out_dir;
    j["threads"] = c.threads;
    j["write_signals"] = c.write_signals;
    j["pka_alpha"] = c.pka_alpha;
    j["pka_tol"] = c.pka_tol;
    j["pka_max_iter"] = c.pka_max_iter;
    j["max_restarts"] = c.max_restarts;
    j["det_floor"] = c.det_floor;
    j["pka_direction"] = c.pka_direction ? json(to_string(*c.pka_direction)) : json(nullptr);
    j["n_tensors"] = c.n_tensors;
    j["dim"] = c.dim;
    j["l_samples"] = c.l_samples;
    j["thresholds"] = c.thresholds;
    j["wave_rate"] = c.wave_rate;
    j["wave_duration"] = c.wave_duration;
    j["sine_freqs"] = c.sine_freqs;
    j["square_freq"] = c.square_freq;
    j["audio"] = json::array();
    for (const auto& s : c.audio) j["audio"].push_back({{"path", s.path}, {"offset", s.offset}, {"duration", s.duration}});
    j["audio_dir"] = c.audio_dir;
    j["audio_rate"] = c.audio_rate;
    j["audio_duration"] = c.audio_duration;
    j["radar_kinds"] = c.radar_kinds;
    j["axis"] = c.axis;
    j["values"] = c.values;
    j["dtheta"] = c.dtheta;
    j["snr_db"] = c.snr_db;
    j["sir_db"] = c.sir_db;
    j["ula"] = {{"n_elements", c.ula.n_elements}, {"spacing_over_lambda", c.ula.spacing_over_lambda}};
    j["waveform"] = {{"bandwidth", c.waveform.bandwidth},
                     {"pulse_width", c.waveform.pulse_width},
                     {"sample_rate", c.waveform.sample_rate},
                     {"csi_teeth", c.waveform.csi_teeth},
                     {"csi_spacing", c.waveform.csi_spacing},
                     {"isrj_slice_period", c.waveform.isrj_slice_period},
                     {"isrj_duty", c.waveform.isrj_duty},
                     {"isrj_delay", c.waveform.isrj_delay}};
    j["export_scenes"] = c.export_scenes;
    return j.dump(2);
}

void validate_config(const ExperimentConfig& c) {
    if (c.algorithms.empty()) throw InputError("config: algorithm list is empty");
    if (c.seeds.empty()) throw InputError("config: seed list is empty");
    const auto& allowed = c.experiment == "validate" ? kEigenSolvers : kSeparators;
    for (const auto& a : c.algorithms)
        if (!allowed.count(a)) throw InputError("config: algorithm '" + a + "' is not available for " + c.experiment);
    if (c.experiment == "validate") {
        if (c.n_tensors < 1 || c.dim < 2) throw InputError("config: need n_tensors >= 1 and dim >= 2");
        for (double t : c.thresholds)
            if (!(t > 0 && t < 1)) throw InputError("config: thresholds must lie in (0, 1)");
    } else if (c.experiment == "radar") {
        if (c.values.empty()) throw InputError("config: radar sweep values are empty");
        if (c.axis != "dtheta" && c.axis != "snr" && c.axis != "sir") throw InputError("config: axis must be dtheta, snr or sir");
        for (const auto& k : c.radar_kinds) (void)jammer_from_string(k);
    } else if (c.experiment != "waves" && c.experiment != "audio") {
        throw InputError("config: unknown experiment '" + c.experiment + "'");
    }
    if (c.threads < 1) throw InputError("config: threads must be >= 1");
}

// -------------------------------------------------------------- validation

ValidationResult run_validation(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ValidationResult res;
    res.thresholds = cfg.thresholds;
    const std::uint64_t base = cfg.seeds.front();
    const std::size_t na = cfg.algorithms.size();
    std::vector<std::vector<Extraction>> per(static_cast<std::size_t>(cfg.n_tensors));
    std::vector<std::vector<RunInfo>> infos(static_cast<std::size_t>(cfg.n_tensors));

    parallel_for(static_cast<std::size_t>(cfg.n_tensors), cfg.threads, [&](std::size_t ti) {
        const std::uint64_t tseed = derive_seed(base, ti);
        const FourthOrderTensor t = random_statistical_tensor(cfg.dim, tseed, cfg.l_samples);
        for (std::size_t a = 0; a < na; ++a) {
            const std::string& alg = cfg.algorithms[a];
            RunInfo info{join_ids({"validate", "tensor=" + std::to_string(ti), alg})};
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const UnmixingMatrix w = separate(alg, t, CMatrix(), cfg.dim, cfg, derive_seed(tseed, algo_stream(alg)));
                for (int k = 0; k < cfg.dim; ++k) {
                    Extraction e{alg, static_cast<int>(ti), tseed, k};
                    const CVector v = w.w.col(k);
                    const EigenPair p = make_eigenpair(t, v);
                    e.lambda = p.lambda;
                    e.residual = p.residual;
                    e.converged = w.diagnostics[static_cast<std::size_t>(k)].converged;
                    try {
                        e.s = eigen_cosine(t, v);
                    } catch (const std::exception&) {
                        e.s = kNaN;
                    }
                    per[ti].push_back(e);
                }
            } catch (const std::exception& ex) {
                info.completed = false;
                info.error = ex.what();
                for (int k = 0; k < cfg.dim; ++k) per[ti].push_back({alg, static_cast<int>(ti), tseed, k, kNaN, kNaN, kNaN, false});
            }
            info.wall_seconds = seconds_since(t0);
            infos[ti].push_back(info);
        }
    });

    for (std::size_t ti = 0; ti < per.size(); ++ti) {
        res.extractions.insert(res.extractions.end(), per[ti].begin(), per[ti].end());
        res.runs.insert(res.runs.end(), infos[ti].begin(), infos[ti].end());
    }
    for (const auto& alg : cfg.algorithms) {
        std::vector<int> counts(cfg.thresholds.size(), 0);
        for (const auto& e : res.extractions) {
            if (e.algorithm != alg || !std::isfinite(e.s)) continue;
            for (std::size_t k = 0; k < cfg.thresholds.size(); ++k)
                if (e.s >= cfg.thresholds[k]) ++counts[k];
        }
        res.curve[alg] = counts;
    }
    return res;
}

// -------------------------------------------------------------- separation

namespace {

SourceSet centered(const SourceSet& s) {
    SourceSet c = s;
    for (Eigen::Index i = 0; i < c.count(); ++i) c.data.row(i).array() -= c.data.row(i).mean();
    return c;
}

// One seed: mix, whiten, run every algorithm, score against the centred truth.
void separation_seed(const ExperimentConfig& cfg, const SourceSet& sources, std::uint64_t seed, bool real_mixing,
                     std::vector<SeparationRun>& out, std::vector<RunInfo>& infos) {
    const int n = static_cast<int>(sources.count());
    const MixingMatrix a = random_mixing_matrix(n, !real_mixing, derive_seed(seed, 0));
    const DataMatrix x = mix(sources, a);
    const WhiteningResult wr = whiten(x);
    const FourthOrderTensor c = fourth_moment_tensor(wr.z.x);
    const CMatrix a_eff = wr.v * a.a;
    const SourceSet truth = centered(sources);
    const Eigen::JacobiSVD<CMatrix> svd(a.a);
    const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);

    for (const auto& alg : cfg.algorithms) {
        RunInfo info{join_ids({cfg.experiment, "seed=" + std::to_string(seed), alg})};
        const auto t0 = std::chrono::steady_clock::now();
        SeparationRun run;
        run.report.algorithm = alg;
        run.report.seed = seed;
        try {
            const UnmixingMatrix w = separate(alg, c, wr.z.x, n, cfg, derive_seed(seed, algo_stream(alg)));
            const SourceSet y = unmix(w, wr.z);
            const AccResult ar = acc(truth, y);
            run.report.isi = isi(w, a_eff);
            run.report.acc = ar.value;
            run.report.matching = ar.matching;
            run.report.sdr_db = sdr(truth, y, ar.matching);
            run.report.converged = w.converged();
            int restarts = 0;
            for (const auto& d : w.diagnostics) restarts += d.restarts;
            run.report.extras["restarts"] = restarts;
            run.report.extras["volume"] = w.volume();
            if (cfg.write_signals) run.estimate = y;
        } catch (const std::exception& ex) {
            info.completed = false;
            info.error = ex.what();
            run.report.isi = run.report.acc = kNaN;
            run.report.converged = false;
        }
        run.report.extras["mixing_cond"] = cond;
        run.report.extras["n_sources"] = n;
        run.report.extras["sample_rate"] = sources.sample_rate;
        run.report.extras["length"] = static_cast<double>(sources.length());
        run.report.extras["pka_direction"] = pka_direction(cfg) == Direction::Ascent ? 1.0 : -1.0;
        info.wall_seconds = seconds_since(t0);
        out.push_back(std::move(run));
        infos.push_back(info);
    }
}

SeparationResult run_separation(const ExperimentConfig& cfg, const SourceSet& sources, bool real_mixing) {
    SeparationResult res;
    res.sources = sources;
    res.source_covariance = covariance(sources);
    std::vector<std::vector<SeparationRun>> per(cfg.seeds.size());
    std::vector<std::vector<RunInfo>> infos(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
        try {
            separation_seed(cfg, sources, cfg.seeds[i], real_mixing, per[i], infos[i]);
        } catch (const std::exception& ex) {
            infos[i].push_back({join_ids({cfg.experiment, "seed=" + std::to_string(cfg.seeds[i])}), 0.0, false, ex.what()});
        }
    });
    for (std::size_t i = 0; i < per.size(); ++i) {
        for (auto& r : per[i]) res.runs.push_back(std::move(r));
        res.info.insert(res.info.end(), infos[i].begin(), infos[i].end());
    }
    return res;
}

}  // namespace

SeparationResult run_waves(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<Signal> sigs;
    std::vector<std::string> labels;
    for (double f : cfg.sine_freqs) {
        sigs.push_back(gen_sine(f, cfg.wave_rate, cfg.wave_duration));
        labels.push_back("sine_" + fmt(f) + "Hz");
    }
    sigs.push_back(gen_square(cfg.square_freq, cfg.wave_rate, cfg.wave_duration));
    labels.push_back("square_" + fmt(cfg.square_freq) + "Hz");
    return run_separation(cfg, SourceSet::from_signals(sigs, labels), true);
}

std::vector<std::string> write_surrogates(const std::string& dir, double rate, double duration) {
    fs::create_directories(dir);
    std::vector<std::string> paths;
    for (int k = 0; k < 4; ++k) {
        const Signal s = gen_speech_surrogate(static_cast<std::uint64_t>(1000 + k), rate, duration);
        std::vector<double> v(static_cast<std::size_t>(s.size()));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.samples[static_cast<Eigen::Index>(i)].real();
        const double peak = *std::max_element(v.begin(), v.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
        const std::string path = dir + "/surrogate_" + std::to_string(k) + ".wav";
        write_wav(path, v, static_cast<int>(rate), 0.9 / std::abs(peak));
        paths.push_back(path);
    }
    return paths;
}

SeparationResult run_audio(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<AudioSegment> segs = cfg.audio;
    if (segs.empty())
        for (int k = 0; k < 4; ++k) segs.push_back({cfg.audio_dir + "/surrogate_" + std::to_string(k) + ".wav", 0.0, 0.0});
    // file problems abort before any run
    std::vector<Signal> sigs;
    std::vector<std::string> labels;
    for (const auto& s : segs) {
        const double dur = s.duration > 0 ? s.duration : cfg.audio_duration;
        sigs.push_back(ingest_wav(s.path, s.offset, dur, cfg.audio_rate));
        labels.push_back(fs::path(s.path).stem().string());
    }
    Eigen::Index len = sigs.front().size();
    for (const auto& s : sigs) len = std::min(len, s.size());
    for (auto& s : sigs) s.samples.conservativeResize(len);
    return run_separation(cfg, SourceSet::from_signals(sigs, labels), true);
}

// ------------------------------------------------------------------- radar

RadarResult run_radar_sweep(const ExperimentConfig& cfg) {
    validate_config(cfg);
    struct Job {
        std::string kind;
        double value;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& k : cfg.radar_kinds)
        for (double v : cfg.values)
            for (auto s : cfg.seeds) jobs.push_back({k, v, s});

    std::vector<std::vector<RadarRow>> per(jobs.size());
    std::vector<std::vector<RunInfo>> infos(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        ScenarioConfig sc;
        sc.kind = jammer_from_string(job.kind);
        sc.delta_theta = cfg.dtheta;
        sc.snr_db = cfg.snr_db;
        sc.sir_db = cfg.sir_db;
        if (cfg.axis == "dtheta") sc.delta_theta = job.value;
        if (cfg.axis == "snr") sc.snr_db = job.value;
        if (cfg.axis == "sir") sc.sir_db = job.value;
        sc.ula = cfg.ula;
        sc.waveform = cfg.waveform;
        // the same seed gives the same waveform and noise draw at every sweep point
        sc.seed = derive_seed(job.seed, 1000);
        const std::string point = job.kind + "/" + cfg.axis + "=" + fmt(job.value) + "/seed=" + std::to_string(job.seed);
        RadarScene scene;
        WhiteningResult wr, wr_real;
        FourthOrderTensor c;
        try {
            scene = build_scenario(sc);
            wr = whiten(DataMatrix{scene.mixed, sc.waveform.sample_rate}, 2);
            c = fourth_moment_tensor(wr.z.x);
            wr_real = whiten(DataMatrix{scene.mixed.real().cast<cd>(), sc.waveform.sample_rate}, 2);
            if (cfg.export_scenes) {
                const std::string dir = cfg.out_dir + "/scenes";
                fs::create_directories(dir);
                export_scene(scene, dir, job.kind + "_" + cfg.axis + "_" + fmt(job.value) + "_seed" + std::to_string(job.seed));
            }
        } catch (const std::exception& ex) {
            for (const auto& alg : cfg.algorithms) {
                per[i].push_back({job.kind, alg, job.value, job.seed, kNaN, false});
                infos[i].push_back({"radar/" + point + "/" + alg, 0.0, false, ex.what()});
            }
            return;
        }
        for (const auto& alg : cfg.algorithms) {
            RunInfo info{"radar/" + point + "/" + alg};
            const auto t0 = std::chrono::steady_clock::now();
            RadarRow row{job.kind, alg, job.value, job.seed, kNaN, false};
            try {
                const std::uint64_t aseed = derive_seed(job.seed, algo_stream(alg));
                if (alg == "psa") {
                    // skewness baselines only see the real part
                    const UnmixingMatrix w = separate(alg, c, wr_real.z.x, 2, cfg, aseed);
                    const CVector ref = scene.target_waveform.real().cast<cd>();
                    const Eigen::Index k = select_target_column(w, wr_real.z.x, ref);
                    row.sir_improvement = sir_improvement(scene, wr_real.v, w.w.col(k), true);
                    row.converged = w.converged();
                } else {
                    const UnmixingMatrix w = separate(alg, c, wr.z.x, 2, cfg, aseed);
                    const Eigen::Index k = select_target_column(w, wr.z.x, scene.target_waveform);
                    row.sir_improvement = sir_improvement(scene, wr.v, w.w.col(k));
                    row.converged = w.diagnostics[static_cast<std::size_t>(k)].converged;
                }
            } catch (const std::exception& ex) {
                info.completed = false;
                info.error = ex.what();
            }
            info.wall_seconds = seconds_since(t0);
            per[i].push_back(row);
            infos[i].push_back(info);
        }
    });

    RadarResult res;
    for (std::size_t i = 0; i < per.size(); ++i) {
        res.rows.insert(res.rows.end(), per[i].begin(), per[i].end());
        res.info.insert(res.info.end(), infos[i].begin(), infos[i].end());
    }
    for (const auto& k : cfg.radar_kinds)
        for (double v : cfg.values)
            for (const auto& alg : cfg.algorithms) {
                std::vector<double> xs;
                for (const auto& r : res.rows)
                    if (r.kind == k && r.value == v && r.algorithm == alg && std::isfinite(r.sir_improvement))
                        xs.push_back(r.sir_improvement);
                RadarPoint p{k, alg, v};
                p.count = static_cast<int>(xs.size());
                if (!xs.empty()) {
                    p.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
                    double ss = 0.0;
                    for (double x : xs) ss += (x - p.mean) * (x - p.mean);
                    p.stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
                } else {
                    p.mean = p.stddev = kNaN;
                }
                res.summary.push_back(p);
            }
    return res;
}

// ------------------------------------------------------------------ output

std::string Table::to_csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += '\n';
    }
    return s;
}

Table Table::from_csv(const std::string& text) {
    Table t;
    std::stringstream ss(text);
    std::string line;
    auto cells = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ls(l);
        std::string c;
        while (std::getline(ls, c, ',')) out.push_back(c);
        if (!l.empty() && l.back() == ',') out.emplace_back();
        return out;
    };
    if (std::getline(ss, line)) t.columns = cells(line);
    while (std::getline(ss, line))
        if (!line.empty()) t.rows.push_back(cells(line));
    return t;
}

namespace {

double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    int n = 0;
    for (double x : v)
        if (std::isfinite(x)) s += x, ++n;
    return n ? s / n : kNaN;
}

}  // namespace

PlotData emit_plotdata(const ValidationResult& r) {
    PlotData pd;
    pd.results.columns = {"algorithm", "tensor", "tensor_seed", "vector", "s_w", "lambda", "residual", "converged"};
    for (const auto& e : r.extractions)
        pd.results.rows.push_back({e.algorithm, std::to_string(e.tensor), std::to_string(e.tensor_seed),
                                   std::to_string(e.vector), fmt(e.s), fmt(e.lambda), fmt(e.residual),
                                   e.converged ? "1" : "0"});
    Table curve;
    curve.columns = {"algorithm", "threshold", "log10_gap", "successes", "attempts"};
    Figure fig{"validation.svg", "Eigenvector recovery", "-log10(1 - threshold)", "successes"};
    for (const auto& [alg, counts] : r.curve) {
        int attempts = 0;
        for (const auto& e : r.extractions) attempts += e.algorithm == alg;
        Series s{alg};
        for (std::size_t k = 0; k < r.thresholds.size(); ++k) {
            const double gap = -std::log10(1.0 - r.thresholds[k]);
            curve.rows.push_back({alg, fmt(r.thresholds[k]), fmt(gap), std::to_string(counts[k]), std::to_string(attempts)});
            s.x.push_back(gap);
            s.y.push_back(counts[k]);
        }
        fig.series.push_back(s);
    }
    pd.summary = curve;
    pd.figures.push_back(fig);
    return pd;
}

PlotData emit_plotdata(const SeparationResult& r, const std::string& experiment, const ExperimentConfig& cfg) {
    PlotData pd;
    pd.results.columns = {"algorithm", "seed", "isi", "acc", "sdr_mean", "sdr_min", "extras"};
    for (const auto& run : r.runs) {
        const std::string row = report_csv_row(run.report);
        std::vector<std::string> cells;
        std::stringstream ss(row);
        std::string c;
        for (int k = 0; k < 6 && std::getline(ss, c, ','); ++k) cells.push_back(c);
        std::getline(ss, c);
        cells.push_back(c);
        pd.results.rows.push_back(cells);
    }
    Table summary;
    summary.columns = {"algorithm", "runs", "isi_median", "acc_median", "sdr_mean_median", "isi_mean", "acc_mean", "sdr_mean_mean"};
    Figure isi_fig{experiment + "_isi.svg", experiment + ": ISI per seed", "seed", "ISI"};
    Figure sdr_fig{experiment + "_sdr.svg", experiment + ": mean SDR per seed", "seed", "SDR (dB)"};
    for (const auto& alg : cfg.algorithms) {
        std::vector<double> is, ac, sd;
        Series si{alg}, ss{alg};
        for (const auto& run : r.runs) {
            if (run.report.algorithm != alg) continue;
            is.push_back(run.report.isi);
            ac.push_back(run.report.acc);
            sd.push_back(run.report.sdr_mean());
            si.x.push_back(static_cast<double>(run.report.seed));
            si.y.push_back(run.report.isi);
            ss.x.push_back(static_cast<double>(run.report.seed));
            ss.y.push_back(run.report.sdr_mean());
        }
        summary.rows.push_back({alg, std::to_string(is.size()), fmt(median(is)), fmt(median(ac)), fmt(median(sd)),
                                fmt(mean(is)), fmt(mean(ac)), fmt(mean(sd))});
        isi_fig.series.push_back(si);
        sdr_fig.series.push_back(ss);
    }
    pd.summary = summary;
    pd.figures = {isi_fig, sdr_fig};
    return pd;
}

PlotData emit_plotdata(const RadarResult& r, const ExperimentConfig& cfg) {
    PlotData pd;
    pd.results.columns = {"kind", "axis", "value", "seed", "algorithm", "sir_improvement_db", "converged",
                          "dtheta", "snr_db", "sir_db", "n_elements"};
    for (const auto& row : r.rows) {
        const double dth = cfg.axis == "dtheta" ? row.value : cfg.dtheta;
        const double snr = cfg.axis == "snr" ? row.value : cfg.snr_db;
        const double sir = cfg.axis == "sir" ? row.value : cfg.sir_db;
        pd.results.rows.push_back({row.kind, cfg.axis, fmt(row.value), std::to_string(row.seed), row.algorithm,
                                   fmt(row.sir_improvement), row.converged ? "1" : "0", fmt(dth), fmt(snr), fmt(sir),
                                   std::to_string(cfg.ula.n_elements)});
    }
    Table summary;
    summary.columns = {"kind", "axis", "value", "algorithm", "mean_db", "std_db", "count"};
    for (const auto& p : r.summary)
        summary.rows.push_back({p.kind, cfg.axis, fmt(p.value), p.algorithm, fmt(p.mean), fmt(p.stddev), std::to_string(p.count)});
    pd.summary = summary;
    for (const auto& k : cfg.radar_kinds) {
        Figure fig{"radar_" + k + "_" + cfg.axis + ".svg", "SIR improvement, " + k, cfg.axis, "SIR improvement (dB)"};
        for (const auto& alg : cfg.algorithms) {
            Series s{alg};
            for (const auto& p : r.summary)
                if (p.kind == k && p.algorithm == alg) {
                    s.x.push_back(p.value);
                    s.y.push_back(p.mean);
                }
            fig.series.push_back(s);
        }
        pd.figures.push_back(fig);
    }
    return pd;
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + p.string());
}

json runs_json(const std::vector<RunInfo>& infos) {
    json a = json::array();
    for (const auto& r : infos)
        a.push_back({{"id", r.id}, {"wall_seconds", r.wall_seconds}, {"completed", r.completed}, {"error", r.error}});
    return a;
}

void write_plotdata(const fs::path& dir, const PlotData& pd) {
    write_text(dir / "results.csv", pd.results.to_csv());
    if (pd.summary) write_text(dir / "summary.csv", pd.summary->to_csv());
    for (const auto& f : pd.figures) write_text(dir / f.file, render_svg(f));
}

}  // namespace

bool run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    json manifest;
    manifest["toolkit_version"] = kToolkitVersion;
    manifest["experiment"] = cfg.experiment;
    manifest["config"] = json::parse(config_to_json(cfg));
    std::vector<RunInfo> infos;
    std::size_t rows = 0;

    if (cfg.experiment == "validate") {
        const ValidationResult r = run_validation(cfg);
        const PlotData pd = emit_plotdata(r);
        write_plotdata(dir, pd);
        infos = r.runs;
        rows = pd.results.rows.size();
        json curve;
        for (const auto& [alg, counts] : r.curve) curve[alg] = counts;
        manifest["curve"] = curve;
        manifest["thresholds"] = r.thresholds;
    } else if (cfg.experiment == "waves" || cfg.experiment == "audio") {
        const SeparationResult r = cfg.experiment == "waves" ? run_waves(cfg) : run_audio(cfg);
        const PlotData pd = emit_plotdata(r, cfg.experiment, cfg);
        write_plotdata(dir, pd);
        infos = r.info;
        rows = pd.results.rows.size();
        json reports = json::array();
        for (const auto& run : r.runs) reports.push_back(json::parse(report_json(run.report)));
        manifest["reports"] = reports;
        json cov = json::array();
        for (Eigen::Index i = 0; i < r.source_covariance.rows(); ++i) {
            json jr = json::array();
            for (Eigen::Index j = 0; j < r.source_covariance.cols(); ++j) jr.push_back(r.source_covariance(i, j));
            cov.push_back(jr);
        }
        manifest["source_covariance"] = cov;
        manifest["source_labels"] = r.sources.labels;
        if (cfg.write_signals) {
            const fs::path sig = dir / "signals";
            fs::create_directories(sig);
            write_sourceset_csv((sig / "sources.csv").string(), r.sources);
            for (const auto& run : r.runs) {
                if (run.estimate.count() == 0) continue;
                const std::string stem = run.report.algorithm + "_seed" + std::to_string(run.report.seed);
                write_sourceset_csv((sig / (stem + ".csv")).string(), run.estimate);
                if (cfg.experiment == "audio")
                    for (Eigen::Index k = 0; k < run.estimate.count(); ++k) {
                        std::vector<double> v(static_cast<std::size_t>(run.estimate.length()));
                        for (std::size_t t = 0; t < v.size(); ++t) v[t] = run.estimate.data(k, static_cast<Eigen::Index>(t)).real();
                        double peak = 0.0;
                        for (double x : v) peak = std::max(peak, std::abs(x));
                        write_wav((sig / (stem + "_y" + std::to_string(k) + ".wav")).string(), v,
                                  static_cast<int>(run.estimate.sample_rate), peak > 0 ? 0.9 / peak : 1.0);
                    }
            }
        }
    } else {
        const RadarResult r = run_radar_sweep(cfg);
        const PlotData pd = emit_plotdata(r, cfg);
        write_plotdata(dir, pd);
        infos = r.info;
        rows = pd.results.rows.size();
    }

    bool all = true;
    for (const auto& i : infos) all = all && i.completed;
    manifest["runs"] = runs_json(infos);
    manifest["row_count"] = rows;
    manifest["all_completed"] = all;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    return all;
}

}  // namespace cpka
