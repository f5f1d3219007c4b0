#include "cpka/radar.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include <json.hpp>

namespace cpka {

void UlaConfig::validate() const {
    if (n_elements < 2) throw InputError("ULA needs at least two elements");
    if (!(spacing_over_lambda > 0) || spacing_over_lambda > 0.5)
        throw InputError("ULA spacing must lie in (0, lambda/2]");
}

const char* to_string(JammerKind k) { return k == JammerKind::CSI ? "csi" : "isrj"; }

JammerKind jammer_from_string(const std::string& s) {
    if (s == "csi" || s == "CSI") return JammerKind::CSI;
    if (s == "isrj" || s == "ISRJ") return JammerKind::ISRJ;
    throw InputError("unknown jammer kind '" + s + "'");
}

double RadarScene::measured_sir_db() const {
    return 10.0 * std::log10(target.squaredNorm() / interference.squaredNorm());
}

double RadarScene::measured_snr_db() const {
    return 10.0 * std::log10(target.squaredNorm() / noise.squaredNorm());
}

Signal gen_lfm(double bandwidth, double pulse_width, double sample_rate) {
    if (!(bandwidth > 0) || !(pulse_width > 0) || !(sample_rate > 0)) throw InputError("gen_lfm: non-positive parameter");
    if (bandwidth > sample_rate) throw InputError("gen_lfm: bandwidth exceeds the complex sample rate (aliasing)");
    const auto n = static_cast<Eigen::Index>(std::llround(pulse_width * sample_rate));
    if (n < 2) throw InputError("gen_lfm: pulse shorter than two samples");
    const double k = bandwidth / pulse_width;
    Signal s{CVector(n), sample_rate};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = -pulse_width / 2 + static_cast<double>(i) / sample_rate;
        s.samples[i] = std::polar(1.0, kPi * k * t * t);
    }
    return s;
}

Signal gen_csi(int n_teeth, double tooth_spacing, double sample_rate, double duration, std::uint64_t seed) {
    if (n_teeth < 1 || !(tooth_spacing > 0)) throw InputError("gen_csi: need n_teeth >= 1 and positive spacing");
    if (n_teeth * tooth_spacing >= sample_rate) throw InputError("gen_csi: comb wider than the sample rate (aliasing)");
    const auto n = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
    if (n < 2) throw InputError("gen_csi: duration too short");
    Rng rng(seed);
    Signal s{CVector::Zero(n), sample_rate};
    for (int k = 0; k < n_teeth; ++k) {
        // comb centred on DC
        const double f = (k - (n_teeth - 1) / 2.0) * tooth_spacing;
        const double ph = 2.0 * kPi * rng.uniform();
        for (Eigen::Index i = 0; i < n; ++i)
            s.samples[i] += std::polar(1.0, 2.0 * kPi * f * static_cast<double>(i) / sample_rate + ph);
    }
    s.samples /= std::sqrt(s.samples.squaredNorm() / static_cast<double>(n));
    return s;
}

Signal gen_isrj(const Signal& base, double slice_period, double duty, double delay) {
    const bool full_repeat = duty == 1.0 && delay == 0.0;  // degenerate case, plain copy
    if (!full_repeat && !(duty > 0 && duty < 1)) throw InputError("gen_isrj: duty must lie in (0, 1)");
    const double fs = base.sample_rate;
    const Eigen::Index len = base.size();
    const auto period = static_cast<Eigen::Index>(std::llround(slice_period * fs));
    const auto width = static_cast<Eigen::Index>(std::llround(slice_period * duty * fs));
    const auto lag = static_cast<Eigen::Index>(std::llround(delay * fs));
    if (period < 1 || width < 1) throw InputError("gen_isrj: slice shorter than one sample");
    if (!full_repeat && lag < width) throw InputError("gen_isrj: delay must cover the sampled slice");
    if (period > len || lag >= len) throw InputError("gen_isrj: slice or delay overruns the pulse");

    Signal s{CVector::Zero(len), fs};
    for (Eigen::Index start = 0; start < len; start += period)
        for (Eigen::Index i = 0; i < width && start + i < len; ++i)
            if (start + lag + i < len) s.samples[start + lag + i] = base.samples[start + i];
    const double p = s.samples.squaredNorm() / static_cast<double>(len);
    if (!(p > 0)) throw InputError("gen_isrj: empty repeat pattern");
    s.samples /= std::sqrt(p);
    return s;
}

CVector steering_vector(double theta, const UlaConfig& ula) {
    ula.validate();
    if (std::abs(theta) >= kPi / 2) throw InputError("steering_vector: |theta| must be below pi/2");
    CVector a(ula.n_elements);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ula.n_elements));
    for (int n = 0; n < ula.n_elements; ++n)
        a[n] = scale * std::polar(1.0, 2.0 * kPi * ula.spacing_over_lambda * n * std::sin(theta));
    return a;
}

double beamwidth_3db(const UlaConfig& ula) {
    ula.validate();
    return 0.886 / (ula.n_elements * ula.spacing_over_lambda);
}

RadarScene build_scenario(const ScenarioConfig& cfg) {
    if (!(cfg.delta_theta > 0)) throw InputError("build_scenario: delta_theta must be positive");
    cfg.ula.validate();
    const WaveformParams& wp = cfg.waveform;
    RadarScene sc;
    sc.config = cfg;
    sc.theta_3db = beamwidth_3db(cfg.ula);
    sc.delta_theta = cfg.delta_theta;
    sc.sir_in_db = cfg.sir_db;
    sc.snr_in_db = cfg.snr_db;

    const Signal lfm = gen_lfm(wp.bandwidth, wp.pulse_width, wp.sample_rate);
    Signal jam;
    if (cfg.kind == JammerKind::CSI) {
        const double spacing = wp.csi_spacing > 0 ? wp.csi_spacing : wp.bandwidth / wp.csi_teeth;
        jam = gen_csi(wp.csi_teeth, spacing, wp.sample_rate, wp.pulse_width, derive_seed(cfg.seed, 1));
    } else {
        jam = gen_isrj(lfm, wp.isrj_slice_period, wp.isrj_duty, wp.isrj_delay);
    }
    sc.target_waveform = lfm.samples;
    sc.interference_waveform = jam.samples;

    const int n = cfg.ula.n_elements;
    const Eigen::Index len = lfm.size();
    const double pt = 1.0;  // per-element target power
    const double pj = pt / std::pow(10.0, cfg.sir_db / 10.0);
    const double pn = pt / std::pow(10.0, cfg.snr_db / 10.0);
    const CVector at = steering_vector(0.0, cfg.ula);
    const CVector aj = steering_vector(cfg.delta_theta * sc.theta_3db, cfg.ula);
    sc.target = std::sqrt(pt * n) * at * lfm.samples.transpose();
    sc.interference = std::sqrt(pj * n) * aj * jam.samples.transpose();

    Rng rng(derive_seed(cfg.seed, 2));
    sc.noise.resize(n, len);
    for (Eigen::Index j = 0; j < len; ++j)
        for (int i = 0; i < n; ++i) sc.noise(i, j) = rng.cnormal();
    // calibrate to the declared noise power exactly
    sc.noise *= std::sqrt(pn * n * static_cast<double>(len) / sc.noise.squaredNorm());
    sc.mixed = sc.target + sc.interference + sc.noise;
    return sc;
}

double sir_improvement(const RadarScene& scene, const CMatrix& v, const CVector& w, bool real_part) {
    CMatrix t = scene.target, i = scene.interference;
    if (real_part) {
        t = t.real().cast<cd>();
        i = i.real().cast<cd>();
    }
    const CMatrix proj = w.adjoint() * v;
    const double pt = (proj * t).squaredNorm();
    const double pi = (proj * i).squaredNorm();
    if (!(pi > 0)) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(pt / pi) - scene.sir_in_db;
}

Eigen::Index select_target_column(const UnmixingMatrix& w, const CMatrix& z, const CVector& waveform) {
    Eigen::Index best = 0;
    double best_c = -1.0;
    for (Eigen::Index k = 0; k < w.w.cols(); ++k) {
        const CVector y = (w.w.col(k).adjoint() * z).transpose();
        const double den = y.norm() * waveform.norm();
        const double c = den > 0 ? std::abs(y.dot(waveform)) / den : 0.0;
        if (c > best_c) {
            best_c = c;
            best = k;
        }
    }
    return best;
}

namespace {

void write_component(const std::string& path, const CMatrix& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) os << (i ? "," : "") << "ch" << i << "_re,ch" << i << "_im";
    os << '\n';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            os << (i ? "," : "") << m(i, j).real() << ',' << m(i, j).imag();
        os << '\n';
    }
}

}  // namespace

void export_scene(const RadarScene& sc, const std::string& dir, const std::string& stem) {
    const std::string base = dir + "/" + stem;
    write_component(base + "_mixed.csv", sc.mixed);
    write_component(base + "_target.csv", sc.target);
    write_component(base + "_interference.csv", sc.interference);
    write_component(base + "_noise.csv", sc.noise);
    const auto& c = sc.config;
    nlohmann::json j;
    j["kind"] = to_string(c.kind);
    j["delta_theta"] = c.delta_theta;
    j["snr_db"] = c.snr_db;
    j["sir_db"] = c.sir_db;
    j["seed"] = c.seed;
    j["theta_3db"] = sc.theta_3db;
    j["ula"] = {{"n_elements", c.ula.n_elements}, {"spacing_over_lambda", c.ula.spacing_over_lambda}};
    j["waveform"] = {{"bandwidth", c.waveform.bandwidth},
                     {"pulse_width", c.waveform.pulse_width},
                     {"sample_rate", c.waveform.sample_rate},
                     {"csi_teeth", c.waveform.csi_teeth},
                     {"csi_spacing", c.waveform.csi_spacing},
                     {"isrj_slice_period", c.waveform.isrj_slice_period},
                     {"isrj_duty", c.waveform.isrj_duty},
                     {"isrj_delay", c.waveform.isrj_delay}};
    j["measured_sir_db"] = sc.measured_sir_db();
    j["measured_snr_db"] = sc.measured_snr_db();
    j["components"] = {stem + "_mixed.csv", stem + "_target.csv", stem + "_interference.csv", stem + "_noise.csv"};
    std::ofstream os(base + ".json");
    if (!os) throw std::runtime_error("cannot write " + base + ".json");
    os << j.dump(2) << '\n';
}

}  // namespace cpka
