#include "cpka/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpka/wav.hpp"

namespace cpka {

bool Signal::is_real(double tol) const {
    return samples.imag().cwiseAbs().maxCoeff() <= tol;
}

SourceSet::SourceSet(CMatrix d, std::vector<std::string> l, double fs)
    : data(std::move(d)), labels(std::move(l)), sample_rate(fs) {
    if (labels.empty())
        for (Eigen::Index i = 0; i < data.rows(); ++i) labels.push_back("s" + std::to_string(i));
    if (static_cast<Eigen::Index>(labels.size()) != data.rows())
        throw InputError("SourceSet: label count does not match row count");
}

SourceSet SourceSet::from_signals(const std::vector<Signal>& sigs, std::vector<std::string> labels) {
    if (sigs.size() < 2) throw InputError("SourceSet needs at least two signals");
    const Eigen::Index len = sigs.front().size();
    CMatrix d(static_cast<Eigen::Index>(sigs.size()), len);
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        if (sigs[i].size() != len || sigs[i].sample_rate != sigs.front().sample_rate)
            throw InputError("SourceSet: signals differ in length or sample rate");
        d.row(static_cast<Eigen::Index>(i)) = sigs[i].samples.transpose();
    }
    return SourceSet(std::move(d), std::move(labels), sigs.front().sample_rate);
}

static Eigen::Index sample_count(double sample_rate, double duration) {
    const auto n = static_cast<Eigen::Index>(std::llround(sample_rate * duration));
    if (n < 2) throw InputError("signal would have fewer than two samples");
    return n;
}

// A square wave may sit exactly at Nyquist (+1, -1, ...), a sine may not.
static void check_freq(double freq, double sample_rate, bool allow_nyquist = false) {
    if (!(sample_rate > 0)) throw InputError("sample_rate must be positive");
    const bool over = allow_nyquist ? freq > sample_rate / 2 : freq >= sample_rate / 2;
    if (!(freq > 0) || over) throw InputError("frequency must lie in (0, Nyquist)");
}

Signal gen_sine(double freq, double sample_rate, double duration, double phase) {
    check_freq(freq, sample_rate);
    const Eigen::Index n = sample_count(sample_rate, duration);
    Signal s{CVector(n), sample_rate};
    for (Eigen::Index t = 0; t < n; ++t)
        s.samples[t] = std::sin(2.0 * kPi * freq * static_cast<double>(t) / sample_rate + phase);
    return s;
}

Signal gen_square(double freq, double sample_rate, double duration) {
    check_freq(freq, sample_rate, true);
    const Eigen::Index n = sample_count(sample_rate, duration);
    Signal s{CVector(n), sample_rate};
    for (Eigen::Index t = 0; t < n; ++t) {
        // half-period index; even halves are high
        const auto half = static_cast<long long>(std::floor(2.0 * freq * static_cast<double>(t) / sample_rate));
        s.samples[t] = (half % 2 == 0) ? 1.0 : -1.0;
    }
    return s;
}

namespace {

// two-pole resonator, unit peak gain is not needed since we normalise later
struct Resonator {
    double a1 = 0, a2 = 0, y1 = 0, y2 = 0;
    void tune(double f, double fs, double r) {
        a1 = 2.0 * r * std::cos(2.0 * kPi * f / fs);
        a2 = -r * r;
    }
    double step(double x) {
        const double y = x + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        return y;
    }
};

}  // namespace

Signal gen_speech_surrogate(std::uint64_t seed, double sample_rate, double duration) {
    const Eigen::Index n = sample_count(sample_rate, duration);
    Rng rng(seed);
    std::vector<double> env(static_cast<std::size_t>(n), 0.0);
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);

    Resonator f1, f2;
    double pitch = rng.uniform(100.0, 220.0);
    double voicing = 0.7;
    double phase = 0.0;

    Eigen::Index t = static_cast<Eigen::Index>(rng.uniform(0.0, 0.15) * sample_rate);
    while (t < n) {
        const auto burst = static_cast<Eigen::Index>(rng.uniform(0.08, 0.25) * sample_rate);
        const auto gap = static_cast<Eigen::Index>(rng.uniform(0.03, 0.15) * sample_rate);
        const double amp = rng.uniform(0.3, 1.0);
        f1.tune(rng.uniform(300.0, 900.0), sample_rate, 0.97);
        f2.tune(rng.uniform(900.0, 2500.0), sample_rate, 0.95);
        pitch = std::clamp(pitch * rng.uniform(0.9, 1.1), 90.0, 250.0);
        voicing = rng.uniform(0.2, 0.9);
        for (Eigen::Index k = 0; k < burst && t + k < n; ++k) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(burst));
            env[static_cast<std::size_t>(t + k)] = amp * w;
        }
        t += burst + gap;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        phase += pitch / sample_rate;
        double pulse = 0.0;
        if (phase >= 1.0) {
            phase -= 1.0;
            pulse = 1.0;
        }
        const double exc = voicing * pulse * 8.0 + (1.0 - voicing) * rng.normal();
        const double y = f1.step(exc) + 0.5 * f2.step(exc);
        out[static_cast<std::size_t>(i)] = env[static_cast<std::size_t>(i)] * y;
    }

    Signal s{CVector(n), sample_rate};
    for (Eigen::Index i = 0; i < n; ++i) s.samples[i] = out[static_cast<std::size_t>(i)];
    return standardize(s);
}

MixingMatrix random_mixing_matrix(int n, bool complex, std::uint64_t seed) {
    if (n < 2) throw InputError("mixing matrix needs n >= 2");
    Rng rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        CMatrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = complex ? rng.cnormal() : cd(rng.normal(), 0.0);
        const double scale = Eigen::JacobiSVD<CMatrix>(a).singularValues()(0);
        if (std::abs(a.determinant()) > 1e-10 * std::pow(scale, n)) return {a};
    }
    throw std::runtime_error("random_mixing_matrix: no nonsingular draw in 100 attempts");
}

DataMatrix mix(const SourceSet& sources, const MixingMatrix& a) {
    if (a.a.rows() != a.a.cols() || a.a.cols() != sources.count())
        throw InputError("mix: mixing matrix does not match source count");
    return {a.a * sources.data, sources.sample_rate};
}

DataMatrix add_noise(const DataMatrix& x, double snr_db, bool complex, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return x;
    if (!std::isfinite(snr_db)) throw InputError("add_noise: snr_db must be finite or +inf");
    const double power = x.x.cwiseAbs2().mean();
    if (!(power > 0)) throw InputError("add_noise: input has zero power");
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    Rng rng(seed);
    DataMatrix out = x;
    for (Eigen::Index i = 0; i < x.x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.x.cols(); ++j)
            out.x(i, j) += sigma * (complex ? rng.cnormal() : cd(rng.normal(), 0.0));
    return out;
}

Signal standardize(const Signal& s) {
    Signal out = s;
    out.samples.array() -= s.samples.mean();
    const double sd = std::sqrt(out.samples.squaredNorm() / static_cast<double>(out.size()));
    if (!(sd > 0)) throw InputError("signal has zero variance");
    out.samples /= sd;
    return out;
}

Signal ingest_wav(const std::string& path, double offset, double duration, std::optional<double> target_rate) {
    const WavData wav = read_wav(path);
    const std::vector<double> ch = wav.channel(0);
    const double fs = wav.sample_rate;
    const auto first = static_cast<std::size_t>(std::llround(std::max(0.0, offset) * fs));
    std::size_t count = ch.size() > first ? ch.size() - first : 0;
    if (duration > 0) count = std::min(count, static_cast<std::size_t>(std::llround(duration * fs)));
    if (count < 2) throw InputError("ingest_wav: empty segment in " + path);

    std::vector<double> seg(ch.begin() + static_cast<std::ptrdiff_t>(first),
                            ch.begin() + static_cast<std::ptrdiff_t>(first + count));
    double rate = fs;
    if (target_rate && *target_rate != fs) {
        if (!(*target_rate > 0)) throw InputError("ingest_wav: target rate must be positive");
        const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(count) * *target_rate / fs));
        if (m < 2) throw InputError("ingest_wav: resampled segment too short");
        std::vector<double> rs(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double pos = static_cast<double>(k) * fs / *target_rate;
            const auto i0 = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(i0);
            const double a = seg[std::min(i0, count - 1)];
            const double b = seg[std::min(i0 + 1, count - 1)];
            rs[k] = a + frac * (b - a);
        }
        seg.swap(rs);
        rate = *target_rate;
    }
    Signal s{CVector(static_cast<Eigen::Index>(seg.size())), rate};
    for (std::size_t i = 0; i < seg.size(); ++i) s.samples[static_cast<Eigen::Index>(i)] = seg[i];
    return standardize(s);
}

RMatrix covariance(const SourceSet& sources) {
    const Eigen::Index n = sources.count();
    const auto len = static_cast<double>(sources.length());
    CMatrix z = sources.data;
    for (Eigen::Index i = 0; i < n; ++i) {
        z.row(i).array() -= z.row(i).mean();
        const double sd = std::sqrt(z.row(i).squaredNorm() / len);
        if (!(sd > 0)) throw InputError("covariance: zero-variance signal " + sources.labels[static_cast<std::size_t>(i)]);
        z.row(i) /= sd;
    }
    RMatrix r = (z * z.adjoint()).real() / len;
    r = (0.5 * (r + r.transpose())).eval();
    for (Eigen::Index i = 0; i < n; ++i) r(i, i) = 1.0;
    return r;
}

}  // namespace cpka
