#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpka/types.hpp"

namespace cpka {

struct Signal {
    CVector samples;
    double sample_rate = 1.0;

    Eigen::Index size() const { return samples.size(); }
    bool is_real(double tol = 0.0) const;
};

// N equally long signals held as the rows of an N x L matrix.
struct SourceSet {
    CMatrix data;
    std::vector<std::string> labels;
    double sample_rate = 1.0;

    SourceSet() = default;
    SourceSet(CMatrix d, std::vector<std::string> l, double fs);
    static SourceSet from_signals(const std::vector<Signal>& sigs, std::vector<std::string> labels = {});

    Eigen::Index count() const { return data.rows(); }
    Eigen::Index length() const { return data.cols(); }
    Signal signal(Eigen::Index i) const { return {data.row(i).transpose(), sample_rate}; }
};

struct MixingMatrix {
    CMatrix a;
};

struct DataMatrix {
    CMatrix x;
    double sample_rate = 1.0;

    Eigen::Index channels() const { return x.rows(); }
    Eigen::Index samples() const { return x.cols(); }
};

Signal gen_sine(double freq, double sample_rate, double duration, double phase = 0.0);
Signal gen_square(double freq, double sample_rate, double duration);

// Amplitude-modulated noise bursts with a couple of resonances; a stand-in
// for short speech excerpts when no recordings are supplied.
Signal gen_speech_surrogate(std::uint64_t seed, double sample_rate, double duration);

MixingMatrix random_mixing_matrix(int n, bool complex, std::uint64_t seed);
DataMatrix mix(const SourceSet& sources, const MixingMatrix& a);

// snr_db = +inf leaves the input untouched.
DataMatrix add_noise(const DataMatrix& x, double snr_db, bool complex, std::uint64_t seed);

Signal ingest_wav(const std::string& path, double offset, double duration,
                  std::optional<double> target_rate = std::nullopt);

// Sample correlation coefficients (real part for complex rows).
RMatrix covariance(const SourceSet& sources);

// Zero mean, unit variance copy.
Signal standardize(const Signal& s);

}  // namespace cpka
