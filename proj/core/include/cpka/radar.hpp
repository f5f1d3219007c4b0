#pragma once

#include <string>

#include "cpka/separators.hpp"
#include "cpka/signal_model.hpp"

namespace cpka {

struct UlaConfig {
    int n_elements = 4;
    double spacing_over_lambda = 0.5;

    void validate() const;
};

enum class JammerKind { CSI, ISRJ };
const char* to_string(JammerKind k);
JammerKind jammer_from_string(const std::string& s);

struct WaveformParams {
    double bandwidth = 10e6;     // Hz
    double pulse_width = 100e-6; // s
    double sample_rate = 20e6;   // Hz, complex baseband
    int csi_teeth = 8;
    double csi_spacing = 0;      // Hz, 0 -> bandwidth / csi_teeth
    double isrj_slice_period = 6.4e-6;
    double isrj_duty = 0.25;
    double isrj_delay = 1.6e-6;
};

struct ScenarioConfig {
    JammerKind kind = JammerKind::CSI;
    double delta_theta = 1.0;  // in units of theta_3dB
    double snr_db = 10.0;
    double sir_db = 0.0;
    UlaConfig ula;
    WaveformParams waveform;
    std::uint64_t seed = 0;
};

struct RadarScene {
    ScenarioConfig config;
    CMatrix mixed, target, interference, noise;  // n_elements x L
    CVector target_waveform;
    CVector interference_waveform;
    double sir_in_db = 0, snr_in_db = 0, delta_theta = 0, theta_3db = 0;

    double measured_sir_db() const;
    double measured_snr_db() const;
};

Signal gen_lfm(double bandwidth, double pulse_width, double sample_rate);
Signal gen_csi(int n_teeth, double tooth_spacing, double sample_rate, double duration, std::uint64_t seed);
Signal gen_isrj(const Signal& base, double slice_period, double duty, double delay);

// a_n = exp(j 2 pi d n sin(theta)) / sqrt(N)
CVector steering_vector(double theta, const UlaConfig& ula);
double beamwidth_3db(const UlaConfig& ula);

RadarScene build_scenario(const ScenarioConfig& cfg);

// 10 log10(|w^H V T|^2 / |w^H V I|^2) - SIR_in. V is the whitening map the
// separator ran behind; with `real_part` set the components are reduced to
// their real parts first (skewness baselines).
double sir_improvement(const RadarScene& scene, const CMatrix& v, const CVector& w, bool real_part = false);

// Column of W whose output w^H Z correlates best with the target waveform.
Eigen::Index select_target_column(const UnmixingMatrix& w, const CMatrix& z, const CVector& waveform);

void export_scene(const RadarScene& scene, const std::string& dir, const std::string& stem);

}  // namespace cpka
