#include <gtest/gtest.h>

#include <cmath>

#include "cpka/radar.hpp"
#include "cpka/whitening.hpp"

using namespace cpka;

namespace {

double abs_corr(const CVector& a, const CVector& b) {
    return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace

TEST(Waveforms, LfmInstantaneousFrequency) {
    const WaveformParams p;
    const Signal s = gen_lfm(p.bandwidth, p.pulse_width, p.sample_rate);
    ASSERT_EQ(s.size(), 2000);
    double worst = 0;
    const Eigen::Index n = s.size();
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double f = std::arg(s.samples[k + 1] * std::conj(s.samples[k])) * p.sample_rate / (2 * kPi);
        const double t = (static_cast<double>(k) + 0.5) / p.sample_rate;
        const double want = -p.bandwidth / 2 + p.bandwidth * t / p.pulse_width;
        worst = std::max(worst, std::abs(f - want));
    }
    EXPECT_LE(worst, 0.01 * p.bandwidth);
}

TEST(Waveforms, CsiSingleToneAndComb) {
    const Signal one = gen_csi(1, 1e6, 20e6, 100e-6, 3);
    for (Eigen::Index i = 0; i < one.size(); ++i) EXPECT_NEAR(std::abs(one.samples[i]), 1.0, 1e-12);
    const Signal comb = gen_csi(8, 1.25e6, 20e6, 100e-6, 3);
    EXPECT_NEAR(comb.samples.squaredNorm() / static_cast<double>(comb.size()), 1.0, 0.05);
}

TEST(Waveforms, IsrjRepeatAndCorrelation) {
    const WaveformParams p;
    const Signal lfm = gen_lfm(p.bandwidth, p.pulse_width, p.sample_rate);
    EXPECT_NEAR(abs_corr(gen_isrj(lfm, p.isrj_slice_period, 1.0, 0.0).samples, lfm.samples), 1.0, 1e-12);
    EXPECT_GE(abs_corr(gen_isrj(lfm, p.isrj_slice_period, p.isrj_duty, p.isrj_delay).samples, lfm.samples), 0.3);
    // repeat delay shorter than the slice
    EXPECT_THROW(gen_isrj(lfm, 10e-6, 0.5, 1e-6), InputError);
}

TEST(Array, SteeringAndBeamwidth) {
    const UlaConfig ula;
    const CVector a = steering_vector(0.0, ula);
    for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(a(i) - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(beamwidth_3db(ula), 0.443, 1e-3);
    EXPECT_NEAR(beamwidth_3db({2, 0.5}), 0.886, 1e-12);

    // numeric half-power width of the broadside beam, within 10 %
    double lo = 0, hi = 1;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double g = std::norm(a.dot(steering_vector(mid, ula)));
        (g > 0.5 ? lo : hi) = mid;
    }
    EXPECT_NEAR(2 * lo, beamwidth_3db(ula), 0.1 * beamwidth_3db(ula));
    EXPECT_THROW(UlaConfig({1, 0.5}).validate(), InputError);
}

TEST(Scenario, DeclaredPowersAndGeometry) {
    ScenarioConfig sc;
    sc.kind = JammerKind::CSI;
    sc.seed = 4;
    const RadarScene s = build_scenario(sc);
    EXPECT_NEAR(s.measured_sir_db(), 0.0, 0.1);
    EXPECT_NEAR(s.measured_snr_db(), 10.0, 0.1);
    // jammer sits exactly one beamwidth off the target at broadside
    const CVector aj = steering_vector(s.theta_3db, sc.ula);
    const CVector col = s.interference.col(0) / s.interference_waveform(0);
    EXPECT_LT((col - 2.0 * aj).norm(), 1e-12);
    EXPECT_EQ(s.mixed.rows(), 4);
    EXPECT_LT((s.mixed - s.target - s.interference - s.noise).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Scenario, IsrjIsNonorthogonalToTarget) {
    ScenarioConfig sc;
    sc.kind = JammerKind::ISRJ;
    const RadarScene s = build_scenario(sc);
    EXPECT_GE(abs_corr(s.target_waveform, s.interference_waveform), 0.2);
}

TEST(SirImprovement, ProjectionOracleAndSign) {
    ScenarioConfig sc;
    sc.kind = JammerKind::CSI;
    sc.snr_db = 40;
    const RadarScene s = build_scenario(sc);
    const WhiteningResult wr = whiten({s.mixed, sc.waveform.sample_rate}, 2);

    // direction in whitened space that nulls the jammer's steering vector
    const CVector at = wr.v * steering_vector(0.0, sc.ula);
    const CVector aj = wr.v * steering_vector(s.delta_theta * s.theta_3db, sc.ula);
    CVector w = at - aj * (aj.dot(at) / aj.squaredNorm());
    w.normalize();
    const double pt = (w.adjoint() * wr.v * s.target).squaredNorm();
    const double pi = (w.adjoint() * wr.v * s.interference).squaredNorm();
    EXPECT_NEAR(sir_improvement(s, wr.v, w), 10 * std::log10(pt / pi) - s.sir_in_db, 1e-9);
    EXPECT_GT(sir_improvement(s, wr.v, w), 20.0);

    const CVector toward_jammer = aj.normalized();
    EXPECT_LT(sir_improvement(s, wr.v, toward_jammer), sir_improvement(s, wr.v, w) - 20.0);
}
