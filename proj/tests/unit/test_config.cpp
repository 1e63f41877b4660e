#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "risem/config.hpp"

using namespace risem;

namespace {

const double kTheta30 = deg_to_rad(30.0);
const double kThetaM50 = deg_to_rad(-50.0);

LinearRis fig_array(std::size_t n = 100, double d = 0.5, double b = 0.0) { return LinearRis(n, d, {0.01, b, 0.0}); }

}  // namespace

// ---------------------------------------------------------------- random ---

TEST(RandomDraw, DeterministicAndBinary) {
    const auto a = random_phase_draw(257, 9), b = random_phase_draw(257, 9);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, random_phase_draw(257, 10));
    EXPECT_NE(a, random_phase_draw(257, 9, 1));
    for (double v : a) EXPECT_TRUE(v == 0.0 || v == kPi);
    const auto one = random_phase_draw(1, 3);
    EXPECT_TRUE(one[0] == 0.0 || one[0] == kPi);
    EXPECT_THROW(random_phase_draw(0, 1), ValidationError);
}

TEST(RandomDraw, PhasorMeanWithinClt) {
    const std::size_t n = 100000;
    const auto ph = random_phase_draw(n, 2024);
    cplx sum{};
    for (double v : ph) sum += std::exp(cplx(0.0, v));
    EXPECT_LE(std::abs(sum) / n, 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(RandomMoments, Examples) {
    const LinearRis ris = fig_array();
    // |C|² (E^i cosθi / r)² N (A/λ)² = (1/100)² · 100 · (0.01)²
    EXPECT_LE(oracle::rel_err(random_phase_expected_power(ris, {0.0, 1.0}, {100.0, 0.4}), 1e-6), 1e-12);
    EXPECT_NEAR(random_phase_expected_power(ris, {kPi / 2, 1.0}, {100.0, 0.4}), 0.0, 1e-36);
    const double sigma0 = random_phase_expected_rcs(ris, 0.0, 0.0);
    EXPECT_LE(oracle::rel_err(sigma0, 4.0 * kPi * 100.0 * 1e-4), 1e-12);
    EXPECT_NEAR(sigma0, 0.1257, 5e-5);
    EXPECT_LE(oracle::rel_err(random_phase_expected_rcs(ris, deg_to_rad(60.0), 0.0), 0.25 * sigma0), 1e-12);
}

TEST(RandomMoments, RcsIndependentOfScatterAngleBitExact) {
    const LinearRis ris = fig_array();
    for (double ti : {0.0, kTheta30, deg_to_rad(60.0)}) {
        const double ref = random_phase_expected_rcs(ris, ti, 0.0);
        for (int k = -90; k <= 90; k += 5) EXPECT_EQ(random_phase_expected_rcs(ris, ti, deg_to_rad(k)), ref);
    }
}

TEST(RandomMoments, MonteCarloAgrees) {
    const LinearRis ris = fig_array();
    const std::vector<LinearWave> waves{{kTheta30, 1.0}};
    std::vector<LinearObservation> obs;
    for (int k = -90; k <= 90; k += 10) obs.push_back({100.0, deg_to_rad(k)});
    const auto mc = random_phase_monte_carlo(ris, waves, obs, 10000, 5, 4);
    for (std::size_t p = 0; p < obs.size(); ++p) {
        const double want = random_phase_expected_power(ris, waves[0], obs[p]);
        EXPECT_LE(std::abs(mc[p].mean - want), 0.05 * want) << p;
        EXPECT_LE(std::abs(mc[p].mean - want), 3.0 * mc[p].std_error) << p;
    }
}

TEST(RandomMoments, MonteCarloIndependentOfThreads) {
    const LinearRis ris = fig_array(30, 0.5, 0.1);
    const std::vector<LinearWave> waves{{0.2, 1.0}, {-0.7, 0.3}};
    const std::vector<LinearObservation> obs{{50, 0.1}, {50, -1.0}, {70, 0.9}};
    const auto one = random_phase_monte_carlo(ris, waves, obs, 1000, 77, 1);
    for (unsigned t : {2u, 3u, 8u}) {
        const auto many = random_phase_monte_carlo(ris, waves, obs, 1000, 77, t);
        for (std::size_t p = 0; p < obs.size(); ++p) {
            EXPECT_EQ(many[p].mean, one[p].mean);
            EXPECT_EQ(many[p].std_error, one[p].std_error);
        }
    }
    EXPECT_THROW(random_phase_monte_carlo(ris, waves, obs, 1, 0), ValidationError);
}

TEST(RandomMoments, MisoReductions) {
    const LinearRis ris = fig_array(40);
    const std::vector<LinearWave> one{{kTheta30, 1.3}};
    EXPECT_LE(oracle::rel_err(random_phase_miso_expected_power(ris, one, 80.0),
                              random_phase_expected_power(ris, one[0], {80.0, 0.3})),
              1e-12);
    EXPECT_EQ(random_phase_miso_expected_power(ris, {}, 80.0), 0.0);
    const std::vector<LinearWave> silent{{0.1, 0.0}, {0.5, 0.0}};
    EXPECT_EQ(random_phase_miso_expected_power(ris, silent, 80.0), 0.0);
}

TEST(RandomMoments, MultiWaveFormsAgree) {
    const std::vector<LinearWave> waves{{kTheta30, 1.0}, {deg_to_rad(70.0), 0.5}};
    const LinearObservation obs{100.0, 0.2};
    const LinearRis unit = fig_array(50);
    EXPECT_LE(oracle::rel_err(random_phase_expected_power_multi(unit, waves, obs),
                              random_phase_miso_expected_power(unit, waves, 100.0)),
              1e-12);
    const LinearRis finite = fig_array(50, 0.5, 0.3);
    const std::vector<LinearWave> single{waves[0]};
    EXPECT_LE(oracle::rel_err(random_phase_expected_power_multi(finite, single, obs),
                              random_phase_expected_power(finite, waves[0], obs)),
              1e-12);
}

TEST(RandomMoments, MisoMonteCarlo) {
    const LinearRis ris = fig_array(24, 0.6);
    const std::vector<LinearWave> waves{{0.35, 1.0}, {-0.8, 0.7}};
    const std::vector<LinearObservation> obs{{100.0, 0.0}, {100.0, 0.6}};
    const auto mc = random_phase_monte_carlo(ris, waves, obs, 10000, 3, 4);
    const double want = random_phase_miso_expected_power(ris, waves, 100.0);
    for (const auto& e : mc) EXPECT_LE(std::abs(e.mean - want), 0.05 * want);
}

// ---------------------------------------------------------- compensation ---

TEST(Compensation, Examples) {
    EXPECT_NEAR(compensation_delta(kTheta30, kThetaM50), -0.26604444311897801, 1e-15);
    const LinearRis ris = fig_array(10);
    for (double v : phase_compensation(0.4, -0.4, ris)) EXPECT_EQ(v, 0.0);
    const auto om = phase_compensation(kTheta30, kThetaM50, ris);
    ASSERT_EQ(om.size(), 10u);
    for (std::size_t n = 0; n < om.size(); ++n) {
        const double want = -kTwoPi * n * 0.5 * compensation_delta(kTheta30, kThetaM50);
        EXPECT_NEAR(std::cos(om[n]), std::cos(want), 1e-12);
        EXPECT_NEAR(std::sin(om[n]), std::sin(want), 1e-12);
        EXPECT_GE(om[n], 0.0);
        EXPECT_LT(om[n], kTwoPi);
    }
}

TEST(Compensation, SteeredPairMeetsEqualityBound) {
    const LinearRis base = fig_array();
    const LinearRis ris = base.with_phases(phase_compensation(kTheta30, kThetaM50, base));
    const LinearObservation obs{100.0, kThetaM50};
    EXPECT_LE(oracle::rel_err(std::abs(linear_field(ris, {kTheta30, 1.0}, obs)), 100 * 0.01 * std::cos(kTheta30) / 100),
              1e-12);
    EXPECT_NEAR(std::abs(linear_field(ris, {kTheta30, 1.0}, obs)), 8.66e-3, 5e-6);
}

TEST(Compensation, GlobalMaximumAtDesign) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> ang(-1.4, 1.4);
    for (int i = 0; i < 20; ++i) {
        const double ti = ang(rng), ts = ang(rng);
        const LinearRis base = fig_array(32, 0.5);
        const LinearRis ris = base.with_phases(phase_compensation(ti, ts, base));
        const double peak = std::abs(steering_function(ris, ti, ts));
        for (int k = 0; k < 200; ++k) EXPECT_LE(std::abs(steering_function(ris, ti, ang(rng))), peak * (1 + 1e-12));
    }
}

TEST(GratingLobes, Examples) {
    const double delta = compensation_delta(kTheta30, kThetaM50);
    EXPECT_TRUE(grating_lobes(delta, 0.5, 1.0, kTheta30).empty());
    for (double dd : {-2.0, -0.7, 0.0, 1.3, 2.0}) EXPECT_TRUE(grating_lobes(dd, 0.5, 1.0, kTheta30).empty());

    const auto g07 = grating_lobes(delta, 0.7, 1.0, kTheta30);
    ASSERT_EQ(g07.size(), 1u);
    EXPECT_NEAR(rad_to_deg(g07[0]), 41.49, 0.05);

    const auto g2 = grating_lobes(0.0, 2.0, 1.0, 0.0);
    ASSERT_EQ(g2.size(), 4u);
    EXPECT_NEAR(rad_to_deg(g2[0]), -90.0, 1e-9);
    EXPECT_NEAR(rad_to_deg(g2[1]), -30.0, 1e-9);
    EXPECT_NEAR(rad_to_deg(g2[2]), 30.0, 1e-9);
    EXPECT_NEAR(rad_to_deg(g2[3]), 90.0, 1e-9);
    EXPECT_THROW(grating_lobes(0.0, 0.0, 1.0, 0.0), ValidationError);
}

TEST(AnomalousPairs, Examples) {
    const double delta = compensation_delta(kTheta30, kThetaM50);
    const auto design = anomalous_pairs(delta, 0.5, 1.0, kTheta30);
    EXPECT_TRUE(std::any_of(design.begin(), design.end(), [](double t) { return std::abs(t - kThetaM50) < 1e-12; }));

    const auto at70 = anomalous_pairs(delta, 0.5, 1.0, deg_to_rad(70.0));
    ASSERT_EQ(at70.size(), 1u);
    EXPECT_NEAR(rad_to_deg(at70[0]), 52.59, 0.05);

    for (double ti : {-1.2, 0.0, 0.3, 1.0}) {
        const auto snell = anomalous_pairs(0.0, 0.5, 1.0, ti);
        ASSERT_EQ(snell.size(), 1u);
        EXPECT_NEAR(snell[0], -ti, 1e-12);
    }
}

TEST(AnomalousPairs, SatisfyCongruence) {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> ang(-1.5, 1.5), dd(-1.8, 1.8), sp(0.2, 3.0);
    for (int i = 0; i < 300; ++i) {
        const double delta = dd(rng), d = sp(rng), ti = ang(rng);
        for (double ts : anomalous_pairs(delta, d, 1.0, ti)) {
            const double k = (std::sin(ti) + std::sin(ts) - delta) * d;
            EXPECT_NEAR(k, std::round(k), 1e-12 * std::max(1.0, d));
            EXPECT_GE(ts, -kPi / 2);
            EXPECT_LE(ts, kPi / 2);
        }
    }
}

TEST(CompensatedSteering, MatchesConfiguredArray) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> ang(-1.5, 1.5);
    for (double d : {0.3, 0.5, 0.7, 1.2}) {
        const LinearRis base(40, d, {0.01, 0.0, 0.0});
        const double ti0 = ang(rng), ts0 = ang(rng);
        const double delta = compensation_delta(ti0, ts0);
        const LinearRis ris = base.with_phases(phase_compensation(ti0, ts0, base));
        for (int k = 0; k < 100; ++k) {
            const double ti = ang(rng), ts = ang(rng);
            const cplx direct = steering_function(ris, ti, ts);
            const cplx closed = compensated_steering(base, delta, ti, ts);
            EXPECT_LE(std::abs(direct - closed), 1e-11 * 40 * 0.01);
        }
        EXPECT_LE(oracle::rel_err(std::abs(compensated_steering(base, delta, ti0, ts0)), 40 * 0.01), 1e-12);
        EXPECT_LE(oracle::rel_err(compensated_rcs(base, delta, ti0, ts0),
                                  4.0 * kPi * std::pow(std::cos(ti0) * 40 * 0.01, 2)),
                  1e-12);
    }
}

TEST(CompensatedSteering, SurfaceIsShiftedSpecularSurface) {
    const LinearRis base = fig_array();
    const double delta = compensation_delta(kTheta30, kThetaM50);
    std::mt19937_64 rng(54);
    std::uniform_real_distribution<double> ang(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        const double ti = ang(rng);
        const double s = std::sin(ti) - delta;
        if (std::abs(s) > 1.0) continue;
        const double ts = ang(rng);
        // shifting sinθi by -Δ turns the compensated surface into the specular one
        const cplx a = compensated_steering(base, delta, ti, ts);
        const cplx b = compensated_steering(base, 0.0, std::asin(s), ts);
        EXPECT_LE(std::abs(a - b), 1e-11);
    }
}

TEST(CompensatedSteering, NonUniformAreas) {
    std::vector<LinearCell> cells;
    for (int n = 0; n < 20; ++n) cells.push_back({0.01 * (1 + n % 4), 0.0, 0.0});
    const LinearRis base(0.5, cells);
    const double delta = compensation_delta(0.2, -0.6);
    const LinearRis ris = base.with_phases(phase_compensation(0.2, -0.6, base));
    for (double ts : {-1.0, -0.6, 0.0, 0.8})
        EXPECT_LE(std::abs(compensated_steering(base, delta, 0.2, ts) - steering_function(ris, 0.2, ts)), 1e-13);
}

TEST(CompensatedSteering, PeakOverRandomIsN) {
    // b ≪ λ, equal areas: steered |T|² over the random-phase mean |T|² is N
    const LinearRis ris = fig_array();
    const double delta = compensation_delta(kTheta30, kThetaM50);
    const double peak = compensated_rcs(ris, delta, kTheta30, kThetaM50);
    const double mean = random_phase_expected_rcs(ris, kTheta30, kThetaM50);
    EXPECT_LE(oracle::rel_err(peak / mean, 100.0), 1e-9);
}

// ------------------------------------------------------------- reshaping ---

namespace {

struct DftCase {
    MimoSystem sys;
    Eigen::VectorXcd incident;
};

DftCase dft_case(std::size_t n, std::vector<double> incident_angles, Eigen::VectorXcd amps) {
    const LinearRis ris(n, 0.5, {0.01, 0.0, 0.0});
    std::vector<LinearObservation> obs;
    for (double t : dft_grid_angles(n)) obs.push_back({100.0, t});
    return {assemble_mimo(ris, incident_angles, obs), std::move(amps)};
}

Eigen::VectorXcd random_weights(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> area(0.001, 0.05), ph(0.0, kTwoPi);
    Eigen::VectorXcd w(n);
    for (Eigen::Index k = 0; k < n; ++k) w[k] = std::polar(area(rng), ph(rng));
    return w;
}

}  // namespace

TEST(Reshape, RoundTripOnDftGrid) {
    std::mt19937_64 rng(61);
    for (std::size_t n : {1u, 4u, 16u, 64u, 100u}) {
        Eigen::VectorXcd amps(1);
        amps << 1.0;
        auto [sys, inc] = dft_case(n, {0.3}, amps);
        ASSERT_TRUE(is_dft_grid(sys));
        const Eigen::VectorXcd w0 = random_weights(rng, static_cast<Eigen::Index>(n));
        const Eigen::VectorXcd desired = apply_mimo(sys.with_weights(w0), inc);
        const ReshapeSolution sol = beam_reshape(sys, inc, desired);
        EXPECT_TRUE(sol.dft_fast_path);
        EXPECT_EQ(sol.zeroed_cells, 0u);
        EXPECT_LE((sol.weights - w0).norm() / w0.norm(), 1e-10) << n;
        EXPECT_LE(sol.residual_norm, 1e-10 * desired.norm());
        for (Eigen::Index k = 0; k < sol.weights.size(); ++k) {
            EXPECT_NEAR(sol.areas()[k], std::abs(sol.weights[k]), 1e-18);
            EXPECT_GE(sol.phases()[k], 0.0);
        }
    }
}

TEST(Reshape, ZeroTarget) {
    Eigen::VectorXcd amps(2);
    amps << 1.0, 0.5;
    auto [sys, inc] = dft_case(16, {0.5, 1.2}, amps);
    const ReshapeSolution sol = beam_reshape(sys, inc, Eigen::VectorXcd::Zero(16));
    EXPECT_EQ(sol.weights.norm(), 0.0);
    EXPECT_EQ(sol.residual_norm, 0.0);
}

TEST(Reshape, DimensionMismatch) {
    Eigen::VectorXcd amps(1);
    amps << 1.0;
    auto [sys, inc] = dft_case(8, {0.5}, amps);
    EXPECT_THROW(beam_reshape(sys, inc, Eigen::VectorXcd::Zero(7)), DimensionError);
    EXPECT_THROW(beam_reshape(sys, Eigen::VectorXcd::Zero(2), Eigen::VectorXcd::Zero(8)), DimensionError);
}

TEST(Reshape, SvdPathWithMoreOutputsThanCells) {
    std::mt19937_64 rng(62);
    const std::size_t n = 12;
    const LinearRis ris(n, 0.5, {0.01, 0.0, 0.0});
    std::vector<LinearObservation> obs;
    for (int k = 0; k < 40; ++k) obs.push_back({100.0, deg_to_rad(-80.0 + 4.0 * k)});
    const std::vector<double> angles{0.25};
    const MimoSystem sys = assemble_mimo(ris, angles, obs);
    EXPECT_FALSE(is_dft_grid(sys));
    Eigen::VectorXcd inc(1);
    inc << 1.0;
    const Eigen::VectorXcd w0 = random_weights(rng, n);
    const Eigen::VectorXcd desired = apply_mimo(sys.with_weights(w0), inc);
    const ReshapeSolution sol = beam_reshape(sys, inc, desired);
    EXPECT_FALSE(sol.dft_fast_path);
    EXPECT_EQ(sol.rank, n);
    EXPECT_LE((sol.weights - w0).norm() / w0.norm(), 1e-9);

    // residual never grows as more directions are kept
    Eigen::VectorXcd target = desired;
    for (auto& v : target) v += cplx(1e-6, -2e-6);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t rank = 1; rank <= n; ++rank) {
        ReshapeOptions opt;
        opt.max_rank = rank;
        opt.max_discarded_fraction = 1.0;
        const ReshapeSolution s = beam_reshape(sys, inc, target, opt);
        EXPECT_EQ(s.rank, rank);
        EXPECT_LE(s.residual_norm, prev * (1 + 1e-12));
        prev = s.residual_norm;
    }
}

TEST(Reshape, IllConditionedTruncationThrows) {
    // cells far closer than λ/2 sampled on a narrow sector: V_s is nearly rank-deficient
    const std::size_t n = 24;
    const LinearRis ris(n, 0.05, {0.01, 0.0, 0.0});
    std::vector<LinearObservation> obs;
    for (int k = 0; k < 24; ++k) obs.push_back({100.0, deg_to_rad(-10.0 + k)});
    const std::vector<double> angles{0.1};
    const MimoSystem sys = assemble_mimo(ris, angles, obs);
    Eigen::VectorXcd inc(1);
    inc << 1.0;
    std::mt19937_64 rng(63);
    std::normal_distribution<double> g;
    Eigen::VectorXcd desired(24);
    for (auto& v : desired) v = cplx(g(rng), g(rng)) * 1e-4;
    ReshapeOptions opt;
    opt.truncation_tol = 1e-3;
    opt.max_discarded_fraction = 1e-3;
    EXPECT_THROW(beam_reshape(sys, inc, desired, opt), NumericalError);
    opt.max_discarded_fraction = 1.0;
    const ReshapeSolution sol = beam_reshape(sys, inc, desired, opt);
    EXPECT_LT(sol.rank, n);
    EXPECT_GT(sol.discarded_fraction, 1e-3);
}

TEST(Reshape, ZeroGuard) {
    // θ1 = 0 with E1 = 1 and sinθ2 = 1/3 with E2 = 1/cosθ2 at d = λ/2 give
    // Ê_n = 1 + e^{jπ(n-1)/3}, which vanishes at n = 4
    const double t2 = std::asin(1.0 / 3.0);
    const std::size_t n = 4;
    const LinearRis ris(n, 0.5, {0.01, 0.0, 0.0});
    std::vector<LinearObservation> obs;
    for (double t : dft_grid_angles(n)) obs.push_back({100.0, t});
    const std::vector<double> angles{0.0, t2};
    const MimoSystem sys = assemble_mimo(ris, angles, obs);
    Eigen::VectorXcd inc(2);
    inc << 1.0, 1.0 / std::cos(t2);
    const Eigen::VectorXcd e_hat = sys.effective_incident(inc);
    ASSERT_LT(std::abs(e_hat[3]), 1e-14);
    const ReshapeSolution sol = beam_reshape(sys, inc, Eigen::VectorXcd::Ones(4) * 1e-4);
    EXPECT_EQ(sol.zeroed_cells, 1u);
    EXPECT_EQ(sol.weights[3], cplx(0.0, 0.0));
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(std::isfinite(std::abs(sol.weights[k])));
    EXPECT_TRUE(std::isfinite(sol.residual_norm));
}

TEST(Reshape, ReferenceRadiusMatchesUniformRadii) {
    std::mt19937_64 rng(64);
    Eigen::VectorXcd amps(2);
    amps << 1.0, cplx(0.3, 0.2);
    auto [sys, inc] = dft_case(32, {0.2, -0.9}, amps);
    const Eigen::VectorXcd desired = apply_mimo(sys.with_weights(random_weights(rng, 32)), inc);
    ReshapeOptions opt;
    opt.reference_radius = 100.0;
    const ReshapeSolution a = beam_reshape(sys, inc, desired);
    const ReshapeSolution b = beam_reshape(sys, inc, desired, opt);
    EXPECT_LE((a.weights - b.weights).norm(), 1e-12 * a.weights.norm());
}
