#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "risem/array.hpp"
#include "risem/linear_ris.hpp"

using namespace risem;

namespace {

Direction random_direction(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> th(0.0, deg_to_rad(85.0)), ph(-kPi, kPi);
    return {th(rng), ph(rng)};
}

std::vector<UnitCell> random_cells(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> pos(-3.0, 3.0), len(0.05, 0.6), ph(0.0, kTwoPi);
    std::vector<UnitCell> cells(n);
    for (auto& c : cells) {
        c.position = {pos(rng), pos(rng), 0.1 * pos(rng)};
        c.a = len(rng);
        c.b = len(rng);
        c.area = c.a * c.b;
        c.phase = ph(rng);
    }
    return cells;
}

}  // namespace

TEST(PathLengthPhase, Examples) {
    const WaveContext ctx;
    EXPECT_EQ(path_length_phase({0, 0, 0}, {0.7, 0.3}, ctx), cplx(1.0, 0.0));
    // half a wavelength along the direction of travel is a sign flip
    const cplx half = path_length_phase({0.5, 0, 0}, {kPi / 2, 0.0}, ctx);
    EXPECT_NEAR(half.real(), -1.0, 1e-15);
    EXPECT_NEAR(half.imag(), 0.0, 1e-15);
    const cplx quarter = path_length_phase({0, 0, 0.25}, {0.0, 0.0}, ctx);
    EXPECT_NEAR(quarter.real(), 0.0, 1e-15);
    EXPECT_NEAR(quarter.imag(), 1.0, 1e-15);
}

TEST(RisField, SingleCellAtOriginIsPatch) {
    std::mt19937_64 rng(31);
    const WaveContext ctx(1.0, {0.2, 0.1});
    for (int i = 0; i < 50; ++i) {
        UnitCell cell;
        cell.a = 0.8;
        cell.b = 1.3;
        cell.area = 0.8 * 1.3;
        const RisGeometry ris({cell}, ctx);
        const PlaneWave w{random_direction(rng), 1.4};
        const ObservationPoint obs{25.0, random_direction(rng)};
        const auto got = ris_scattered_field(ris, w, obs);
        const auto want = patch_scattered_field(Patch(0.8, 1.3), w, obs, ctx);
        const double scale = want.magnitude();
        EXPECT_LE(std::abs(got.e_theta - want.e_theta) / scale, 1e-13);
        EXPECT_LE(std::abs(got.e_phi - want.e_phi) / scale, 1e-13);
        EXPECT_EQ(got.e_r, cplx(0.0, 0.0));
    }
}

TEST(RisField, CoincidentCellsAddCoherently) {
    const WaveContext ctx;
    UnitCell cell;
    cell.a = cell.b = 0.3;
    cell.area = 0.09;
    const RisGeometry one({cell}, ctx);
    const RisGeometry five(std::vector<UnitCell>(5, cell), ctx);
    const Direction in{0.3, 1.1}, sc{0.6, -2.0};
    const ObservationPoint obs{40.0, sc};
    EXPECT_LE(oracle::rel_err(ris_field_strength(five, {in, 1.0}, obs), 5.0 * ris_field_strength(one, {in, 1.0}, obs)),
              1e-13);
    EXPECT_LE(oracle::rel_err(ris_bistatic_rcs(five, in, sc), 25.0 * ris_bistatic_rcs(one, in, sc)), 1e-13);
}

TEST(RisField, StrengthMatchesFieldMagnitude) {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 50; ++i) {
        const RisGeometry ris(random_cells(rng, 12), WaveContext(0.9, {-0.5, 0.2}));
        const PlaneWave w{random_direction(rng), 0.8};
        const ObservationPoint obs{60.0, random_direction(rng)};
        EXPECT_LE(oracle::rel_err(ris_field_strength(ris, w, obs), ris_scattered_field(ris, w, obs).magnitude()),
                  1e-12);
    }
}

TEST(RisField, MultiWaveSuperposition) {
    std::mt19937_64 rng(33);
    const RisGeometry ris(random_cells(rng, 9), WaveContext{});
    const std::vector<PlaneWave> waves{{random_direction(rng), 1.0}, {random_direction(rng), 0.4},
                                       {random_direction(rng), 2.0}};
    const ObservationPoint obs{30.0, random_direction(rng)};
    SphericalField sum;
    for (const auto& w : waves) sum += ris_scattered_field(ris, w, obs);
    const auto got = ris_scattered_field_multi(ris, waves, obs);
    EXPECT_LE(oracle::rel_err(got.e_phi, sum.e_phi), 1e-14);
    EXPECT_LE(std::abs(got.e_theta - sum.e_theta), 1e-14 * sum.magnitude());
}

TEST(RisRcs, FarFieldLimitOfField) {
    std::mt19937_64 rng(34);
    const RisGeometry ris(random_cells(rng, 7), WaveContext{});
    const double r = 1e6;
    for (int i = 0; i < 30; ++i) {
        const Direction in = random_direction(rng), sc = random_direction(rng);
        const double e = ris_field_strength(ris, {in, 1.0}, {r, sc});
        EXPECT_LE(oracle::rel_err(ris_bistatic_rcs(ris, in, sc), 4.0 * kPi * r * r * e * e), 1e-9);
    }
}

TEST(RisField, TranslationOnlyChangesPhase) {
    std::mt19937_64 rng(35);
    auto cells = random_cells(rng, 10);
    const RisGeometry base(cells, WaveContext{});
    const Vec3 shift{0.37, -1.2, 0.0};
    for (auto& c : cells)
        for (int k = 0; k < 3; ++k) c.position[k] += shift[k];
    const RisGeometry moved(cells, WaveContext{});
    for (int i = 0; i < 20; ++i) {
        const Direction in = random_direction(rng), sc = random_direction(rng);
        EXPECT_LE(oracle::rel_err(ris_bistatic_rcs(moved, in, sc), ris_bistatic_rcs(base, in, sc)), 1e-10);
    }
}

TEST(RisField, CommonPhaseOffsetInvariant) {
    std::mt19937_64 rng(36);
    const RisGeometry ris(random_cells(rng, 10), WaveContext{});
    std::vector<double> shifted;
    for (const auto& c : ris.cells()) shifted.push_back(c.phase + 1.234);
    const RisGeometry rotated = ris.with_phases(shifted);
    for (const auto& c : rotated.cells()) {
        EXPECT_GE(c.phase, 0.0);
        EXPECT_LT(c.phase, kTwoPi);
    }
    for (int i = 0; i < 20; ++i) {
        const Direction in = random_direction(rng), sc = random_direction(rng);
        const cplx a = ris.array_factor(in, sc), b = rotated.array_factor(in, sc);
        EXPECT_LE(oracle::rel_err(b, a * std::exp(cplx(0.0, 1.234))), 1e-12);
    }
}

TEST(RisField, RandomPhasesNeverExceedEqualityBound) {
    // |AF| ≤ Σ (A_n/λ)|Sa_n|
    std::mt19937_64 rng(37);
    for (int i = 0; i < 100; ++i) {
        const RisGeometry ris(random_cells(rng, 16), WaveContext{});
        const Direction in = random_direction(rng), sc = random_direction(rng);
        double bound = 0.0;
        for (const auto& c : ris.cells()) bound += c.area * std::abs(sampling_sa(c.a, c.b, sc, in, ris.context()));
        EXPECT_LE(std::abs(ris.array_factor(in, sc)), bound * (1.0 + 1e-12));
    }
}

TEST(RisField, CompensatedArrayPeaksAtDesign) {
    // 40-cell line along y with compensation for 30° -> -50° in the yoz plane
    const double d = 0.5;
    const double delta = std::sin(deg_to_rad(30.0)) + std::sin(deg_to_rad(-50.0));
    std::vector<UnitCell> cells(40);
    for (std::size_t n = 0; n < cells.size(); ++n) {
        cells[n].position = {0.0, n * d, 0.0};
        cells[n].a = cells[n].b = 0.1;
        cells[n].area = 0.01;
        cells[n].phase = -kTwoPi * n * d * delta;
    }
    const RisGeometry ris(cells, WaveContext{});
    // signed yoz angles: θ < 0 is φ = -π/2
    auto yoz = [](double deg) { return Direction{deg_to_rad(std::abs(deg)), deg < 0 ? -kPi / 2 : kPi / 2}; };
    double best = -1.0, best_deg = 0.0;
    for (int k = -900; k <= 900; ++k) {
        const double deg = 0.1 * k;
        const double v = std::abs(ris.array_factor(yoz(30.0), yoz(deg)));
        if (v > best) best = v, best_deg = deg;
    }
    EXPECT_NEAR(best_deg, -50.0, 0.05);
}

TEST(RisField, TinyCellsAtDesignMeetEqualityBound) {
    const double d = 0.5;
    const double ti = deg_to_rad(20.0), ts = deg_to_rad(-35.0);
    const double delta = std::sin(ti) + std::sin(ts);
    std::vector<UnitCell> cells(25);
    double bound = 0.0;
    for (std::size_t n = 0; n < cells.size(); ++n) {
        cells[n].position = {0.0, n * d, 0.0};
        cells[n].a = cells[n].b = 1e-7;
        cells[n].area = 0.01 * (1 + n % 3);
        cells[n].phase = -kTwoPi * n * d * delta;
        bound += cells[n].area;
    }
    const RisGeometry ris(cells, WaveContext{});
    const double af = std::abs(ris.array_factor({ti, kPi / 2}, {-ts, -kPi / 2}));
    EXPECT_LE(oracle::rel_err(af, bound), 1e-12);
}

TEST(RisGeometry, LinearRisAgrees) {
    std::mt19937_64 rng(38);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi), ang(-1.4, 1.4);
    std::vector<LinearCell> cells(17);
    for (auto& c : cells) c = {0.02, 0.3, ph(rng)};
    const LinearRis lin(0.45, cells, WaveContext(1.0, {0.1, 0.3}));
    const RisGeometry geo = lin.to_geometry(0.2);
    ASSERT_EQ(geo.size(), 17u);
    for (int i = 0; i < 50; ++i) {
        const double ti = ang(rng), ts = ang(rng);
        const Direction in{std::abs(ti), ti < 0 ? -kPi / 2 : kPi / 2};
        const Direction sc{std::abs(ts), ts < 0 ? -kPi / 2 : kPi / 2};
        const double want = std::abs(linear_field(lin, {ti, 1.0}, {50.0, ts}));
        EXPECT_LE(oracle::rel_err(ris_field_strength(geo, {in, 1.0}, {50.0, sc}), want), 1e-11);
    }
}

TEST(RisGeometry, Validation) {
    EXPECT_THROW(RisGeometry({}, WaveContext{}), ValidationError);
    UnitCell bad;
    bad.area = -1.0;
    EXPECT_THROW(RisGeometry({bad}, WaveContext{}), ValidationError);
    const RisGeometry ok({UnitCell{}}, WaveContext{});
    const std::vector<double> two{0.0, 1.0};
    EXPECT_THROW(ok.with_phases(two), DimensionError);
}
