#pragma once

// Scenario files, angle sweeps and their CSV/JSON emission.
//
// A scenario is a YAML document with the sections
//   wave, geometry, incident, observation, configuration, output
// described in the README. Unknown keys are rejected. Degrees at the file
// boundary, radians everywhere else.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "risem/config.hpp"
#include "risem/em_core.hpp"

namespace risem {

/// Malformed scenario text; line and column are 1-based (0 when unknown).
class ScenarioError : public ValidationError {
public:
    ScenarioError(const std::string& what, int line = 0, int column = 0);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct IncidentSpec {
    double theta_deg = 0.0;
    double phi_deg = 0.0;
    double amplitude = 1.0;
};

struct PatchSpec {
    double a = 5.0;
    double b = 5.0;
    std::optional<double> area;  // defaults to a·b
};

struct CellSpec {
    Vec3 position{};
    double a = 0.1;
    double b = 0.1;
    double area = 0.01;
    double phase_deg = 0.0;
};

struct LinearSpec {
    std::size_t cells = 100;
    double spacing = 0.5;
    double a = 0.1;
    double b = 0.1;
    double area = 0.01;
    bool unit_sampling = false;  // Sa ≡ 1 (the b ≪ λ limit)
};

using GeometrySpec = std::variant<PatchSpec, std::vector<CellSpec>, LinearSpec>;

/// Inclusive, strictly increasing (start, stop, count) grid.
struct AngleGrid {
    double start_deg = -90.0;
    double stop_deg = 90.0;
    std::size_t count = 181;

    std::vector<double> values() const;
};

struct ObservationSpec {
    double radius = 100.0;
    std::optional<AngleGrid> grid;
    std::vector<double> points_deg;  // used when grid is absent
    double phi_deg = 0.0;
    std::optional<AngleGrid> phi_grid;

    std::vector<double> theta_values() const;
    std::vector<double> phi_values() const;
};

struct NoScheme {};

struct RandomScheme {
    enum class Mode { expectation, draw, monte_carlo };
    std::uint64_t seed = 0;
    Mode mode = Mode::expectation;
    std::size_t trials = 10000;
};

struct CompensateScheme {
    double theta_i_deg = 0.0;
    double theta_s_deg = 0.0;
};

struct ReshapeScheme {
    /// CSV of theta_deg,re,im on the solve grid.
    std::string desired_pattern_file;
    /// Alternative target: the pattern the compensation baseline
    /// (theta_i_deg -> theta_s_deg) produces for the wave arriving from
    /// theta_i_deg alone.
    std::optional<CompensateScheme> desired_steering;
    double truncation_tol = 1e-8;
    double max_discarded_fraction = 0.1;
    /// Solve on the DFT grid of the array, or on the observation points.
    bool solve_on_dft_grid = true;
};

using SchemeSpec = std::variant<NoScheme, RandomScheme, CompensateScheme, ReshapeScheme>;

struct OutputSpec {
    std::string format = "csv";
    std::string path;  // empty: stdout
};

struct Scenario {
    double wavelength = 1.0;
    cplx reflection{-1.0, 0.0};
    GeometrySpec geometry = LinearSpec{};
    std::vector<IncidentSpec> incident;
    ObservationSpec observation;
    SchemeSpec scheme;
    OutputSpec output;
    /// Directory that relative file references resolve against.
    std::filesystem::path base_dir;
    /// Dotted paths of every value filled from a default.
    std::vector<std::string> defaults_filled;

    WaveContext context() const { return WaveContext(wavelength, reflection); }
    bool is_linear() const { return std::holds_alternative<LinearSpec>(geometry); }
};

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

/// Canonical JSON (every field present, keys sorted).
nlohmann::json scenario_to_json(const Scenario& scn);
/// FNV-1a of the canonical JSON text, as 16 hex digits.
std::string scenario_hash(const Scenario& scn);

// ------------------------------------------------------------------ model ---

/// Linear RIS of a linear scenario with the configuration scheme applied.
/// Random expectation and Monte Carlo modes leave all phases at zero.
LinearRis configured_linear_ris(const Scenario& scn);

/// The reshape solution for a reshape scenario, with the system it solved.
struct ReshapeRun {
    MimoSystem system;
    Eigen::VectorXcd incident;
    Eigen::VectorXcd desired;
    ReshapeSolution solution;
};
ReshapeRun run_reshape(const Scenario& scn);

/// MIMO model of the configured linear RIS at the observation points.
MimoSystem scenario_mimo(const Scenario& scn);

/// max_t |E_direct(t) - E_mimo(t)| / max_t |E_mimo(t)|: how far the scenario's
/// own cell directivity moves the field away from the Sa ≡ 1 model.
double mimo_sampling_discrepancy(const Scenario& scn);

// ------------------------------------------------------------------ sweep ---

struct SweepRow {
    double theta_deg = 0.0;
    double phi_deg = 0.0;
    double field = 0.0;     // |E^s|
    double field_db = 0.0;  // 20 log10 |E^s|
    double rcs = 0.0;       // 4π r² |E^s|² / Σ_m |E^i_m|²
    double rcs_db = 0.0;    // 10 log10 rcs
};

struct SweepResult {
    bool has_phi = false;
    std::vector<SweepRow> rows;  // φ outer, θ inner
};

SweepResult run_sweep(const Scenario& scn, unsigned threads = 1);

void write_sweep_csv(const SweepResult& result, std::ostream& out);
nlohmann::json sweep_to_json(const SweepResult& result);

/// Per-cell weights (index, area, phase) of a linear scenario.
void write_weights_csv(const LinearRis& ris, std::ostream& out);
nlohmann::json weights_to_json(const LinearRis& ris);

/// printf("%.12g"), with inf/nan spelled as inf, -inf, nan.
std::string format_number(double v);

}  // namespace risem
