#pragma once

// Uniform linear RIS along the y-axis, cells at [0, (n-1)d, 0], observed in
// the yoz plane. Angles are signed, θ ∈ [-π/2, π/2], both measured from the
// z-axis; θs = -θi is the specular direction.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "risem/array.hpp"
#include "risem/em_core.hpp"
#include "risem/kernels/kernels.hpp"

namespace risem {

struct LinearWave {
    double theta = 0.0;  // radians, signed
    double amplitude = 1.0;
};

struct LinearObservation {
    double r = 100.0;
    double theta = 0.0;  // radians, signed
};

struct LinearCell {
    double area = 0.01;
    double b = 0.1;      // b = 0 selects Sa ≡ 1 exactly
    double phase = 0.0;  // Ω
};

class LinearRis {
public:
    /// N identical cells.
    LinearRis(std::size_t count, double spacing, const LinearCell& cell, WaveContext ctx = WaveContext{});
    LinearRis(double spacing, std::vector<LinearCell> cells, WaveContext ctx = WaveContext{});

    std::size_t size() const { return cells_.size(); }
    double spacing() const { return spacing_; }
    const WaveContext& context() const { return ctx_; }
    const std::vector<LinearCell>& cells() const { return cells_; }

    std::vector<double> phases() const;
    std::vector<double> areas() const;
    bool uniform_area() const;

    LinearRis with_phases(std::span<const double> phases) const;
    /// Cells reconfigured from complex weights W_n = A_n e^{jΩ_n}.
    LinearRis with_weights(std::span<const cplx> weights) const;

    /// Same array as a general geometry (a_n = edge_a for every cell).
    RisGeometry to_geometry(double edge_a) const;

    /// Σ_n (A_n/λ) e^{jΩ_n} Sa(b_n; θs; θi) e^{j2π(n-1)d(sinθi+sinθs)/λ}
    cplx array_factor(double theta_i, double theta_s) const;

private:
    void rebuild();

    double spacing_;
    std::vector<LinearCell> cells_;
    WaveContext ctx_;
    kernels::CellTable table_;
};

/// Scalar scattered field (E_φ component) for one incident wave.
cplx linear_field(const LinearRis& ris, const LinearWave& wave, const LinearObservation& obs);

/// Superposition over several waves.
cplx linear_field_multi(const LinearRis& ris, std::span<const LinearWave> waves, const LinearObservation& obs);

/// Distance-normalised transfer T(θs; θi) = C·array_factor. Excludes cosθi.
cplx steering_function(const LinearRis& ris, double theta_i, double theta_s);

/// 4π cos²θi |T|².
double linear_rcs(const LinearRis& ris, double theta_i, double theta_s);

/// Row-major knot powers: V[r, c] = exp(j·c·knot_phase[r]).
Eigen::MatrixXcd vandermonde(std::span<const double> knot_phases, std::size_t columns);

/// θ_n = arcsin(-1 + 2(n-1)/N), n = 1..N.
std::vector<double> dft_grid_angles(std::size_t n);

/// Factored linear model of a linear RIS in the b ≪ λ regime (Sa ≡ 1):
///   E^s = (C/λ) · L · V_s · W · V_iᵀ · cos_i · E^i
class MimoSystem {
public:
    MimoSystem(double wavelength, cplx reflection, double spacing, std::vector<double> incident_angles,
               std::vector<double> scatter_angles, std::vector<double> radii, Eigen::VectorXcd weights);

    std::size_t inputs() const { return incident_angles_.size(); }   // M
    std::size_t outputs() const { return scatter_angles_.size(); }   // T
    std::size_t cells() const { return static_cast<std::size_t>(weights_.size()); }  // N

    double wavelength() const { return wavelength_; }
    cplx reflection() const { return reflection_; }
    double spacing() const { return spacing_; }
    cplx prefactor() const { return prefactor_; }  // C/λ
    const std::vector<double>& incident_angles() const { return incident_angles_; }
    const std::vector<double>& scatter_angles() const { return scatter_angles_; }
    const std::vector<double>& radii() const { return radii_; }

    const Eigen::VectorXcd& attenuation() const { return attenuation_; }   // diag of L
    const Eigen::MatrixXcd& scatter_steering() const { return scatter_v_; }  // T×N
    const Eigen::VectorXcd& weights() const { return weights_; }           // diag of W
    const Eigen::MatrixXcd& incident_steering() const { return incident_v_; }  // M×N
    const Eigen::VectorXd& obliquity() const { return obliquity_; }        // diag of cos_i

    /// Knot phases 2πd sinθ/λ (the knots are their unit phasors).
    std::vector<double> scatter_knot_phases() const;
    std::vector<double> incident_knot_phases() const;

    /// The model always treats the per-cell directivity as 1.
    static constexpr const char* kSamplingModel = "unit";

    MimoSystem with_weights(const Eigen::VectorXcd& weights) const;

    /// Ê^i = V_iᵀ · cos_i · E^i
    Eigen::VectorXcd effective_incident(const Eigen::VectorXcd& incident) const;

    /// Dense T×M transfer matrix.
    Eigen::MatrixXcd transfer() const;

    nlohmann::json to_json() const;
    static MimoSystem from_json(const nlohmann::json& doc);

private:
    double wavelength_;
    cplx reflection_;
    double spacing_;
    cplx prefactor_;
    std::vector<double> incident_angles_;
    std::vector<double> scatter_angles_;
    std::vector<double> radii_;
    Eigen::VectorXcd attenuation_;
    Eigen::MatrixXcd scatter_v_;
    Eigen::VectorXcd weights_;
    Eigen::MatrixXcd incident_v_;
    Eigen::VectorXd obliquity_;
};

MimoSystem assemble_mimo(const LinearRis& ris, std::span<const double> incident_angles,
                         std::span<const LinearObservation> observations);

/// Matrix chain in factored order; never forms the dense product.
Eigen::VectorXcd apply_mimo(const MimoSystem& sys, const Eigen::VectorXcd& incident);

}  // namespace risem
