#pragma once

// Configuration schemes for linear RISs: random binary phase, continuous
// phase compensation (with grating-lobe and anomalous-reflection
// predictors) and beam reshaping by joint area/phase weights.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "risem/linear_ris.hpp"

namespace risem {

// ---------------------------------------------------------------- random ---

/// N i.i.d. phases from {0, π}, each with probability 1/2. `stream` selects an
/// independent sequence for the same seed (one per Monte Carlo trial).
std::vector<double> random_phase_draw(std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

/// E|E^s|² for one wave: |C|² (E^i cosθi / r)² Σ_n (A_n/λ)² Sa_n².
double random_phase_expected_power(const LinearRis& ris, const LinearWave& wave, const LinearObservation& obs);

/// E[σ] = 4π|C|² cos²θi Σ_n (A_n/λ)² Sa_n².
double random_phase_expected_rcs(const LinearRis& ris, double theta_i, double theta_s);

/// E|E^s|² for several waves in the b ≪ λ model:
/// |C|² (1/r)² Σ_n (A_n/λ)² |Ê^i_n|², Ê^i = V_iᵀ cos_i E^i.
double random_phase_miso_expected_power(const LinearRis& ris, std::span<const LinearWave> waves, double r);

/// Same moment keeping each cell's Sa(b_n; θs; θi_m) inside the incident sum.
/// Equals the single-wave form for one wave and the b ≪ λ form when b = 0.
double random_phase_expected_power_multi(const LinearRis& ris, std::span<const LinearWave> waves,
                                         const LinearObservation& obs);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error of |E^s|² over `trials` random-phase draws,
/// per observation point. Trial t uses random_phase_draw(N, seed, t), so the
/// result does not depend on `threads`.
std::vector<MonteCarloEstimate> random_phase_monte_carlo(const LinearRis& ris, std::span<const LinearWave> waves,
                                                         std::span<const LinearObservation> obs, std::size_t trials,
                                                         std::uint64_t seed, unsigned threads = 1);

// ---------------------------------------------------------- compensation ---

/// Δ = sinθi + sinθs
double compensation_delta(double theta_i, double theta_s);

/// Ω_n = -2π(n-1)dΔ/λ wrapped to [0, 2π).
std::vector<double> phase_compensation(double theta_i, double theta_s, const LinearRis& ris);

/// Visible angles sinθ = Δ - sinθi + kλ/d for integers k ≠ 0, sorted
/// ascending. Empty when d/λ ≤ 1/2.
std::vector<double> grating_lobes(double delta, double spacing, double wavelength, double theta_i);

/// Every visible reflection angle for incidence θ̃i under a fixed Δ
/// (k = 0 included), sorted ascending.
std::vector<double> anomalous_pairs(double delta, double spacing, double wavelength, double theta_i);

/// C Σ_n (A_n/λ) e^{j2π(n-1)d(sinθi + sinθs - Δ)/λ}; geometric-series closed
/// form when all areas agree.
cplx compensated_steering(const LinearRis& ris, double delta, double theta_i, double theta_s);

/// 4π cos²θi |compensated_steering|².
double compensated_rcs(const LinearRis& ris, double delta, double theta_i, double theta_s);

// ------------------------------------------------------------- reshaping ---

struct ReshapeOptions {
    /// Singular values below truncation_tol·σ_max are discarded.
    double truncation_tol = 1e-8;
    /// Throw NumericalError if the discarded directions carry more than this
    /// fraction of the target norm.
    double max_discarded_fraction = 0.1;
    /// Keep at most this many singular directions.
    std::optional<std::size_t> max_rank;
    /// Use the single constant β = N C e^{-j2πr/λ}/(λ r) with this radius
    /// instead of un-weighting each output row by its own L entry.
    std::optional<double> reference_radius;
    /// |Ê^i_n| below zero_guard·max|Ê^i| is treated as zero (W_n = 0).
    double zero_guard = 1e-12;
};

struct ReshapeSolution {
    Eigen::VectorXcd weights;  // W_n = A_n e^{jΩ_n}
    double residual_norm = 0.0;
    std::size_t rank = 0;          // singular directions kept
    std::size_t zeroed_cells = 0;  // cells hit by the Ê^i_n = 0 branch
    double discarded_fraction = 0.0;
    bool dft_fast_path = false;

    std::vector<double> areas() const;
    std::vector<double> phases() const;
};

/// True when V_s is square with V_s V_sᴴ = N·I (to 1e-9·N).
bool is_dft_grid(const MimoSystem& sys);

/// Weights minimising ‖E^s(W) - desired‖ for the given incident amplitudes.
ReshapeSolution beam_reshape(const MimoSystem& sys, const Eigen::VectorXcd& incident,
                             const Eigen::VectorXcd& desired, const ReshapeOptions& options = {});

}  // namespace risem
