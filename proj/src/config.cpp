#include "risem/config.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "risem/parallel.hpp"

namespace risem {

// ---------------------------------------------------------------- random ---

std::vector<double> random_phase_draw(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    if (n == 0) throw ValidationError("random_phase_draw: N must be at least 1");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 gen(seq);
    std::vector<double> out(n);
    // top bit of each output: a fair coin that does not depend on the library's
    // distribution implementation
    for (auto& v : out) v = (gen() >> 63) ? kPi : 0.0;
    return out;
}

namespace {

double sum_squared_weights(const LinearRis& ris, double theta_i, double theta_s) {
    const double lambda = ris.context().wavelength();
    double sum = 0.0;
    for (const LinearCell& c : ris.cells()) {
        const double w = c.area / lambda * sampling_sa_linear(c.b, theta_s, theta_i, ris.context());
        sum += w * w;
    }
    return sum;
}

}  // namespace

double random_phase_expected_power(const LinearRis& ris, const LinearWave& wave, const LinearObservation& obs) {
    const double drive = wave.amplitude * std::cos(wave.theta) / obs.r;
    return std::norm(ris.context().scattering_constant()) * drive * drive *
           sum_squared_weights(ris, wave.theta, obs.theta);
}

double random_phase_expected_rcs(const LinearRis& ris, double theta_i, double theta_s) {
    const double ci = std::cos(theta_i);
    return 4.0 * kPi * std::norm(ris.context().scattering_constant()) * ci * ci *
           sum_squared_weights(ris, theta_i, theta_s);
}

double random_phase_miso_expected_power(const LinearRis& ris, std::span<const LinearWave> waves, double r) {
    if (waves.empty()) return 0.0;
    std::vector<double> angles;
    Eigen::VectorXcd amplitudes(static_cast<Eigen::Index>(waves.size()));
    for (std::size_t m = 0; m < waves.size(); ++m) {
        angles.push_back(waves[m].theta);
        amplitudes[static_cast<Eigen::Index>(m)] = waves[m].amplitude;
    }
    const LinearObservation obs{r, 0.0};
    const MimoSystem sys = assemble_mimo(ris, angles, std::span(&obs, 1));
    const Eigen::VectorXcd e_hat = sys.effective_incident(amplitudes);
    const double lambda = ris.context().wavelength();
    double sum = 0.0;
    for (std::size_t n = 0; n < ris.size(); ++n) {
        const double w = ris.cells()[n].area / lambda;
        sum += w * w * std::norm(e_hat[static_cast<Eigen::Index>(n)]);
    }
    return std::norm(ris.context().scattering_constant()) / (r * r) * sum;
}

double random_phase_expected_power_multi(const LinearRis& ris, std::span<const LinearWave> waves,
                                         const LinearObservation& obs) {
    const WaveContext& ctx = ris.context();
    const double lambda = ctx.wavelength();
    double sum = 0.0;
    for (std::size_t n = 0; n < ris.size(); ++n) {
        const LinearCell& c = ris.cells()[n];
        cplx drive{};
        for (const LinearWave& w : waves) {
            const double arg = ctx.wavenumber() * static_cast<double>(n) * ris.spacing() * std::sin(w.theta);
            drive += w.amplitude * std::cos(w.theta) * sampling_sa_linear(c.b, obs.theta, w.theta, ctx) *
                     cplx(std::cos(arg), std::sin(arg));
        }
        const double a = c.area / lambda;
        sum += a * a * std::norm(drive);
    }
    return std::norm(ctx.scattering_constant()) / (obs.r * obs.r) * sum;
}

std::vector<MonteCarloEstimate> random_phase_monte_carlo(const LinearRis& ris, std::span<const LinearWave> waves,
                                                         std::span<const LinearObservation> obs, std::size_t trials,
                                                         std::uint64_t seed, unsigned threads) {
    if (trials < 2) throw ValidationError("Monte Carlo needs at least two trials");
    // fixed-size blocks keep the summation order independent of thread count
    constexpr std::size_t kBlock = 64;
    const std::size_t blocks = (trials + kBlock - 1) / kBlock;
    const std::size_t points = obs.size();
    std::vector<double> sums(blocks * points, 0.0), squares(blocks * points, 0.0);

    parallel_for(blocks, threads, [&](std::size_t blk) {
        const std::size_t end = std::min(trials, (blk + 1) * kBlock);
        for (std::size_t t = blk * kBlock; t < end; ++t) {
            const LinearRis trial = ris.with_phases(random_phase_draw(ris.size(), seed, t));
            for (std::size_t p = 0; p < points; ++p) {
                const double power = std::norm(linear_field_multi(trial, waves, obs[p]));
                sums[blk * points + p] += power;
                squares[blk * points + p] += power * power;
            }
        }
    });

    std::vector<MonteCarloEstimate> out(points);
    const double n = static_cast<double>(trials);
    for (std::size_t p = 0; p < points; ++p) {
        double s = 0.0, q = 0.0;
        for (std::size_t blk = 0; blk < blocks; ++blk) {
            s += sums[blk * points + p];
            q += squares[blk * points + p];
        }
        const double mean = s / n;
        const double var = std::max(0.0, (q - n * mean * mean) / (n - 1.0));
        out[p] = {mean, std::sqrt(var / n)};
    }
    return out;
}

// ---------------------------------------------------------- compensation ---

double compensation_delta(double theta_i, double theta_s) { return std::sin(theta_i) + std::sin(theta_s); }

std::vector<double> phase_compensation(double theta_i, double theta_s, const LinearRis& ris) {
    const double delta = compensation_delta(theta_i, theta_s);
    const double step = -kTwoPi * ris.spacing() * delta / ris.context().wavelength();
    std::vector<double> out(ris.size());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = wrap_phase(static_cast<double>(n) * step);
    return out;
}

namespace {

std::vector<double> congruence_solutions(double delta, double spacing, double wavelength, double theta_i,
                                         bool include_zero) {
    if (!(spacing > 0.0) || !(wavelength > 0.0)) throw ValidationError("spacing and wavelength must be positive");
    const double base = delta - std::sin(theta_i);
    const double period = wavelength / spacing;
    const auto kmax = static_cast<long>(std::ceil(2.0 * spacing / wavelength)) + 1;
    std::vector<double> out;
    for (long k = -kmax; k <= kmax; ++k) {
        if (k == 0 && !include_zero) continue;
        double s = base + static_cast<double>(k) * period;
        if (std::abs(s) > 1.0 + 1e-12) continue;
        s = std::clamp(s, -1.0, 1.0);
        out.push_back(std::asin(s));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<double> grating_lobes(double delta, double spacing, double wavelength, double theta_i) {
    if (!(spacing > 0.0) || !(wavelength > 0.0)) throw ValidationError("spacing and wavelength must be positive");
    if (spacing / wavelength <= 0.5) return {};
    return congruence_solutions(delta, spacing, wavelength, theta_i, false);
}

std::vector<double> anomalous_pairs(double delta, double spacing, double wavelength, double theta_i) {
    return congruence_solutions(delta, spacing, wavelength, theta_i, true);
}

cplx compensated_steering(const LinearRis& ris, double delta, double theta_i, double theta_s) {
    const WaveContext& ctx = ris.context();
    const double lambda = ctx.wavelength();
    const double psi = kTwoPi * ris.spacing() * (std::sin(theta_i) + std::sin(theta_s) - delta) / lambda;
    const auto n = static_cast<double>(ris.size());
    cplx sum;
    if (ris.uniform_area()) {
        // Σ_{n<N} e^{jnψ} = e^{j(N-1)ψ/2} sin(Nψ/2)/sin(ψ/2)
        const double half = psi / 2.0;
        const double den = std::sin(half);
        const double ratio =
            std::abs(den) < 1e-9 ? n * std::cos(n * half) / std::cos(half) : std::sin(n * half) / den;
        const double centre = (n - 1.0) * half;
        sum = ris.cells().front().area / lambda * ratio * cplx(std::cos(centre), std::sin(centre));
    } else {
        for (std::size_t i = 0; i < ris.size(); ++i) {
            const double arg = static_cast<double>(i) * psi;
            sum += ris.cells()[i].area / lambda * cplx(std::cos(arg), std::sin(arg));
        }
    }
    return ctx.scattering_constant() * sum;
}

double compensated_rcs(const LinearRis& ris, double delta, double theta_i, double theta_s) {
    const double ci = std::cos(theta_i);
    return 4.0 * kPi * ci * ci * std::norm(compensated_steering(ris, delta, theta_i, theta_s));
}

// ------------------------------------------------------------- reshaping ---

std::vector<double> ReshapeSolution::areas() const {
    std::vector<double> out;
    for (Eigen::Index n = 0; n < weights.size(); ++n) out.push_back(std::abs(weights[n]));
    return out;
}

std::vector<double> ReshapeSolution::phases() const {
    std::vector<double> out;
    for (Eigen::Index n = 0; n < weights.size(); ++n) out.push_back(wrap_phase(std::arg(weights[n])));
    return out;
}

bool is_dft_grid(const MimoSystem& sys) {
    if (sys.outputs() != sys.cells()) return false;
    const Eigen::MatrixXcd& v = sys.scatter_steering();
    const auto n = static_cast<double>(sys.cells());
    const Eigen::MatrixXcd gram = v * v.adjoint() - n * Eigen::MatrixXcd::Identity(v.rows(), v.rows());
    return gram.cwiseAbs().maxCoeff() <= 1e-9 * n;
}

ReshapeSolution beam_reshape(const MimoSystem& sys, const Eigen::VectorXcd& incident, const Eigen::VectorXcd& desired,
                             const ReshapeOptions& options) {
    if (static_cast<std::size_t>(desired.size()) != sys.outputs())
        throw DimensionError("desired field has " + std::to_string(desired.size()) + " entries, system has " +
                             std::to_string(sys.outputs()) + " outputs");
    if (!(options.truncation_tol >= 0.0)) throw ValidationError("truncation tolerance must be non-negative");

    const Eigen::VectorXcd e_hat = sys.effective_incident(incident);
    const auto n_cells = static_cast<Eigen::Index>(sys.cells());

    // Reduce to V_s x ≈ y with x = W ∘ Ê^i.
    Eigen::VectorXcd y(desired.size());
    if (options.reference_radius) {
        const double r = *options.reference_radius;
        if (!(r > 0.0)) throw ValidationError("reference radius must be positive");
        const WaveContext ctx(sys.wavelength(), sys.reflection());
        const cplx beta = static_cast<double>(n_cells) * sys.prefactor() * ctx.propagation(r);
        y = desired * (static_cast<double>(n_cells) / beta);
    } else {
        y = desired.cwiseQuotient(sys.prefactor() * sys.attenuation());
    }

    ReshapeSolution sol;
    Eigen::VectorXcd x;
    const Eigen::MatrixXcd& v = sys.scatter_steering();
    if (!options.max_rank && is_dft_grid(sys)) {
        x = v.adjoint() * y / static_cast<double>(n_cells);
        sol.rank = static_cast<std::size_t>(n_cells);
        sol.dft_fast_path = true;
    } else {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sigma = svd.singularValues();
        const Eigen::VectorXcd coeff = svd.matrixU().adjoint() * y;
        const double cutoff = options.truncation_tol * (sigma.size() ? sigma[0] : 0.0);
        std::size_t keep = 0;
        for (Eigen::Index k = 0; k < sigma.size(); ++k) {
            if (sigma[k] > 0.0 && sigma[k] >= cutoff && (!options.max_rank || keep < *options.max_rank)) ++keep;
            else break;
        }
        Eigen::VectorXcd scaled = Eigen::VectorXcd::Zero(sigma.size());
        double discarded = 0.0;
        for (Eigen::Index k = 0; k < sigma.size(); ++k) {
            if (static_cast<std::size_t>(k) < keep) scaled[k] = coeff[k] / sigma[k];
            else discarded += std::norm(coeff[k]);
        }
        x = svd.matrixV() * scaled;
        sol.rank = keep;
        const double y_norm = y.norm();
        sol.discarded_fraction = y_norm > 0.0 ? std::sqrt(discarded) / y_norm : 0.0;
        if (sol.discarded_fraction > options.max_discarded_fraction)
            throw NumericalError("beam_reshape: truncated directions carry " + std::to_string(sol.discarded_fraction) +
                                 " of the target norm (limit " + std::to_string(options.max_discarded_fraction) + ")");
    }

    const double guard = options.zero_guard * (e_hat.size() ? e_hat.cwiseAbs().maxCoeff() : 0.0);
    sol.weights = Eigen::VectorXcd::Zero(n_cells);
    for (Eigen::Index n = 0; n < n_cells; ++n) {
        if (std::abs(e_hat[n]) > guard && std::abs(e_hat[n]) > 0.0) {
            sol.weights[n] = x[n] / e_hat[n];
        } else {
            ++sol.zeroed_cells;
        }
    }
    sol.residual_norm = (apply_mimo(sys.with_weights(sol.weights), incident) - desired).norm();
    return sol;
}

}  // namespace risem
