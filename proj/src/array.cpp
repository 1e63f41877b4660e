#include "risem/array.hpp"

#include <cmath>
#include <string>

namespace risem {

RisGeometry::RisGeometry(std::vector<UnitCell> cells, WaveContext ctx) : cells_(std::move(cells)), ctx_(ctx) {
    if (cells_.empty()) throw ValidationError("an array needs at least one cell");
    const double lambda = ctx_.wavelength();
    const double k = ctx_.wavenumber();
    table_.resize(cells_.size());
    for (std::size_t n = 0; n < cells_.size(); ++n) {
        UnitCell& c = cells_[n];
        if (!(c.a > 0.0) || !(c.b > 0.0) || !(c.area > 0.0))
            throw ValidationError("cell " + std::to_string(n) + ": a, b and area must be positive");
        for (double v : c.position)
            if (!std::isfinite(v)) throw ValidationError("cell " + std::to_string(n) + ": position must be finite");
        c.phase = wrap_phase(c.phase);
        table_.x[n] = k * c.position[0];
        table_.y[n] = k * c.position[1];
        table_.z[n] = k * c.position[2];
        table_.half_a[n] = kPi * c.a / lambda;
        table_.half_b[n] = kPi * c.b / lambda;
        table_.weight[n] = c.area / lambda;
        table_.phase[n] = c.phase;
    }
}

RisGeometry RisGeometry::with_phases(std::span<const double> phases) const {
    if (phases.size() != cells_.size()) throw DimensionError("phase vector length must match the cell count");
    std::vector<UnitCell> cells = cells_;
    for (std::size_t n = 0; n < cells.size(); ++n) cells[n].phase = phases[n];
    return RisGeometry(std::move(cells), ctx_);
}

cplx RisGeometry::array_factor(const Direction& incident, const Direction& scatter) const {
    const Vec3 ui = direction_vector(incident);
    const Vec3 us = direction_vector(scatter);
    return kernels::active().steering_sum(table_.view(), ui[0] + us[0], ui[1] + us[1], ui[2] + us[2]);
}

cplx path_length_phase(const Vec3& p, const Direction& d, const WaveContext& ctx) {
    const double arg = ctx.wavenumber() * dot(p, direction_vector(d));
    return {std::cos(arg), std::sin(arg)};
}

SphericalField ris_scattered_field(const RisGeometry& ris, const PlaneWave& wave, const ObservationPoint& obs) {
    const WaveContext& ctx = ris.context();
    const PolarizationFactors pol = polarization_factors(wave.direction, obs.direction);
    const cplx common = ctx.scattering_constant() * ctx.propagation(obs.r) *
                        (wave.amplitude * std::cos(wave.direction.theta)) *
                        ris.array_factor(wave.direction, obs.direction);
    return {cplx{}, common * pol.theta, common * pol.phi};
}

SphericalField ris_scattered_field_multi(const RisGeometry& ris, std::span<const PlaneWave> waves,
                                         const ObservationPoint& obs) {
    if (waves.empty()) throw ValidationError("at least one incident wave is required");
    SphericalField total;
    for (const PlaneWave& w : waves) total += ris_scattered_field(ris, w, obs);
    return total;
}

double ris_field_strength(const RisGeometry& ris, const PlaneWave& wave, const ObservationPoint& obs) {
    const WaveContext& ctx = ris.context();
    const PolarizationFactors pol = polarization_factors(wave.direction, obs.direction);
    return std::abs(ctx.scattering_constant()) * wave.amplitude / obs.r * std::abs(std::cos(wave.direction.theta)) *
           std::sqrt(pol.power()) * std::abs(ris.array_factor(wave.direction, obs.direction));
}

double ris_bistatic_rcs(const RisGeometry& ris, const Direction& incident, const Direction& scatter) {
    const WaveContext& ctx = ris.context();
    const PolarizationFactors pol = polarization_factors(incident, scatter);
    const double ci = std::cos(incident.theta);
    return 4.0 * kPi * std::norm(ctx.scattering_constant()) * ci * ci * pol.power() *
           std::norm(ris.array_factor(incident, scatter));
}

}  // namespace risem
