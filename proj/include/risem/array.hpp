#pragma once

// Planar or conformal arrays of patches. Every cell lies parallel to the
// xy-plane; only its position changes. The total field is the coherent sum of
// the per-cell single-patch fields, each delayed by its incident and
// scattered path-length difference and rotated by its configured phase.

#include <span>
#include <vector>

#include "risem/em_core.hpp"
#include "risem/kernels/kernels.hpp"
#include "risem/patch.hpp"

namespace risem {

struct UnitCell {
    Vec3 position{0.0, 0.0, 0.0};
    double a = 0.1;
    double b = 0.1;
    double area = 0.01;
    double phase = 0.0;  // Ω in radians, normalised to [0, 2π) by RisGeometry
};

/// Ordered cell list plus wave context. Cell order is the summation index.
class RisGeometry {
public:
    RisGeometry(std::vector<UnitCell> cells, WaveContext ctx);

    const std::vector<UnitCell>& cells() const { return cells_; }
    const WaveContext& context() const { return ctx_; }
    std::size_t size() const { return cells_.size(); }

    /// Same geometry with new phase shifts (one per cell).
    RisGeometry with_phases(std::span<const double> phases) const;

    /// Array factor Σ_n (A_n/λ) e^{jΩ_n} Sa_n e^{j2π p_n·(u_i+u_s)/λ}.
    cplx array_factor(const Direction& incident, const Direction& scatter) const;

private:
    std::vector<UnitCell> cells_;
    WaveContext ctx_;
    kernels::CellTable table_;
};

/// e^{j2π p·u(d)/λ}: the phase advance of a cell at p relative to the origin
/// along one leg (incident or scattered).
cplx path_length_phase(const Vec3& p, const Direction& d, const WaveContext& ctx);

SphericalField ris_scattered_field(const RisGeometry& ris, const PlaneWave& wave, const ObservationPoint& obs);

SphericalField ris_scattered_field_multi(const RisGeometry& ris, std::span<const PlaneWave> waves,
                                         const ObservationPoint& obs);

/// |E^s| from the closed-form magnitude expression.
double ris_field_strength(const RisGeometry& ris, const PlaneWave& wave, const ObservationPoint& obs);

double ris_bistatic_rcs(const RisGeometry& ris, const Direction& incident, const Direction& scatter);

}  // namespace risem
