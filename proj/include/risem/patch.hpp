#pragma once

// Physical-optics scattering from a single rectangular conducting patch in
// the xy-plane, centred at the origin, illuminated by perpendicularly
// polarised plane waves.

#include <span>
#include <vector>

#include "risem/em_core.hpp"

namespace risem {

/// a×b plate. The collecting area defaults to a·b but is an independent
/// quantity: the field amplitude scales with the area, the directivity with
/// the edge lengths.
class Patch {
public:
    Patch(double a, double b);
    Patch(double a, double b, double area);

    double a() const { return a_; }
    double b() const { return b_; }
    double area() const { return area_; }

private:
    double a_;
    double b_;
    double area_;
};

/// Incident plane wave: the direction it originates from and its real
/// amplitude E^i.
struct PlaneWave {
    Direction direction;
    double amplitude = 1.0;
};

/// Complex (r, θ, φ) field components at an observation point.
struct SphericalField {
    cplx e_r{};
    cplx e_theta{};
    cplx e_phi{};

    double magnitude() const;

    SphericalField& operator+=(const SphericalField& o) {
        e_r += o.e_r;
        e_theta += o.e_theta;
        e_phi += o.e_phi;
        return *this;
    }
    friend SphericalField operator+(SphericalField a, const SphericalField& b) { return a += b; }
    friend SphericalField operator*(cplx s, const SphericalField& f) {
        return {s * f.e_r, s * f.e_theta, s * f.e_phi};
    }
};

/// The two trigonometric polarisation factors shared by every closed form:
/// theta = cosθs (cosφi sinφs - sinφi cosφs), phi = sinφi sinφs + cosφi cosφs.
struct PolarizationFactors {
    double theta;
    double phi;

    /// theta² + phi²
    double power() const { return theta * theta + phi * phi; }
};

PolarizationFactors polarization_factors(const Direction& incident, const Direction& scatter);

SphericalField patch_scattered_field(const Patch& patch, const PlaneWave& wave,
                                     const ObservationPoint& obs, const WaveContext& ctx);

/// |E^s| from the closed-form magnitude expression.
double patch_field_strength(const Patch& patch, const PlaneWave& wave, const ObservationPoint& obs,
                            const WaveContext& ctx);

/// Bistatic RCS in squared length units. Independent of r and E^i.
double patch_bistatic_rcs(const Patch& patch, const Direction& incident, const Direction& scatter,
                          const WaveContext& ctx);

/// Superposition over several incident waves.
SphericalField patch_scattered_field_multi(const Patch& patch, std::span<const PlaneWave> waves,
                                           const ObservationPoint& obs, const WaveContext& ctx);

/// Radiation integrals of the physical-optics surface current with the
/// medium impedance factored out (currents are normalised by η).
struct RadiationIntegrals {
    cplx n_theta{};
    cplx n_phi{};
};

/// Integrates J_x, J_y over the plate with a 2-D Gauss–Legendre rule of the
/// given order per axis. Independent of the closed forms; used to check them.
RadiationIntegrals po_radiation_integrals(const Patch& patch, const PlaneWave& wave,
                                          const Direction& scatter, const WaveContext& ctx,
                                          int quadrature_order);

/// Closed-form value of the same integrals.
RadiationIntegrals po_radiation_integrals_closed_form(const Patch& patch, const PlaneWave& wave,
                                                      const Direction& scatter, const WaveContext& ctx);

/// Far-field assembly: E_θ,φ = -j/(2λ) · e^{-j2πr/λ}/r · N_θ,φ (η already
/// divided out of the currents), E_r = 0.
SphericalField far_field_from_integrals(const RadiationIntegrals& n, const ObservationPoint& obs,
                                        const WaveContext& ctx);

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

}  // namespace risem
