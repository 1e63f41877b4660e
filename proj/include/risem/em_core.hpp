#pragma once

// Shared geometric and electromagnetic primitives.
//
// Lengths may be given in any consistent unit; every model formula only
// depends on length/wavelength ratios and on the 1/r attenuation, so the
// library is usually driven with wavelength = 1.

#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risem {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Thrown when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a solver cannot produce a trustworthy answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when vector/matrix sizes do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Wrap an angle into [0, 2π).
double wrap_phase(double phase);

/// Wavelength plus surface reflection coefficient Γ. The scattering constant
/// C = -j(1 - Γ)/2 is always derived from Γ.
class WaveContext {
public:
    explicit WaveContext(double wavelength = 1.0, cplx reflection = {-1.0, 0.0});

    double wavelength() const { return wavelength_; }
    cplx reflection() const { return reflection_; }
    cplx scattering_constant() const;

    /// 2π/λ
    double wavenumber() const { return kTwoPi / wavelength_; }

    /// e^{-j2πr/λ} / r, the far-field delay and spreading factor.
    cplx propagation(double r) const;

private:
    double wavelength_;
    cplx reflection_;
};

/// Spherical direction in radians. The full form uses θ ∈ [0, π],
/// φ ∈ [-π, π]; linear-RIS code uses the signed θ ∈ [-π/2, π/2] convention in
/// the yoz plane instead and does not go through this type.
struct Direction {
    double theta = 0.0;
    double phi = 0.0;

    bool is_spherical() const;
};

struct ObservationPoint {
    double r = 1.0;
    Direction direction;
};

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// u(θ, φ) = [sinθ cosφ, sinθ sinφ, cosθ].
Vec3 direction_vector(const Direction& d);

/// sin(x)/x with the removable singularity at 0 handled by 1 - x²/6.
double sinc_normalized(double x);

inline constexpr double kSincTaylorThreshold = 1e-6;

/// Intrinsic directivity of an a×b plate: the product of two sinc factors
/// whose arguments are (πa/λ)(u_s.x + u_i.x) and (πb/λ)(u_s.y + u_i.y).
/// Symmetric in scatter/incident.
double sampling_sa(double a, double b, const Direction& scatter, const Direction& incident,
                   const WaveContext& ctx);

/// Single-sinc form used in the yoz plane with signed angles:
/// sinc((πb/λ)(sinθs + sinθi)).
double sampling_sa_linear(double b, double theta_s, double theta_i, const WaveContext& ctx);

}  // namespace risem
