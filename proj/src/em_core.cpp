#include "risem/em_core.hpp"

#include <cmath>

namespace risem {

double wrap_phase(double phase) {
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod of a tiny negative value can round up to exactly 2π
    if (w >= kTwoPi) w = 0.0;
    return w;
}

WaveContext::WaveContext(double wavelength, cplx reflection)
    : wavelength_(wavelength), reflection_(reflection) {
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
        throw ValidationError("wavelength must be positive and finite");
    if (!std::isfinite(reflection.real()) || !std::isfinite(reflection.imag()))
        throw ValidationError("reflection coefficient must be finite");
}

cplx WaveContext::scattering_constant() const {
    return cplx(0.0, -1.0) * (1.0 - reflection_) / 2.0;
}

cplx WaveContext::propagation(double r) const {
    const double phase = -wavenumber() * r;
    return cplx(std::cos(phase), std::sin(phase)) / r;
}

bool Direction::is_spherical() const {
    return theta >= 0.0 && theta <= kPi && phi >= -kPi && phi <= kPi;
}

Vec3 direction_vector(const Direction& d) {
    const double st = std::sin(d.theta);
    return {st * std::cos(d.phi), st * std::sin(d.phi), std::cos(d.theta)};
}

double sinc_normalized(double x) {
    if (std::abs(x) < kSincTaylorThreshold) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double sampling_sa(double a, double b, const Direction& scatter, const Direction& incident,
                   const WaveContext& ctx) {
    const Vec3 us = direction_vector(scatter);
    const Vec3 ui = direction_vector(incident);
    const double k = kPi / ctx.wavelength();
    return sinc_normalized(k * a * (us[0] + ui[0])) * sinc_normalized(k * b * (us[1] + ui[1]));
}

double sampling_sa_linear(double b, double theta_s, double theta_i, const WaveContext& ctx) {
    return sinc_normalized(kPi * b / ctx.wavelength() * (std::sin(theta_s) + std::sin(theta_i)));
}

}  // namespace risem
