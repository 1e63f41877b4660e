#include "risem/patch.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace risem {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive and finite");
}

cplx expj(double arg) { return {std::cos(arg), std::sin(arg)}; }

}  // namespace

Patch::Patch(double a, double b) : Patch(a, b, a * b) {}

Patch::Patch(double a, double b, double area) : a_(a), b_(b), area_(area) {
    require_positive(a, "patch edge a");
    require_positive(b, "patch edge b");
    require_positive(area, "patch area");
}

double SphericalField::magnitude() const {
    return std::sqrt(std::norm(e_r) + std::norm(e_theta) + std::norm(e_phi));
}

PolarizationFactors polarization_factors(const Direction& incident, const Direction& scatter) {
    const double ci = std::cos(incident.phi), si = std::sin(incident.phi);
    const double cs = std::cos(scatter.phi), ss = std::sin(scatter.phi);
    return {std::cos(scatter.theta) * (ci * ss - si * cs), si * ss + ci * cs};
}

SphericalField patch_scattered_field(const Patch& patch, const PlaneWave& wave,
                                     const ObservationPoint& obs, const WaveContext& ctx) {
    const PolarizationFactors pol = polarization_factors(wave.direction, obs.direction);
    const double sa = sampling_sa(patch.a(), patch.b(), obs.direction, wave.direction, ctx);
    const cplx common = ctx.scattering_constant() * (patch.area() / ctx.wavelength()) *
                        ctx.propagation(obs.r) * (wave.amplitude * std::cos(wave.direction.theta) * sa);
    return {cplx{}, common * pol.theta, common * pol.phi};
}

double patch_field_strength(const Patch& patch, const PlaneWave& wave, const ObservationPoint& obs,
                            const WaveContext& ctx) {
    const PolarizationFactors pol = polarization_factors(wave.direction, obs.direction);
    const double sa = sampling_sa(patch.a(), patch.b(), obs.direction, wave.direction, ctx);
    return std::abs(ctx.scattering_constant()) * patch.area() / (ctx.wavelength() * obs.r) * wave.amplitude *
           std::abs(std::cos(wave.direction.theta)) * std::abs(sa) * std::sqrt(pol.power());
}

double patch_bistatic_rcs(const Patch& patch, const Direction& incident, const Direction& scatter,
                          const WaveContext& ctx) {
    const PolarizationFactors pol = polarization_factors(incident, scatter);
    const double sa = sampling_sa(patch.a(), patch.b(), scatter, incident, ctx);
    const double ci = std::cos(incident.theta);
    const double ratio = patch.area() / ctx.wavelength();
    return 4.0 * kPi * std::norm(ctx.scattering_constant()) * ratio * ratio * ci * ci * pol.power() * sa * sa;
}

SphericalField patch_scattered_field_multi(const Patch& patch, std::span<const PlaneWave> waves,
                                           const ObservationPoint& obs, const WaveContext& ctx) {
    if (waves.empty()) throw ValidationError("at least one incident wave is required");
    SphericalField total;
    for (const PlaneWave& w : waves) total += patch_scattered_field(patch, w, obs, ctx);
    return total;
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw ValidationError("Gauss-Legendre order must be positive");
    // P_n(x) and P_n'(x) by the three-term recurrence
    auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };

    GaussLegendre rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

RadiationIntegrals po_radiation_integrals(const Patch& patch, const PlaneWave& wave,
                                          const Direction& scatter, const WaveContext& ctx,
                                          int quadrature_order) {
    if (quadrature_order < 2) throw ValidationError("quadrature order must be at least 2");
    const GaussLegendre rule = gauss_legendre(quadrature_order);

    const double ti = wave.direction.theta, pi = wave.direction.phi;
    const double ts = scatter.theta, ps = scatter.phi;
    const double k = ctx.wavenumber();
    const cplx scale = (1.0 - ctx.reflection()) * wave.amplitude * std::cos(ti);
    // surface current per unit (η-normalised) field, before the phase term
    const cplx jx0 = -scale * std::sin(pi);
    const cplx jy0 = scale * std::cos(pi);

    const double ha = patch.a() / 2.0, hb = patch.b() / 2.0;
    cplx n_theta{}, n_phi{};
    for (int ix = 0; ix < quadrature_order; ++ix) {
        const double x = ha * rule.nodes[ix];
        for (int iy = 0; iy < quadrature_order; ++iy) {
            const double y = hb * rule.nodes[iy];
            const double w = rule.weights[ix] * rule.weights[iy] * ha * hb;
            // incident phase e^{-j2π(-x sinθi cosφi - y sinθi sinφi)/λ}
            const cplx incident_phase = expj(k * (x * std::sin(ti) * std::cos(pi) + y * std::sin(ti) * std::sin(pi)));
            // radiation kernel e^{j2π r'cosψ/λ}, r'cosψ = x sinθs cosφs + y sinθs sinφs
            const cplx kernel = expj(k * (x * std::sin(ts) * std::cos(ps) + y * std::sin(ts) * std::sin(ps)));
            const cplx jx = jx0 * incident_phase;
            const cplx jy = jy0 * incident_phase;
            n_theta += w * (jx * std::cos(ts) * std::cos(ps) + jy * std::cos(ts) * std::sin(ps)) * kernel;
            n_phi += w * (-jx * std::sin(ps) + jy * std::cos(ps)) * kernel;
        }
    }
    return {n_theta, n_phi};
}

RadiationIntegrals po_radiation_integrals_closed_form(const Patch& patch, const PlaneWave& wave,
                                                      const Direction& scatter, const WaveContext& ctx) {
    const PolarizationFactors pol = polarization_factors(wave.direction, scatter);
    const double sa = sampling_sa(patch.a(), patch.b(), scatter, wave.direction, ctx);
    const cplx common =
        (1.0 - ctx.reflection()) * patch.a() * patch.b() * wave.amplitude * std::cos(wave.direction.theta) * sa;
    return {common * pol.theta, common * pol.phi};
}

SphericalField far_field_from_integrals(const RadiationIntegrals& n, const ObservationPoint& obs,
                                        const WaveContext& ctx) {
    const cplx factor = cplx(0.0, -1.0) / (2.0 * ctx.wavelength()) * ctx.propagation(obs.r);
    return {cplx{}, factor * n.n_theta, factor * n.n_phi};
}

}  // namespace risem
