// Reference kernels. These define the expected results for the vector
// variants and are always compiled.

#include <cmath>

#include "risem/kernels/kernels.hpp"

namespace risem::kernels {

namespace {

inline double sinc(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

cplx steering_sum(const CellView& cells, double sx, double sy, double sz) {
    double re = 0.0;
    double im = 0.0;
    const std::size_t n = cells.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double amp =
            cells.weight[i] * sinc(cells.half_a[i] * sx) * sinc(cells.half_b[i] * sy);
        const double arg = cells.phase[i] + cells.x[i] * sx + cells.y[i] * sy + cells.z[i] * sz;
        re += amp * std::cos(arg);
        im += amp * std::sin(arg);
    }
    return {re, im};
}

void sincos(std::span<const double> x, std::span<double> s, std::span<double> c) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        s[i] = std::sin(x[i]);
        c[i] = std::cos(x[i]);
    }
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re, im};
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
    const double ar = alpha.real();
    const double ai = alpha.imag();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xr = x[i].real();
        const double xi = x[i].imag();
        y[i] = {y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr};
    }
}

}  // namespace

void CellTable::resize(std::size_t n) {
    for (auto* v : {&x, &y, &z, &half_a, &half_b, &weight, &phase}) v->assign(n, 0.0);
}

namespace generic {
const KernelTable& table() {
    static const KernelTable t{Isa::generic, &steering_sum, &sincos, &dot, &axpy};
    return t;
}
}  // namespace generic

}  // namespace risem::kernels
