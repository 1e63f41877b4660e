// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has checked CPUID.
//
// sin/cos use the Cody-Waite three-part π/4 reduction and the minimax
// polynomials of the Cephes double-precision routines; arguments seen by the
// model (|x| ≲ 1e4) reduce exactly.

#include <immintrin.h>

#include <cmath>

#include "risem/kernels/kernels.hpp"

namespace risem::kernels {

namespace {

constexpr double kFourOverPi = 1.27323954473516268615;
constexpr double kDp1 = 7.85398125648498535156e-1;
constexpr double kDp2 = 3.77489470793079817668e-8;
constexpr double kDp3 = 2.69515142907905952645e-15;

constexpr double kSin[] = {1.58962301576546568060e-10, -2.50507477628578072866e-8,
                           2.75573136213857245213e-6,  -1.98412698295895385996e-4,
                           8.33333333332211858878e-3,  -1.66666666666666307295e-1};
constexpr double kCos[] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9,
                           -2.75573141792967388112e-7,  2.48015872888517045348e-5,
                           -1.38888888888730564116e-3,  4.16666666666665929218e-2};

inline __m256d poly5(__m256d z, const double* c) {
    __m256d p = _mm256_set1_pd(c[0]);
    for (int i = 1; i < 6; ++i) p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[i]));
    return p;
}

inline void sincos4(__m256d x, __m256d& s_out, __m256d& c_out) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d ax = _mm256_andnot_pd(sign_mask, x);
    const __m256d xsign = _mm256_and_pd(sign_mask, x);

    // y = floor(|x|·4/π), rounded up to even; q = (y/2) mod 4 is the quadrant
    __m256d y = _mm256_floor_pd(_mm256_mul_pd(ax, _mm256_set1_pd(kFourOverPi)));
    const __m256d half_y = _mm256_mul_pd(y, _mm256_set1_pd(0.5));
    const __m256d odd = _mm256_sub_pd(y, _mm256_mul_pd(_mm256_floor_pd(half_y), _mm256_set1_pd(2.0)));
    y = _mm256_add_pd(y, odd);
    const __m256d octant = _mm256_mul_pd(y, _mm256_set1_pd(0.5));
    const __m256d q = _mm256_sub_pd(
        octant, _mm256_mul_pd(_mm256_floor_pd(_mm256_mul_pd(octant, _mm256_set1_pd(0.25))),
                              _mm256_set1_pd(4.0)));

    __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDp1), ax);
    z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDp2), z);
    z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDp3), z);
    const __m256d zz = _mm256_mul_pd(z, z);

    const __m256d ps = _mm256_fmadd_pd(_mm256_mul_pd(z, zz), poly5(zz, kSin), z);
    __m256d pc = _mm256_fmadd_pd(_mm256_mul_pd(zz, zz), poly5(zz, kCos),
                                 _mm256_fnmadd_pd(zz, _mm256_set1_pd(0.5), _mm256_set1_pd(1.0)));

    // quadrant table: q=0 ( s, c), 1 ( c,-s), 2 (-s,-c), 3 (-c, s)
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d three = _mm256_set1_pd(3.0);
    const __m256d swap = _mm256_or_pd(_mm256_cmp_pd(q, one, _CMP_EQ_OQ), _mm256_cmp_pd(q, three, _CMP_EQ_OQ));
    const __m256d s_neg = _mm256_cmp_pd(q, two, _CMP_GE_OQ);
    const __m256d c_neg = _mm256_or_pd(_mm256_cmp_pd(q, one, _CMP_EQ_OQ), _mm256_cmp_pd(q, two, _CMP_EQ_OQ));

    __m256d s = _mm256_blendv_pd(ps, pc, swap);
    __m256d c = _mm256_blendv_pd(pc, ps, swap);
    s = _mm256_xor_pd(s, _mm256_and_pd(s_neg, sign_mask));
    c = _mm256_xor_pd(c, _mm256_and_pd(c_neg, sign_mask));
    // sin is odd in x
    s_out = _mm256_xor_pd(s, xsign);
    c_out = c;
}

inline __m256d sinc4(__m256d x) {
    __m256d s, c;
    sincos4(x, s, c);
    const __m256d ax = _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
    const __m256d small = _mm256_cmp_pd(ax, _mm256_set1_pd(1e-6), _CMP_LT_OQ);
    const __m256d taylor = _mm256_fnmadd_pd(_mm256_mul_pd(x, x), _mm256_set1_pd(1.0 / 6.0), _mm256_set1_pd(1.0));
    // the division lanes that are replaced may be 0/0; blend discards them
    const __m256d ratio = _mm256_div_pd(s, x);
    return _mm256_blendv_pd(ratio, taylor, small);
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

inline double sinc1(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

cplx steering_sum(const CellView& cells, double sx, double sy, double sz) {
    const std::size_t n = cells.size();
    const __m256d vsx = _mm256_set1_pd(sx);
    const __m256d vsy = _mm256_set1_pd(sy);
    const __m256d vsz = _mm256_set1_pd(sz);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d arg = _mm256_loadu_pd(&cells.phase[i]);
        arg = _mm256_fmadd_pd(_mm256_loadu_pd(&cells.x[i]), vsx, arg);
        arg = _mm256_fmadd_pd(_mm256_loadu_pd(&cells.y[i]), vsy, arg);
        arg = _mm256_fmadd_pd(_mm256_loadu_pd(&cells.z[i]), vsz, arg);
        const __m256d sa = _mm256_mul_pd(sinc4(_mm256_mul_pd(_mm256_loadu_pd(&cells.half_a[i]), vsx)),
                                         sinc4(_mm256_mul_pd(_mm256_loadu_pd(&cells.half_b[i]), vsy)));
        const __m256d amp = _mm256_mul_pd(_mm256_loadu_pd(&cells.weight[i]), sa);
        __m256d s, c;
        sincos4(arg, s, c);
        acc_re = _mm256_fmadd_pd(amp, c, acc_re);
        acc_im = _mm256_fmadd_pd(amp, s, acc_im);
    }
    double re = hsum(acc_re);
    double im = hsum(acc_im);
    for (; i < n; ++i) {
        const double amp = cells.weight[i] * sinc1(cells.half_a[i] * sx) * sinc1(cells.half_b[i] * sy);
        const double arg = cells.phase[i] + cells.x[i] * sx + cells.y[i] * sy + cells.z[i] * sz;
        re += amp * std::cos(arg);
        im += amp * std::sin(arg);
    }
    return {re, im};
}

void sincos(std::span<const double> x, std::span<double> s, std::span<double> c) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vs, vc;
        sincos4(_mm256_loadu_pd(&x[i]), vs, vc);
        _mm256_storeu_pd(&s[i], vs);
        _mm256_storeu_pd(&c[i], vc);
    }
    for (; i < n; ++i) {
        s[i] = std::sin(x[i]);
        c[i] = std::cos(x[i]);
    }
}

// Two interleaved complex numbers per register: [re0, im0, re1, im1].
inline __m256d cmul2(__m256d a, __m256d b) {
    const __m256d a_re = _mm256_movedup_pd(a);
    const __m256d a_im = _mm256_permute_pd(a, 0b1111);
    const __m256d b_swap = _mm256_permute_pd(b, 0b0101);
    return _mm256_fmaddsub_pd(a_re, b, _mm256_mul_pd(a_im, b_swap));
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    const std::size_t n = a.size();
    const auto* pa = reinterpret_cast<const double*>(a.data());
    const auto* pb = reinterpret_cast<const double*>(b.data());
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, cmul2(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i)));
        acc1 = _mm256_add_pd(acc1, cmul2(_mm256_loadu_pd(pa + 2 * i + 4), _mm256_loadu_pd(pb + 2 * i + 4)));
    }
    for (; i + 2 <= n; i += 2)
        acc0 = _mm256_add_pd(acc0, cmul2(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i)));
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double re = lanes[0] + lanes[2];
    double im = lanes[1] + lanes[3];
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re, im};
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
    const std::size_t n = x.size();
    const auto* px = reinterpret_cast<const double*>(x.data());
    auto* py = reinterpret_cast<double*>(y.data());
    const __m256d va = _mm256_setr_pd(alpha.real(), alpha.imag(), alpha.real(), alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d prod = cmul2(va, _mm256_loadu_pd(px + 2 * i));
        _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
    }
    for (; i < n; ++i) {
        const double xr = x[i].real();
        const double xi = x[i].imag();
        y[i] = {y[i].real() + alpha.real() * xr - alpha.imag() * xi,
                y[i].imag() + alpha.real() * xi + alpha.imag() * xr};
    }
}

}  // namespace

namespace avx2 {
const KernelTable& table() {
    static const KernelTable t{Isa::avx2, &steering_sum, &sincos, &dot, &axpy};
    return t;
}
}  // namespace avx2

}  // namespace risem::kernels
