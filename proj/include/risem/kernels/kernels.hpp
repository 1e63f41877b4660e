#pragma once

// Data-parallel inner loops. Every kernel has a portable reference
// implementation (`generic`) and, on x86-64, an AVX2+FMA variant. The table
// used by the model code is picked once at startup from CPUID; set
// RISEM_ISA=generic in the environment to pin the reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace risem::kernels {

using cplx = std::complex<double>;

enum class Isa { generic, avx2 };

std::string_view isa_name(Isa isa);

/// Structure-of-arrays view of a cell list, pre-scaled for the steering sum.
/// All spans have the same length.
struct CellView {
    std::span<const double> x;       // position · 2π/λ
    std::span<const double> y;
    std::span<const double> z;
    std::span<const double> half_a;  // πa/λ
    std::span<const double> half_b;  // πb/λ
    std::span<const double> weight;  // A/λ
    std::span<const double> phase;   // Ω

    std::size_t size() const { return weight.size(); }
};

/// Owning storage behind a CellView.
struct CellTable {
    std::vector<double> x, y, z, half_a, half_b, weight, phase;

    CellView view() const { return {x, y, z, half_a, half_b, weight, phase}; }
    void resize(std::size_t n);
};

struct KernelTable {
    Isa isa;

    /// Σ_n weight_n · sinc(half_a_n·s.x) · sinc(half_b_n·s.y)
    ///       · exp(j(phase_n + x_n s.x + y_n s.y + z_n s.z))
    /// where s = u(incident) + u(scatter).
    cplx (*steering_sum)(const CellView& cells, double sx, double sy, double sz);

    /// Elementwise sine and cosine.
    void (*sincos)(std::span<const double> x, std::span<double> s, std::span<double> c);

    /// Σ a_i b_i (unconjugated).
    cplx (*dot)(std::span<const cplx> a, std::span<const cplx> b);

    /// y += alpha · x
    void (*axpy)(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
};

namespace generic {
const KernelTable& table();
}

#if defined(RISEM_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

bool supported(Isa isa);

/// Table for a specific ISA; throws std::runtime_error if unavailable.
const KernelTable& table(Isa isa);

/// Table selected at startup.
const KernelTable& active();

/// All tables usable on this machine, reference first.
std::vector<Isa> available();

}  // namespace risem::kernels
