#include <cstdlib>
#include <stdexcept>
#include <string>

#include "risem/kernels/kernels.hpp"

namespace risem::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::generic: return "generic";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool supported(Isa isa) {
    switch (isa) {
        case Isa::generic: return true;
        case Isa::avx2:
#if defined(RISEM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!supported(isa))
        throw std::runtime_error("kernel table '" + std::string(isa_name(isa)) + "' not available on this CPU");
#if defined(RISEM_HAVE_AVX2)
    if (isa == Isa::avx2) return avx2::table();
#endif
    return generic::table();
}

std::vector<Isa> available() {
    std::vector<Isa> out{Isa::generic};
    if (supported(Isa::avx2)) out.push_back(Isa::avx2);
    return out;
}

namespace {

const KernelTable& select() {
    if (const char* forced = std::getenv("RISEM_ISA")) {
        const std::string name(forced);
        if (name == "generic") return generic::table();
        if (name == "avx2" && supported(Isa::avx2)) return table(Isa::avx2);
    }
    if (supported(Isa::avx2)) return table(Isa::avx2);
    return generic::table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& t = select();
    return t;
}

}  // namespace risem::kernels
