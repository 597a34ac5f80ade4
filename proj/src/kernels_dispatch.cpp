#include "shadowrl/kernels.hpp"

#include <stdexcept>
#include <string>

namespace shadowrl::kern {

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
const KernelTable& avx512_table();
#endif

namespace {

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2:
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
        case Isa::avx512:
            return __builtin_cpu_supports("avx512f");
#else
        case Isa::avx2:
        case Isa::avx512:
            return false;
#endif
    }
    return false;
}

Isa g_active = detect_best();

}  // namespace

Isa detect_best() {
    if (isa_supported(Isa::avx512)) return Isa::avx512;
    if (isa_supported(Isa::avx2)) return Isa::avx2;
    return Isa::scalar;
}

Isa active() { return g_active; }

void select(Isa isa) {
    if (!isa_supported(isa))
        throw std::runtime_error(std::string("kernel ISA not supported on this CPU: ") + isa_name(isa));
    g_active = isa;
}

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::avx512:
            return "avx512";
    }
    return "?";
}

const KernelTable& table() { return table_for(g_active); }

const KernelTable& table_for(Isa isa) {
    if (!isa_supported(isa))
        throw std::runtime_error(std::string("kernel ISA not supported on this CPU: ") + isa_name(isa));
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2:
            return avx2_table();
        case Isa::avx512:
            return avx512_table();
#endif
        default:
            return scalar_table();
    }
}

}  // namespace shadowrl::kern
