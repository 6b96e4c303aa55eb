#include <cstdlib>
#include <stdexcept>

#include "agesched/kernels.hpp"

namespace agesched::kernels {

#if !AGESCHED_HAVE_AVX2
double bellman_sweep_avx2(const BellmanSweep&) {
    throw std::runtime_error("AVX2 kernels were not compiled in");
}
double policy_eval_sweep_avx2(const PolicyEvalSweep&) {
    throw std::runtime_error("AVX2 kernels were not compiled in");
}
#endif

namespace {

bool detect_avx2() {
#if AGESCHED_HAVE_AVX2
    if (const char* force = std::getenv("AGESCHED_FORCE_SCALAR");
        force != nullptr && force[0] != '\0' && force[0] != '0') {
        return false;
    }
    return __builtin_cpu_supports("avx2") > 0;
#else
    return false;
#endif
}

const bool g_use_avx2 = detect_avx2();

} // namespace

bool avx2_available() { return g_use_avx2; }

const char* active_backend() { return g_use_avx2 ? "avx2" : "scalar"; }

double bellman_sweep(const BellmanSweep& s) {
    return g_use_avx2 ? bellman_sweep_avx2(s) : bellman_sweep_scalar(s);
}

double policy_eval_sweep(const PolicyEvalSweep& s) {
    return g_use_avx2 ? policy_eval_sweep_avx2(s) : policy_eval_sweep_scalar(s);
}

} // namespace agesched::kernels
