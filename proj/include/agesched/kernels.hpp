#pragma once

#include <cstdint>
#include <span>

// Dense data-parallel inner loops of the MDP solver: one synchronous
// (Jacobi-style) sweep over all states. Each state depends only on v_in, so
// lanes are independent and the AVX2 variants compute bit-identical results
// to the scalar reference (same operation tree, no FMA contraction). The
// active variant is selected once at runtime; set AGESCHED_FORCE_SCALAR=1 in
// the environment to pin the reference implementation.

namespace agesched::kernels {

/// One Bellman backup sweep:
///   q0[s] = err[s] + gamma * v_in[succ_age[s]]
///   q1[s] = (err[s] + lambda)
///           + gamma * (p * v_in[succ_reset[s]] + (1-p) * v_in[succ_age[s]])
///   v_out[s] = min(q0, q1)
/// Returns sup-norm |v_out - v_in|.
struct BellmanSweep {
    std::span<const double> err;
    std::span<const std::int32_t> succ_age;   // aging successor (idle/failure)
    std::span<const std::int32_t> succ_reset; // delivery successor
    double lambda = 0.0;
    double gamma = 0.0;
    double success_prob = 1.0;
    std::span<const double> v_in;
    std::span<double> v_out;
};

/// One policy-evaluation sweep for expected discounted channel usage:
///   u_out[s] = act[s] + gamma * (pa * u_in[succ_reset[s]]
///                                + (1-pa) * u_in[succ_age[s]]),  pa = p*act[s]
/// act[s] is 0.0 or 1.0. Returns sup-norm |u_out - u_in|.
struct PolicyEvalSweep {
    std::span<const double> act;
    std::span<const std::int32_t> succ_age;
    std::span<const std::int32_t> succ_reset;
    double gamma = 0.0;
    double success_prob = 1.0;
    std::span<const double> u_in;
    std::span<double> u_out;
};

double bellman_sweep_scalar(const BellmanSweep& s);
double policy_eval_sweep_scalar(const PolicyEvalSweep& s);

// AVX2 variants; calling them when avx2_available() is false throws.
double bellman_sweep_avx2(const BellmanSweep& s);
double policy_eval_sweep_avx2(const PolicyEvalSweep& s);

/// True when the AVX2 variants were compiled in and the CPU supports AVX2.
bool avx2_available();
/// Name of the dispatched backend: "avx2" or "scalar".
const char* active_backend();

// Dispatched entry points used by the solver.
double bellman_sweep(const BellmanSweep& s);
double policy_eval_sweep(const PolicyEvalSweep& s);

} // namespace agesched::kernels
