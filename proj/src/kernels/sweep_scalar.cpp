#include <cmath>

#include "agesched/kernels.hpp"

// Reference kernels. The AVX2 variants mirror this operation tree exactly;
// keep both in sync (equivalence is asserted bitwise in the test suite).

namespace agesched::kernels {

double bellman_sweep_scalar(const BellmanSweep& s) {
    const std::size_t n = s.v_in.size();
    const double gamma = s.gamma;
    const double lambda = s.lambda;
    const double p = s.success_prob;
    const double pc = 1.0 - p;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double va = s.v_in[static_cast<std::size_t>(s.succ_age[i])];
        const double vr = s.v_in[static_cast<std::size_t>(s.succ_reset[i])];
        const double e = s.err[i];
        const double q0 = e + gamma * va;
        const double q1 = (e + lambda) + gamma * (p * vr + pc * va);
        const double vn = q0 < q1 ? q0 : q1;
        s.v_out[i] = vn;
        const double d = std::fabs(vn - s.v_in[i]);
        if (d > max_diff) max_diff = d;
    }
    return max_diff;
}

double policy_eval_sweep_scalar(const PolicyEvalSweep& s) {
    const std::size_t n = s.u_in.size();
    const double gamma = s.gamma;
    const double p = s.success_prob;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ua = s.u_in[static_cast<std::size_t>(s.succ_age[i])];
        const double ur = s.u_in[static_cast<std::size_t>(s.succ_reset[i])];
        const double a = s.act[i];
        const double pa = p * a;
        const double un = a + gamma * (pa * ur + (1.0 - pa) * ua);
        s.u_out[i] = un;
        const double d = std::fabs(un - s.u_in[i]);
        if (d > max_diff) max_diff = d;
    }
    return max_diff;
}

} // namespace agesched::kernels
