#include <cmath>
#include <immintrin.h>

#include "agesched/kernels.hpp"

// AVX2 variants: four states per iteration, successor values fetched with
// 32-bit-index gathers. Mul/add only (no FMA) so every lane performs the
// same IEEE operations as the scalar reference.

namespace agesched::kernels {

namespace {

inline double horizontal_max(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m2 = _mm_max_pd(lo, hi);
    const __m128d m1 = _mm_max_sd(m2, _mm_unpackhi_pd(m2, m2));
    return _mm_cvtsd_f64(m1);
}

inline __m256d abs_pd(__m256d v) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign, v);
}

} // namespace

double bellman_sweep_avx2(const BellmanSweep& s) {
    const std::size_t n = s.v_in.size();
    const double* vin = s.v_in.data();
    const double gamma = s.gamma;
    const double lambda = s.lambda;
    const double p = s.success_prob;
    const double pc = 1.0 - p;

    const __m256d vgamma = _mm256_set1_pd(gamma);
    const __m256d vlambda = _mm256_set1_pd(lambda);
    const __m256d vp = _mm256_set1_pd(p);
    const __m256d vpc = _mm256_set1_pd(pc);
    __m256d vmax = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128i idx_age = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(s.succ_age.data() + i));
        const __m128i idx_reset = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(s.succ_reset.data() + i));
        const __m256d va = _mm256_i32gather_pd(vin, idx_age, 8);
        const __m256d vr = _mm256_i32gather_pd(vin, idx_reset, 8);
        const __m256d e = _mm256_loadu_pd(s.err.data() + i);

        const __m256d q0 = _mm256_add_pd(e, _mm256_mul_pd(vgamma, va));
        const __m256d mixed = _mm256_add_pd(_mm256_mul_pd(vp, vr),
                                            _mm256_mul_pd(vpc, va));
        const __m256d q1 = _mm256_add_pd(_mm256_add_pd(e, vlambda),
                                         _mm256_mul_pd(vgamma, mixed));
        const __m256d vn = _mm256_min_pd(q0, q1);
        _mm256_storeu_pd(s.v_out.data() + i, vn);

        const __m256d prev = _mm256_loadu_pd(vin + i);
        vmax = _mm256_max_pd(vmax, abs_pd(_mm256_sub_pd(vn, prev)));
    }

    double max_diff = horizontal_max(vmax);
    for (; i < n; ++i) {
        const double va = vin[static_cast<std::size_t>(s.succ_age[i])];
        const double vr = vin[static_cast<std::size_t>(s.succ_reset[i])];
        const double e = s.err[i];
        const double q0 = e + gamma * va;
        const double q1 = (e + lambda) + gamma * (p * vr + pc * va);
        const double vn = q0 < q1 ? q0 : q1;
        s.v_out[i] = vn;
        const double d = std::fabs(vn - vin[i]);
        if (d > max_diff) max_diff = d;
    }
    return max_diff;
}

double policy_eval_sweep_avx2(const PolicyEvalSweep& s) {
    const std::size_t n = s.u_in.size();
    const double* uin = s.u_in.data();
    const double gamma = s.gamma;
    const double p = s.success_prob;

    const __m256d vgamma = _mm256_set1_pd(gamma);
    const __m256d vp = _mm256_set1_pd(p);
    const __m256d vone = _mm256_set1_pd(1.0);
    __m256d vmax = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128i idx_age = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(s.succ_age.data() + i));
        const __m128i idx_reset = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(s.succ_reset.data() + i));
        const __m256d ua = _mm256_i32gather_pd(uin, idx_age, 8);
        const __m256d ur = _mm256_i32gather_pd(uin, idx_reset, 8);
        const __m256d a = _mm256_loadu_pd(s.act.data() + i);

        const __m256d pa = _mm256_mul_pd(vp, a);
        const __m256d mixed = _mm256_add_pd(
            _mm256_mul_pd(pa, ur),
            _mm256_mul_pd(_mm256_sub_pd(vone, pa), ua));
        const __m256d un = _mm256_add_pd(a, _mm256_mul_pd(vgamma, mixed));
        _mm256_storeu_pd(s.u_out.data() + i, un);

        const __m256d prev = _mm256_loadu_pd(uin + i);
        vmax = _mm256_max_pd(vmax, abs_pd(_mm256_sub_pd(un, prev)));
    }

    double max_diff = horizontal_max(vmax);
    for (; i < n; ++i) {
        const double ua = uin[static_cast<std::size_t>(s.succ_age[i])];
        const double ur = uin[static_cast<std::size_t>(s.succ_reset[i])];
        const double a = s.act[i];
        const double pa = p * a;
        const double un = a + gamma * (pa * ur + (1.0 - pa) * ua);
        s.u_out[i] = un;
        const double d = std::fabs(un - uin[i]);
        if (d > max_diff) max_diff = d;
    }
    return max_diff;
}

} // namespace agesched::kernels
