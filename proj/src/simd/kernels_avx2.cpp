#include "lmcurv/simd/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define LMCURV_X86 1
#endif

namespace lmcurv::kernels {

#ifdef LMCURV_X86

namespace {

__attribute__((target("avx2,fma"))) inline double hsum(__m256d x) {
    __m128d lo = _mm256_castpd256_pd128(x);
    __m128d hi = _mm256_extractf128_pd(x, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

}  // namespace

__attribute__((target("avx2,fma"))) double weighted_dot_avx2(const double* w, const double* a,
                                                             const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + j), _mm256_loadu_pd(a + j));
        __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + j + 4), _mm256_loadu_pd(a + j + 4));
        acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(b + j), acc0);
        acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(b + j + 4), acc1);
    }
    for (; j + 4 <= n; j += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(w + j), _mm256_loadu_pd(a + j));
        acc0 = _mm256_fmadd_pd(p, _mm256_loadu_pd(b + j), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) s += w[j] * a[j] * b[j];
    return s;
}

__attribute__((target("avx2,fma"))) double psi_sum_avx2(const double* w, const double* v,
                                                        std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d x = _mm256_loadu_pd(v + j);
        __m256d c = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_sub_pd(one, x), _mm256_add_pd(one, x)));
        __m256d num = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(w + j), x), x);
        acc = _mm256_add_pd(acc, _mm256_div_pd(num, _mm256_add_pd(one, c)));
    }
    double s = hsum(acc);
    for (; j < n; ++j) {
        const double c = std::sqrt((1.0 - v[j]) * (1.0 + v[j]));
        s += w[j] * v[j] * v[j] / (1.0 + c);
    }
    return s;
}

__attribute__((target("avx2,fma"))) void riesz_step_avx2(const double* v, const double* g,
                                                         const double* w, double tau, double* out,
                                                         std::size_t n) {
    const __m256d t = _mm256_set1_pd(tau);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d q = _mm256_div_pd(_mm256_loadu_pd(g + j), _mm256_loadu_pd(w + j));
        // v - tau*q, rounded as the scalar path (no fused contraction)
        __m256d r = _mm256_sub_pd(_mm256_loadu_pd(v + j), _mm256_mul_pd(t, q));
        _mm256_storeu_pd(out + j, r);
    }
    for (; j < n; ++j) out[j] = v[j] - tau * (g[j] / w[j]);
}

__attribute__((target("avx2,fma"))) void axpy_avx2(const double* a, double s, const double* b,
                                                   double* out, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d r = _mm256_add_pd(_mm256_loadu_pd(a + j), _mm256_mul_pd(sv, _mm256_loadu_pd(b + j)));
        _mm256_storeu_pd(out + j, r);
    }
    for (; j < n; ++j) out[j] = a[j] + s * b[j];
}

__attribute__((target("avx2,fma"))) double max_abs_avx2(const double* v, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d m = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) m = _mm256_max_pd(m, _mm256_and_pd(mask, _mm256_loadu_pd(v + j)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
    for (; j < n; ++j) r = std::fmax(r, std::fabs(v[j]));
    return r;
}

bool avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else

double weighted_dot_avx2(const double* w, const double* a, const double* b, std::size_t n) {
    return weighted_dot_scalar(w, a, b, n);
}
double psi_sum_avx2(const double* w, const double* v, std::size_t n) { return psi_sum_scalar(w, v, n); }
void riesz_step_avx2(const double* v, const double* g, const double* w, double tau, double* out,
                     std::size_t n) {
    riesz_step_scalar(v, g, w, tau, out, n);
}
void axpy_avx2(const double* a, double s, const double* b, double* out, std::size_t n) {
    axpy_scalar(a, s, b, out, n);
}
double max_abs_avx2(const double* v, std::size_t n) { return max_abs_scalar(v, n); }
bool avx2_available() { return false; }

#endif

}  // namespace lmcurv::kernels
