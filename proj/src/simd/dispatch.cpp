#include "lmcurv/simd/kernels.hpp"

#include <atomic>

namespace lmcurv::kernels {

namespace {

std::atomic<int>& backend_slot() {
    static std::atomic<int> slot{avx2_available() ? 1 : 0};
    return slot;
}

bool use_avx2() { return backend_slot().load(std::memory_order_relaxed) == 1; }

}  // namespace

Backend active_backend() { return use_avx2() ? Backend::avx2 : Backend::scalar; }

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_available()) return;
    backend_slot().store(b == Backend::avx2 ? 1 : 0, std::memory_order_relaxed);
}

double weighted_dot(const double* w, const double* a, const double* b, std::size_t n) {
    return use_avx2() ? weighted_dot_avx2(w, a, b, n) : weighted_dot_scalar(w, a, b, n);
}

double psi_sum(const double* w, const double* v, std::size_t n) {
    return use_avx2() ? psi_sum_avx2(w, v, n) : psi_sum_scalar(w, v, n);
}

void riesz_step(const double* v, const double* g, const double* w, double tau, double* out,
                std::size_t n) {
    if (use_avx2())
        riesz_step_avx2(v, g, w, tau, out, n);
    else
        riesz_step_scalar(v, g, w, tau, out, n);
}

void axpy(const double* a, double s, const double* b, double* out, std::size_t n) {
    if (use_avx2())
        axpy_avx2(a, s, b, out, n);
    else
        axpy_scalar(a, s, b, out, n);
}

double max_abs(const double* v, std::size_t n) {
    return use_avx2() ? max_abs_avx2(v, n) : max_abs_scalar(v, n);
}

}  // namespace lmcurv::kernels
