#pragma once
#include <cstddef>

// Data-parallel inner loops used by the energy and solver code.
// Each kernel has a scalar reference and an AVX2 variant; the public entry
// point dispatches on the CPU at first use.
namespace lmcurv::kernels {

enum class Backend { scalar, avx2 };

// sum_j w_j a_j b_j
double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n);
double weighted_dot_avx2(const double* w, const double* a, const double* b, std::size_t n);

// sum_j w_j (1 - sqrt(1 - v_j^2)), evaluated as w v^2 / (1 + sqrt((1-v)(1+v)))
double psi_sum_scalar(const double* w, const double* v, std::size_t n);
double psi_sum_avx2(const double* w, const double* v, std::size_t n);

// out_j = v_j - tau * g_j / w_j
void riesz_step_scalar(const double* v, const double* g, const double* w, double tau, double* out,
                       std::size_t n);
void riesz_step_avx2(const double* v, const double* g, const double* w, double tau, double* out,
                     std::size_t n);

// out_j = a_j + s * b_j
void axpy_scalar(const double* a, double s, const double* b, double* out, std::size_t n);
void axpy_avx2(const double* a, double s, const double* b, double* out, std::size_t n);

double max_abs_scalar(const double* v, std::size_t n);
double max_abs_avx2(const double* v, std::size_t n);

bool avx2_available();
Backend active_backend();
// Tests use this to pin a backend; passing avx2 on a machine without it is ignored.
void set_backend(Backend b);

double weighted_dot(const double* w, const double* a, const double* b, std::size_t n);
double psi_sum(const double* w, const double* v, std::size_t n);
void riesz_step(const double* v, const double* g, const double* w, double tau, double* out,
                std::size_t n);
void axpy(const double* a, double s, const double* b, double* out, std::size_t n);
double max_abs(const double* v, std::size_t n);

}  // namespace lmcurv::kernels
