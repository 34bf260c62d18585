#include "lmcurv/simd/kernels.hpp"

#include <cmath>

namespace lmcurv::kernels {

double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[j] * a[j] * b[j];
    return s;
}

double psi_sum_scalar(const double* w, const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = std::sqrt((1.0 - v[j]) * (1.0 + v[j]));
        s += w[j] * v[j] * v[j] / (1.0 + c);
    }
    return s;
}

void riesz_step_scalar(const double* v, const double* g, const double* w, double tau, double* out,
                       std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = v[j] - tau * (g[j] / w[j]);
}

void axpy_scalar(const double* a, double s, const double* b, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = a[j] + s * b[j];
}

double max_abs_scalar(const double* v, std::size_t n) {
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m = std::fmax(m, std::fabs(v[j]));
    return m;
}

}  // namespace lmcurv::kernels
