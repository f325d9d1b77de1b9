#ifndef WISER_DETAIL_KERNEL_GLUE_HPP
#define WISER_DETAIL_KERNEL_GLUE_HPP

#include <algorithm>
#include <cstddef>

#include "wiser/kernels.hpp"

// Overload glue so templated numeric code can call the dispatch table
// without spelling out the dtype.

namespace wiser::detail {

using kernels::Backend;

inline const Backend& be() { return kernels::active(); }

inline void k_axpy(const Backend& b, double a, const float* x, double* y, std::size_t n) {
    b.axpy_f32(a, x, y, n);
}
inline void k_axpy(const Backend& b, double a, const double* x, double* y, std::size_t n) {
    b.axpy_f64(a, x, y, n);
}
inline void k_axpy_x2(const Backend& b, double a, const float* x, double* y, std::size_t n) {
    b.axpy_x2_f32(a, x, y, n);
}
inline void k_axpy_x2(const Backend& b, double a, const double* x, double* y, std::size_t n) {
    b.axpy_x2_f64(a, x, y, n);
}
inline void k_axpy_xs(double a, const float* x, std::size_t xs, double* y, std::size_t n) {
    kernels::axpy_xs_f32(a, x, xs, y, n);
}
inline void k_axpy_xs(double a, const double* x, std::size_t xs, double* y, std::size_t n) {
    kernels::axpy_xs_f64(a, x, xs, y, n);
}
inline void k_axpy_y2(const Backend& b, double a, const float* x, double* y, std::size_t n) {
    b.axpy_y2_f32(a, x, y, n);
}
inline void k_axpy_y2(const Backend& b, double a, const double* x, double* y, std::size_t n) {
    b.axpy_y2_f64(a, x, y, n);
}
inline void k_axpy_ys(double a, const float* x, double* y, std::size_t ys, std::size_t n) {
    kernels::axpy_ys_f32(a, x, y, ys, n);
}
inline void k_axpy_ys(double a, const double* x, double* y, std::size_t ys, std::size_t n) {
    kernels::axpy_ys_f64(a, x, y, ys, n);
}
inline double k_dot(const Backend& b, const float* x, const float* y, std::size_t n) {
    return b.dot_f32(x, y, n);
}
inline double k_dot(const Backend& b, const double* x, const double* y, std::size_t n) {
    return b.dot_f64(x, y, n);
}
inline double k_dot_x2(const Backend& b, const float* x, const float* y, std::size_t n) {
    return b.dot_x2_f32(x, y, n);
}
inline double k_dot_x2(const Backend& b, const double* x, const double* y, std::size_t n) {
    return b.dot_x2_f64(x, y, n);
}
inline double k_dot_xs(const float* x, std::size_t xs, const float* y, std::size_t n) {
    return kernels::dot_xs_f32(x, xs, y, n);
}
inline double k_dot_xs(const double* x, std::size_t xs, const double* y, std::size_t n) {
    return kernels::dot_xs_f64(x, xs, y, n);
}
inline double k_sum(const Backend& b, const float* x, std::size_t n) { return b.sum_f32(x, n); }
inline double k_sum(const Backend& b, const double* x, std::size_t n) { return b.sum_f64(x, n); }
inline double k_sumsq_shifted(const Backend& b, const float* x, double s, std::size_t n) {
    return b.sumsq_shifted_f32(x, s, n);
}
inline double k_sumsq_shifted(const Backend& b, const double* x, double s, std::size_t n) {
    return b.sumsq_shifted_f64(x, s, n);
}
inline void k_affine(const Backend& b, const float* x, float* y, float sc, float sh,
                     std::size_t n) {
    b.affine_f32(x, y, sc, sh, n);
}
inline void k_affine(const Backend& b, const double* x, double* y, double sc, double sh,
                     std::size_t n) {
    b.affine_f64(x, y, sc, sh, n);
}
inline void k_lincomb2(const Backend& b, const float* g, const float* x, float* out, float pa,
                       float pb, float pc, std::size_t n) {
    b.lincomb2_f32(g, x, out, pa, pb, pc, n);
}
inline void k_lincomb2(const Backend& b, const double* g, const double* x, double* out, double pa,
                       double pb, double pc, std::size_t n) {
    b.lincomb2_f64(g, x, out, pa, pb, pc, n);
}
inline void k_cast(const Backend& b, const double* x, float* y, std::size_t n) {
    b.cast_f64_f32(x, y, n);
}
inline void k_cast(const Backend&, const double* x, double* y, std::size_t n) {
    std::copy(x, x + n, y);
}
inline void k_sgd(const Backend& b, float* p, float* v, const float* g, float lr, float mom,
                  float wd, std::size_t n) {
    b.sgd_f32(p, v, g, lr, mom, wd, n);
}
inline void k_sgd(const Backend& b, double* p, double* v, const double* g, double lr, double mom,
                  double wd, std::size_t n) {
    b.sgd_f64(p, v, g, lr, mom, wd, n);
}
inline void k_axpy2d(const Backend& b, double a, const float* x, std::size_t xrs, std::size_t xis,
                     double* y, std::size_t yrs, std::size_t yis, std::size_t rows,
                     std::size_t n) {
    b.axpy2d_f32(a, x, xrs, xis, y, yrs, yis, rows, n);
}
inline void k_axpy2d(const Backend& b, double a, const double* x, std::size_t xrs,
                     std::size_t xis, double* y, std::size_t yrs, std::size_t yis,
                     std::size_t rows, std::size_t n) {
    b.axpy2d_f64(a, x, xrs, xis, y, yrs, yis, rows, n);
}
inline double k_dot2d(const Backend& b, const float* x, std::size_t xrs, std::size_t xis,
                      const float* g, std::size_t grs, std::size_t rows, std::size_t n) {
    return b.dot2d_f32(x, xrs, xis, g, grs, rows, n);
}
inline double k_dot2d(const Backend& b, const double* x, std::size_t xrs, std::size_t xis,
                      const double* g, std::size_t grs, std::size_t rows, std::size_t n) {
    return b.dot2d_f64(x, xrs, xis, g, grs, rows, n);
}

}  // namespace wiser::detail

#endif
