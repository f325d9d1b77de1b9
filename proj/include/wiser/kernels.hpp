#ifndef WISER_KERNELS_HPP
#define WISER_KERNELS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace wiser::kernels {

// Numeric inner-loop primitives behind a runtime-selected backend.
//
// Contract shared by every backend (scalar is the reference):
//  * accumulation is always double precision; float inputs are widened
//    lane-wise before any arithmetic,
//  * per-element updates use a single fused multiply-add,
//  * reductions use a fixed 4-lane tree: element i lands in lane (i & 3)
//    in index order, lanes combine as (l0 + l2) + (l1 + l3).
// Under these rules all backends produce bit-identical results, which the
// equivalence suite asserts exactly.
struct Backend {
    const char* name;

    // y[i] += a * x[i]
    void (*axpy_f32)(double a, const float* x, double* y, std::size_t n);
    void (*axpy_f64)(double a, const double* x, double* y, std::size_t n);
    // y[i] += a * x[2*i]
    void (*axpy_x2_f32)(double a, const float* x, double* y, std::size_t n);
    void (*axpy_x2_f64)(double a, const double* x, double* y, std::size_t n);
    // y[2*i] += a * x[i]
    void (*axpy_y2_f32)(double a, const float* x, double* y, std::size_t n);
    void (*axpy_y2_f64)(double a, const double* x, double* y, std::size_t n);

    // sum_i x[i]*y[i]
    double (*dot_f32)(const float* x, const float* y, std::size_t n);
    double (*dot_f64)(const double* x, const double* y, std::size_t n);
    // sum_i x[2*i]*y[i]
    double (*dot_x2_f32)(const float* x, const float* y, std::size_t n);
    double (*dot_x2_f64)(const double* x, const double* y, std::size_t n);

    double (*sum_f32)(const float* x, std::size_t n);
    double (*sum_f64)(const double* x, std::size_t n);
    // sum_i (x[i] - shift)^2
    double (*sumsq_shifted_f32)(const float* x, double shift, std::size_t n);
    double (*sumsq_shifted_f64)(const double* x, double shift, std::size_t n);

    // elementwise maps
    void (*relu_f32)(const float* x, float* y, std::size_t n);
    void (*relu_f64)(const double* x, double* y, std::size_t n);
    void (*abs_f32)(const float* x, float* y, std::size_t n);
    void (*abs_f64)(const double* x, double* y, std::size_t n);
    // dx[i] = g[i] * (x[i] > 0)
    void (*relu_bwd_f32)(const float* x, const float* g, float* dx, std::size_t n);
    void (*relu_bwd_f64)(const double* x, const double* g, double* dx, std::size_t n);
    // dx[i] = g[i] * sign(x[i]), sign(0) = 0
    void (*abs_bwd_f32)(const float* x, const float* g, float* dx, std::size_t n);
    void (*abs_bwd_f64)(const double* x, const double* g, double* dx, std::size_t n);

    // y[i] = fma(x[i], scale, shift)
    void (*affine_f32)(const float* x, float* y, float scale, float shift, std::size_t n);
    void (*affine_f64)(const double* x, double* y, double scale, double shift, std::size_t n);
    // out[i] = fma(a, g[i], fma(b, x[i], c))
    void (*lincomb2_f32)(const float* g, const float* x, float* out, float a, float b, float c,
                         std::size_t n);
    void (*lincomb2_f64)(const double* g, const double* x, double* out, double a, double b,
                         double c, std::size_t n);

    // narrowing copy of a double accumulator buffer
    void (*cast_f64_f32)(const double* x, float* y, std::size_t n);

    // momentum SGD: t = fma(wd, p, g); v = fma(mom, v, -(lr*t)); p += v
    void (*sgd_f32)(float* p, float* v, const float* g, float lr, float mom, float wd,
                    std::size_t n);
    void (*sgd_f64)(double* p, double* v, const double* g, double lr, double mom, double wd,
                    std::size_t n);

    // row-blocked forms of the axpy/dot families; per-element semantics are
    // identical to looping the single-row primitives over the rows
    // (inner strides 1 and 2 take the vector paths, others run scalar)
    void (*axpy2d_f32)(double a, const float* x, std::size_t x_row_stride,
                       std::size_t x_inner_stride, double* y, std::size_t y_row_stride,
                       std::size_t y_inner_stride, std::size_t rows, std::size_t n);
    void (*axpy2d_f64)(double a, const double* x, std::size_t x_row_stride,
                       std::size_t x_inner_stride, double* y, std::size_t y_row_stride,
                       std::size_t y_inner_stride, std::size_t rows, std::size_t n);
    // sum over rows of the per-row dot, x optionally strided
    double (*dot2d_f32)(const float* x, std::size_t x_row_stride, std::size_t x_inner_stride,
                        const float* g, std::size_t g_row_stride, std::size_t rows,
                        std::size_t n);
    double (*dot2d_f64)(const double* x, std::size_t x_row_stride, std::size_t x_inner_stride,
                        const double* g, std::size_t g_row_stride, std::size_t rows,
                        std::size_t n);
};

const Backend& scalar_backend();

// Backends usable on this machine, scalar first.
std::vector<const Backend*> available_backends();

// Active backend: best available, or the one named by WISER_KERNEL_BACKEND
// (scalar | avx2 | neon). Resolved once per process.
const Backend& active();

// Generic-stride scalar helpers for the cold paths (pool strides > 2).
void axpy_xs_f32(double a, const float* x, std::size_t xstride, double* y, std::size_t n);
void axpy_xs_f64(double a, const double* x, std::size_t xstride, double* y, std::size_t n);
void axpy_ys_f32(double a, const float* x, double* y, std::size_t ystride, std::size_t n);
void axpy_ys_f64(double a, const double* x, double* y, std::size_t ystride, std::size_t n);
double dot_xs_f32(const float* x, std::size_t xstride, const float* y, std::size_t n);
double dot_xs_f64(const double* x, std::size_t xstride, const double* y, std::size_t n);

}  // namespace wiser::kernels

#endif
