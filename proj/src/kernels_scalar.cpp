#include "wiser/kernels.hpp"

#include <cmath>

// Reference backend. Every other backend must reproduce these results
// bit for bit; see the contract notes in kernels.hpp.

namespace wiser::kernels {
namespace {

void axpy_f32(double a, const float* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, static_cast<double>(x[i]), y[i]);
}

void axpy_f64(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpy_x2_f32(double a, const float* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, static_cast<double>(x[2 * i]), y[i]);
}

void axpy_x2_f64(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[2 * i], y[i]);
}

void axpy_y2_f32(double a, const float* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[2 * i] = std::fma(a, static_cast<double>(x[i]), y[2 * i]);
}

void axpy_y2_f64(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[2 * i] = std::fma(a, x[i], y[2 * i]);
}

inline double reduce4(const double* acc) { return (acc[0] + acc[2]) + (acc[1] + acc[3]); }

double dot_f32(const float* x, const float* y, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i)
        acc[i & 3] = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), acc[i & 3]);
    return reduce4(acc);
}

double dot_f64(const double* x, const double* y, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) acc[i & 3] = std::fma(x[i], y[i], acc[i & 3]);
    return reduce4(acc);
}

double dot_x2_f32(const float* x, const float* y, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i)
        acc[i & 3] = std::fma(static_cast<double>(x[2 * i]), static_cast<double>(y[i]), acc[i & 3]);
    return reduce4(acc);
}

double dot_x2_f64(const double* x, const double* y, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) acc[i & 3] = std::fma(x[2 * i], y[i], acc[i & 3]);
    return reduce4(acc);
}

double sum_f32(const float* x, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) acc[i & 3] += static_cast<double>(x[i]);
    return reduce4(acc);
}

double sum_f64(const double* x, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) acc[i & 3] += x[i];
    return reduce4(acc);
}

double sumsq_shifted_f32(const float* x, double shift, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(x[i]) - shift;
        acc[i & 3] = std::fma(d, d, acc[i & 3]);
    }
    return reduce4(acc);
}

double sumsq_shifted_f64(const double* x, double shift, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - shift;
        acc[i & 3] = std::fma(d, d, acc[i & 3]);
    }
    return reduce4(acc);
}

void relu_f32(const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_f64(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void abs_f32(const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fabs(x[i]);
}

void abs_f64(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fabs(x[i]);
}

void relu_bwd_f32(const float* x, const float* g, float* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? g[i] : 0.0f;
}

void relu_bwd_f64(const double* x, const double* g, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void abs_bwd_f32(const float* x, const float* g, float* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? g[i] : (x[i] < 0.0f ? -g[i] : 0.0f);
}

void abs_bwd_f64(const double* x, const double* g, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
}

void affine_f32(const float* x, float* y, float scale, float shift, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fmaf(x[i], scale, shift);
}

void affine_f64(const double* x, double* y, double scale, double shift, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(x[i], scale, shift);
}

void lincomb2_f32(const float* g, const float* x, float* out, float a, float b, float c,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::fmaf(a, g[i], std::fmaf(b, x[i], c));
}

void lincomb2_f64(const double* g, const double* x, double* out, double a, double b, double c,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(a, g[i], std::fma(b, x[i], c));
}

void cast_f64_f32(const double* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<float>(x[i]);
}

void sgd_f32(float* p, float* v, const float* g, float lr, float mom, float wd, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const float t = std::fmaf(wd, p[i], g[i]);
        v[i] = std::fmaf(mom, v[i], -(lr * t));
        p[i] += v[i];
    }
}

void sgd_f64(double* p, double* v, const double* g, double lr, double mom, double wd,
             std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::fma(wd, p[i], g[i]);
        v[i] = std::fma(mom, v[i], -(lr * t));
        p[i] += v[i];
    }
}

template <typename T>
void axpy2d_impl(void (*row1)(double, const T*, double*, std::size_t),
                 void (*row_x2)(double, const T*, double*, std::size_t),
                 void (*row_y2)(double, const T*, double*, std::size_t), double a, const T* x,
                 std::size_t xrs, std::size_t xis, double* y, std::size_t yrs, std::size_t yis,
                 std::size_t rows, std::size_t n) {
    if (xis == 1 && yis == 1) {
        for (std::size_t r = 0; r < rows; ++r) row1(a, x + r * xrs, y + r * yrs, n);
    } else if (xis == 2 && yis == 1) {
        for (std::size_t r = 0; r < rows; ++r) row_x2(a, x + r * xrs, y + r * yrs, n);
    } else if (xis == 1 && yis == 2) {
        for (std::size_t r = 0; r < rows; ++r) row_y2(a, x + r * xrs, y + r * yrs, n);
    } else {
        for (std::size_t r = 0; r < rows; ++r) {
            const T* xr = x + r * xrs;
            double* yr = y + r * yrs;
            for (std::size_t i = 0; i < n; ++i)
                yr[i * yis] = std::fma(a, static_cast<double>(xr[i * xis]), yr[i * yis]);
        }
    }
}

void axpy2d_f32(double a, const float* x, std::size_t xrs, std::size_t xis, double* y,
                std::size_t yrs, std::size_t yis, std::size_t rows, std::size_t n) {
    axpy2d_impl<float>(axpy_f32, axpy_x2_f32, axpy_y2_f32, a, x, xrs, xis, y, yrs, yis, rows, n);
}

void axpy2d_f64(double a, const double* x, std::size_t xrs, std::size_t xis, double* y,
                std::size_t yrs, std::size_t yis, std::size_t rows, std::size_t n) {
    axpy2d_impl<double>(axpy_f64, axpy_x2_f64, axpy_y2_f64, a, x, xrs, xis, y, yrs, yis, rows, n);
}

double dot2d_f32(const float* x, std::size_t xrs, std::size_t xis, const float* g,
                 std::size_t grs, std::size_t rows, std::size_t n) {
    double total = 0.0;
    if (xis == 1) {
        for (std::size_t r = 0; r < rows; ++r) total += dot_f32(x + r * xrs, g + r * grs, n);
    } else if (xis == 2) {
        for (std::size_t r = 0; r < rows; ++r) total += dot_x2_f32(x + r * xrs, g + r * grs, n);
    } else {
        for (std::size_t r = 0; r < rows; ++r)
            total += wiser::kernels::dot_xs_f32(x + r * xrs, xis, g + r * grs, n);
    }
    return total;
}

double dot2d_f64(const double* x, std::size_t xrs, std::size_t xis, const double* g,
                 std::size_t grs, std::size_t rows, std::size_t n) {
    double total = 0.0;
    if (xis == 1) {
        for (std::size_t r = 0; r < rows; ++r) total += dot_f64(x + r * xrs, g + r * grs, n);
    } else if (xis == 2) {
        for (std::size_t r = 0; r < rows; ++r) total += dot_x2_f64(x + r * xrs, g + r * grs, n);
    } else {
        for (std::size_t r = 0; r < rows; ++r)
            total += wiser::kernels::dot_xs_f64(x + r * xrs, xis, g + r * grs, n);
    }
    return total;
}

const Backend kScalar = {
    "scalar",
    axpy_f32, axpy_f64, axpy_x2_f32, axpy_x2_f64, axpy_y2_f32, axpy_y2_f64,
    dot_f32, dot_f64, dot_x2_f32, dot_x2_f64,
    sum_f32, sum_f64, sumsq_shifted_f32, sumsq_shifted_f64,
    relu_f32, relu_f64, abs_f32, abs_f64,
    relu_bwd_f32, relu_bwd_f64, abs_bwd_f32, abs_bwd_f64,
    affine_f32, affine_f64, lincomb2_f32, lincomb2_f64,
    cast_f64_f32, sgd_f32, sgd_f64,
    axpy2d_f32, axpy2d_f64, dot2d_f32, dot2d_f64,
};

}  // namespace

const Backend& scalar_backend() { return kScalar; }

void axpy_xs_f32(double a, const float* x, std::size_t xs, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, static_cast<double>(x[i * xs]), y[i]);
}

void axpy_xs_f64(double a, const double* x, std::size_t xs, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i * xs], y[i]);
}

void axpy_ys_f32(double a, const float* x, double* y, std::size_t ys, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i * ys] = std::fma(a, static_cast<double>(x[i]), y[i * ys]);
}

void axpy_ys_f64(double a, const double* x, double* y, std::size_t ys, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i * ys] = std::fma(a, x[i], y[i * ys]);
}

double dot_xs_f32(const float* x, std::size_t xs, const float* y, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i)
        acc[i & 3] = std::fma(static_cast<double>(x[i * xs]), static_cast<double>(y[i]), acc[i & 3]);
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double dot_xs_f64(const double* x, std::size_t xs, const double* y, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) acc[i & 3] = std::fma(x[i * xs], y[i], acc[i & 3]);
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

}  // namespace wiser::kernels
