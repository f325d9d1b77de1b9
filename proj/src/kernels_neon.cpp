// NEON backend for aarch64. Same contract as the scalar reference:
// double-precision accumulation, fused multiply-adds, 4-lane reduction tree
// realised as two 2-lane registers (lanes {0,1} and {2,3}).

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "wiser/kernels.hpp"

namespace wiser::kernels {
namespace {

void axpy_f32(double a, const float* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t xv = vld1q_f32(x + i);
        float64x2_t y0 = vld1q_f64(y + i);
        float64x2_t y1 = vld1q_f64(y + i + 2);
        y0 = vfmaq_f64(y0, va, vcvt_f64_f32(vget_low_f32(xv)));
        y1 = vfmaq_f64(y1, va, vcvt_f64_f32(vget_high_f32(xv)));
        vst1q_f64(y + i, y0);
        vst1q_f64(y + i + 2, y1);
    }
    for (; i < n; ++i) y[i] = std::fma(a, static_cast<double>(x[i]), y[i]);
}

void axpy_f64(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpy_x2_f32(double a, const float* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    // vld2q touches x[2i+7], one past the strided view's last element, so
    // keep at least one scalar tail element
    for (; i + 5 <= n; i += 4) {
        const float32x4x2_t xp = vld2q_f32(x + 2 * i);  // xp.val[0] = even lanes
        float64x2_t y0 = vld1q_f64(y + i);
        float64x2_t y1 = vld1q_f64(y + i + 2);
        y0 = vfmaq_f64(y0, va, vcvt_f64_f32(vget_low_f32(xp.val[0])));
        y1 = vfmaq_f64(y1, va, vcvt_f64_f32(vget_high_f32(xp.val[0])));
        vst1q_f64(y + i, y0);
        vst1q_f64(y + i + 2, y1);
    }
    for (; i < n; ++i) y[i] = std::fma(a, static_cast<double>(x[2 * i]), y[i]);
}

void axpy_x2_f64(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 3 <= n; i += 2) {
        const float64x2x2_t xp = vld2q_f64(x + 2 * i);
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, xp.val[0]));
    }
    for (; i < n; ++i) y[i] = std::fma(a, x[2 * i], y[i]);
}

void axpy_y2_f32(double a, const float* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[2 * i] = std::fma(a, static_cast<double>(x[i]), y[2 * i]);
}

void axpy_y2_f64(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[2 * i] = std::fma(a, x[i], y[2 * i]);
}

inline double reduce4(float64x2_t a01, float64x2_t a23) {
    const double l0 = vgetq_lane_f64(a01, 0), l1 = vgetq_lane_f64(a01, 1);
    const double l2 = vgetq_lane_f64(a23, 0), l3 = vgetq_lane_f64(a23, 1);
    return (l0 + l2) + (l1 + l3);
}

double dot_f32(const float* x, const float* y, std::size_t n) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t xv = vld1q_f32(x + i);
        const float32x4_t yv = vld1q_f32(y + i);
        a01 = vfmaq_f64(a01, vcvt_f64_f32(vget_low_f32(xv)), vcvt_f64_f32(vget_low_f32(yv)));
        a23 = vfmaq_f64(a23, vcvt_f64_f32(vget_high_f32(xv)), vcvt_f64_f32(vget_high_f32(yv)));
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i)
        lanes[i & 3] = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_f64(const double* x, const double* y, std::size_t n) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a01 = vfmaq_f64(a01, vld1q_f64(x + i), vld1q_f64(y + i));
        a23 = vfmaq_f64(a23, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i) lanes[i & 3] = std::fma(x[i], y[i], lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_x2_f32(const float* x, const float* y, std::size_t n) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4) {
        const float32x4x2_t xp = vld2q_f32(x + 2 * i);
        const float32x4_t yv = vld1q_f32(y + i);
        a01 = vfmaq_f64(a01, vcvt_f64_f32(vget_low_f32(xp.val[0])),
                        vcvt_f64_f32(vget_low_f32(yv)));
        a23 = vfmaq_f64(a23, vcvt_f64_f32(vget_high_f32(xp.val[0])),
                        vcvt_f64_f32(vget_high_f32(yv)));
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i)
        lanes[i & 3] =
            std::fma(static_cast<double>(x[2 * i]), static_cast<double>(y[i]), lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_x2_f64(const double* x, const double* y, std::size_t n) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4) {
        const float64x2x2_t x0 = vld2q_f64(x + 2 * i);
        const float64x2x2_t x1 = vld2q_f64(x + 2 * i + 4);
        a01 = vfmaq_f64(a01, x0.val[0], vld1q_f64(y + i));
        a23 = vfmaq_f64(a23, x1.val[0], vld1q_f64(y + i + 2));
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i) lanes[i & 3] = std::fma(x[2 * i], y[i], lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sum_f32(const float* x, std::size_t n) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t xv = vld1q_f32(x + i);
        a01 = vaddq_f64(a01, vcvt_f64_f32(vget_low_f32(xv)));
        a23 = vaddq_f64(a23, vcvt_f64_f32(vget_high_f32(xv)));
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i) lanes[i & 3] += static_cast<double>(x[i]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sum_f64(const double* x, std::size_t n) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a01 = vaddq_f64(a01, vld1q_f64(x + i));
        a23 = vaddq_f64(a23, vld1q_f64(x + i + 2));
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i) lanes[i & 3] += x[i];
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sumsq_shifted_f32(const float* x, double shift, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(shift);
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t xv = vld1q_f32(x + i);
        const float64x2_t d0 = vsubq_f64(vcvt_f64_f32(vget_low_f32(xv)), vs);
        const float64x2_t d1 = vsubq_f64(vcvt_f64_f32(vget_high_f32(xv)), vs);
        a01 = vfmaq_f64(a01, d0, d0);
        a23 = vfmaq_f64(a23, d1, d1);
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i) {
        const double d = static_cast<double>(x[i]) - shift;
        lanes[i & 3] = std::fma(d, d, lanes[i & 3]);
    }
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sumsq_shifted_f64(const double* x, double shift, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(shift);
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(x + i), vs);
        const float64x2_t d1 = vsubq_f64(vld1q_f64(x + i + 2), vs);
        a01 = vfmaq_f64(a01, d0, d0);
        a23 = vfmaq_f64(a23, d1, d1);
    }
    double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                       vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
    for (; i < n; ++i) {
        const double d = x[i] - shift;
        lanes[i & 3] = std::fma(d, d, lanes[i & 3]);
    }
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

void relu_f32(const float* x, float* y, std::size_t n) {
    const float32x4_t z = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmaxq_f32(vld1q_f32(x + i), z));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_f64(const double* x, double* y, std::size_t n) {
    const float64x2_t z = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmaxq_f64(vld1q_f64(x + i), z));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void abs_f32(const float* x, float* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vabsq_f32(vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] = std::fabs(x[i]);
}

void abs_f64(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vabsq_f64(vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = std::fabs(x[i]);
}

void relu_bwd_f32(const float* x, const float* g, float* dx, std::size_t n) {
    const float32x4_t z = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const uint32x4_t m = vcgtq_f32(vld1q_f32(x + i), z);
        vst1q_f32(dx + i, vreinterpretq_f32_u32(vandq_u32(
                              m, vreinterpretq_u32_f32(vld1q_f32(g + i)))));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? g[i] : 0.0f;
}

void relu_bwd_f64(const double* x, const double* g, double* dx, std::size_t n) {
    const float64x2_t z = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const uint64x2_t m = vcgtq_f64(vld1q_f64(x + i), z);
        vst1q_f64(dx + i, vreinterpretq_f64_u64(vandq_u64(
                              m, vreinterpretq_u64_f64(vld1q_f64(g + i)))));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void abs_bwd_f32(const float* x, const float* g, float* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dx[i] = x[i] > 0.0f ? g[i] : (x[i] < 0.0f ? -g[i] : 0.0f);
}

void abs_bwd_f64(const double* x, const double* g, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
}

void affine_f32(const float* x, float* y, float scale, float shift, std::size_t n) {
    const float32x4_t vs = vdupq_n_f32(scale);
    const float32x4_t vb = vdupq_n_f32(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vfmaq_f32(vb, vld1q_f32(x + i), vs));
    for (; i < n; ++i) y[i] = std::fmaf(x[i], scale, shift);
}

void affine_f64(const double* x, double* y, double scale, double shift, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(scale);
    const float64x2_t vb = vdupq_n_f64(shift);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vb, vld1q_f64(x + i), vs));
    for (; i < n; ++i) y[i] = std::fma(x[i], scale, shift);
}

void lincomb2_f32(const float* g, const float* x, float* out, float a, float b, float c,
                  std::size_t n) {
    const float32x4_t va = vdupq_n_f32(a);
    const float32x4_t vb = vdupq_n_f32(b);
    const float32x4_t vc = vdupq_n_f32(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t inner = vfmaq_f32(vc, vb, vld1q_f32(x + i));
        vst1q_f32(out + i, vfmaq_f32(inner, va, vld1q_f32(g + i)));
    }
    for (; i < n; ++i) out[i] = std::fmaf(a, g[i], std::fmaf(b, x[i], c));
}

void lincomb2_f64(const double* g, const double* x, double* out, double a, double b, double c,
                  std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    const float64x2_t vb = vdupq_n_f64(b);
    const float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t inner = vfmaq_f64(vc, vb, vld1q_f64(x + i));
        vst1q_f64(out + i, vfmaq_f64(inner, va, vld1q_f64(g + i)));
    }
    for (; i < n; ++i) out[i] = std::fma(a, g[i], std::fma(b, x[i], c));
}

void cast_f64_f32(const double* x, float* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1_f32(y + i, vcvt_f32_f64(vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = static_cast<float>(x[i]);
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

}  // namespace

const Backend* neon_backend_impl() {
    static const Backend table = {
        "neon",
        axpy_f32, axpy_f64, axpy_x2_f32, axpy_x2_f64, axpy_y2_f32, axpy_y2_f64,
        dot_f32, dot_f64, dot_x2_f32, dot_x2_f64,
        sum_f32, sum_f64, sumsq_shifted_f32, sumsq_shifted_f64,
        relu_f32, relu_f64, abs_f32, abs_f64,
        relu_bwd_f32, relu_bwd_f64, abs_bwd_f32, abs_bwd_f64,
        affine_f32, affine_f64, lincomb2_f32, lincomb2_f64,
        cast_f64_f32, sgd_f32, sgd_f64,
        axpy2d_f32, axpy2d_f64, dot2d_f32, dot2d_f64,
    };
    return &table;
}

}  // namespace wiser::kernels

#endif  // __aarch64__
