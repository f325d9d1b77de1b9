// AVX2+FMA backend. Mirrors the scalar reference exactly: double-precision
// accumulation, one fused multiply-add per element, 4-lane reduction tree.
// Compiled only on x86-64; selected at runtime when the CPU supports it.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "wiser/kernels.hpp"

namespace wiser::kernels {
namespace {

inline __m256d widen_lo(__m256 v) { return _mm256_cvtps_pd(_mm256_castps256_ps128(v)); }
inline __m256d widen_hi(__m256 v) { return _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)); }

void axpy_f32(double a, const float* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        __m256d y0 = _mm256_loadu_pd(y + i);
        __m256d y1 = _mm256_loadu_pd(y + i + 4);
        y0 = _mm256_fmadd_pd(va, widen_lo(xv), y0);
        y1 = _mm256_fmadd_pd(va, widen_hi(xv), y1);
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
    }
    for (; i < n; ++i) y[i] = std::fma(a, static_cast<double>(x[i]), y[i]);
}

void axpy_f64(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_fmadd_pd(va, xv, _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

// even lanes of 8 consecutive floats: {x0, x2, x4, x6}
inline __m128 even_f32(const float* x) {
    const __m128 lo = _mm_loadu_ps(x);
    const __m128 hi = _mm_loadu_ps(x + 4);
    return _mm_shuffle_ps(lo, hi, _MM_SHUFFLE(2, 0, 2, 0));
}

// even lanes of 8 consecutive doubles: {x0, x2, x4, x6}
inline __m256d even_f64(const double* x) {
    const __m128d a = _mm_loadu_pd(x);
    const __m128d b = _mm_loadu_pd(x + 2);
    const __m128d c = _mm_loadu_pd(x + 4);
    const __m128d d = _mm_loadu_pd(x + 6);
    return _mm256_set_m128d(_mm_unpacklo_pd(c, d), _mm_unpacklo_pd(a, b));
}

void axpy_x2_f32(double a, const float* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    // the 8-wide even-lane load would touch x[2i+7], one past the strided
    // view's last element, so keep at least one scalar tail element
    for (; i + 5 <= n; i += 4) {
        const __m256d xv = _mm256_cvtps_pd(even_f32(x + 2 * i));
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, xv, _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] = std::fma(a, static_cast<double>(x[2 * i]), y[i]);
}

void axpy_x2_f64(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4) {
        const __m256d xv = even_f64(x + 2 * i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, xv, _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] = std::fma(a, x[2 * i], y[i]);
}

inline void store_even_f64(double* y, __m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    _mm_storel_pd(y + 0, lo);
    _mm_storeh_pd(y + 2, lo);
    _mm_storel_pd(y + 4, hi);
    _mm_storeh_pd(y + 6, hi);
}

void axpy_y2_f32(double a, const float* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4) {
        const __m256d xv = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
        store_even_f64(y + 2 * i, _mm256_fmadd_pd(va, xv, even_f64(y + 2 * i)));
    }
    for (; i < n; ++i) y[2 * i] = std::fma(a, static_cast<double>(x[i]), y[2 * i]);
}

void axpy_y2_f64(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        store_even_f64(y + 2 * i, _mm256_fmadd_pd(va, xv, even_f64(y + 2 * i)));
    }
    for (; i < n; ++i) y[2 * i] = std::fma(a, x[i], y[2 * i]);
}

// lane layout matches the scalar tree: element i sits in lane (i & 3)
double dot_f32(const float* x, const float* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
        const __m256d yv = _mm256_cvtps_pd(_mm_loadu_ps(y + i));
        acc = _mm256_fmadd_pd(xv, yv, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i)
        lanes[i & 3] = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_f64(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) lanes[i & 3] = std::fma(x[i], y[i], lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_x2_f32(const float* x, const float* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4) {
        const __m256d xv = _mm256_cvtps_pd(even_f32(x + 2 * i));
        const __m256d yv = _mm256_cvtps_pd(_mm_loadu_ps(y + i));
        acc = _mm256_fmadd_pd(xv, yv, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i)
        lanes[i & 3] =
            std::fma(static_cast<double>(x[2 * i]), static_cast<double>(y[i]), lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_x2_f64(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4)
        acc = _mm256_fmadd_pd(even_f64(x + 2 * i), _mm256_loadu_pd(y + i), acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) lanes[i & 3] = std::fma(x[2 * i], y[i], lanes[i & 3]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sum_f32(const float* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm_loadu_ps(x + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) lanes[i & 3] += static_cast<double>(x[i]);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sum_f64(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) lanes[i & 3] += x[i];
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sumsq_shifted_f32(const float* x, double shift, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(x + i)), vs);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) {
        const double d = static_cast<double>(x[i]) - shift;
        lanes[i & 3] = std::fma(d, d, lanes[i & 3]);
    }
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double sumsq_shifted_f64(const double* x, double shift, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vs);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) {
        const double d = x[i] - shift;
        lanes[i & 3] = std::fma(d, d, lanes[i & 3]);
    }
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

void relu_f32(const float* x, float* y, std::size_t n) {
    const __m256 z = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), z));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_f64(const double* x, double* y, std::size_t n) {
    const __m256d z = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), z));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void abs_f32(const float* x, float* y, std::size_t n) {
    const __m256 mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_and_ps(_mm256_loadu_ps(x + i), mask));
    for (; i < n; ++i) y[i] = std::fabs(x[i]);
}

void abs_f64(const double* x, double* y, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_and_pd(_mm256_loadu_pd(x + i), mask));
    for (; i < n; ++i) y[i] = std::fabs(x[i]);
}

void relu_bwd_f32(const float* x, const float* g, float* dx, std::size_t n) {
    const __m256 z = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 m = _mm256_cmp_ps(_mm256_loadu_ps(x + i), z, _CMP_GT_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(m, _mm256_loadu_ps(g + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? g[i] : 0.0f;
}

void relu_bwd_f64(const double* x, const double* g, double* dx, std::size_t n) {
    const __m256d z = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(x + i), z, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i, _mm256_and_pd(m, _mm256_loadu_pd(g + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void abs_bwd_f32(const float* x, const float* g, float* dx, std::size_t n) {
    const __m256 z = _mm256_setzero_ps();
    const __m256 sign = _mm256_castsi256_ps(_mm256_set1_epi32(int(0x80000000u)));
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        const __m256 gv = _mm256_loadu_ps(g + i);
        const __m256 signed_g = _mm256_xor_ps(gv, _mm256_and_ps(xv, sign));
        const __m256 nz = _mm256_cmp_ps(xv, z, _CMP_NEQ_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(signed_g, nz));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? g[i] : (x[i] < 0.0f ? -g[i] : 0.0f);
}

void abs_bwd_f64(const double* x, const double* g, double* dx, std::size_t n) {
    const __m256d z = _mm256_setzero_pd();
    const __m256d sign = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ULL));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d gv = _mm256_loadu_pd(g + i);
        const __m256d signed_g = _mm256_xor_pd(gv, _mm256_and_pd(xv, sign));
        const __m256d nz = _mm256_cmp_pd(xv, z, _CMP_NEQ_OQ);
        _mm256_storeu_pd(dx + i, _mm256_and_pd(signed_g, nz));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
}

void affine_f32(const float* x, float* y, float scale, float shift, std::size_t n) {
    const __m256 vs = _mm256_set1_ps(scale);
    const __m256 vb = _mm256_set1_ps(shift);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(_mm256_loadu_ps(x + i), vs, vb));
    for (; i < n; ++i) y[i] = std::fmaf(x[i], scale, shift);
}

void affine_f64(const double* x, double* y, double scale, double shift, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(scale);
    const __m256d vb = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(x + i), vs, vb));
    for (; i < n; ++i) y[i] = std::fma(x[i], scale, shift);
}

void lincomb2_f32(const float* g, const float* x, float* out, float a, float b, float c,
                  std::size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    const __m256 vb = _mm256_set1_ps(b);
    const __m256 vc = _mm256_set1_ps(c);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 inner = _mm256_fmadd_ps(vb, _mm256_loadu_ps(x + i), vc);
        _mm256_storeu_ps(out + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(g + i), inner));
    }
    for (; i < n; ++i) out[i] = std::fmaf(a, g[i], std::fmaf(b, x[i], c));
}

void lincomb2_f64(const double* g, const double* x, double* out, double a, double b, double c,
                  std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d inner = _mm256_fmadd_pd(vb, _mm256_loadu_pd(x + i), vc);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(g + i), inner));
    }
    for (; i < n; ++i) out[i] = std::fma(a, g[i], std::fma(b, x[i], c));
}

void cast_f64_f32(const double* x, float* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm_storeu_ps(y + i, _mm256_cvtpd_ps(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = static_cast<float>(x[i]);
}

void sgd_f32(float* p, float* v, const float* g, float lr, float mom, float wd, std::size_t n) {
    const __m256 vlr = _mm256_set1_ps(lr);
    const __m256 vmom = _mm256_set1_ps(mom);
    const __m256 vwd = _mm256_set1_ps(wd);
    const __m256 sign = _mm256_castsi256_ps(_mm256_set1_epi32(int(0x80000000u)));
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 pv = _mm256_loadu_ps(p + i);
        const __m256 gv = _mm256_loadu_ps(g + i);
        const __m256 t = _mm256_fmadd_ps(vwd, pv, gv);
        const __m256 u = _mm256_xor_ps(_mm256_mul_ps(vlr, t), sign);
        const __m256 vv = _mm256_fmadd_ps(vmom, _mm256_loadu_ps(v + i), u);
        _mm256_storeu_ps(v + i, vv);
        _mm256_storeu_ps(p + i, _mm256_add_ps(pv, vv));
    }
    for (; i < n; ++i) {
        const float t = std::fmaf(wd, p[i], g[i]);
        v[i] = std::fmaf(mom, v[i], -(lr * t));
        p[i] += v[i];
    }
}

void sgd_f64(double* p, double* v, const double* g, double lr, double mom, double wd,
             std::size_t n) {
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d vmom = _mm256_set1_pd(mom);
    const __m256d vwd = _mm256_set1_pd(wd);
    const __m256d sign = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ULL));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d pv = _mm256_loadu_pd(p + i);
        const __m256d gv = _mm256_loadu_pd(g + i);
        const __m256d t = _mm256_fmadd_pd(vwd, pv, gv);
        const __m256d u = _mm256_xor_pd(_mm256_mul_pd(vlr, t), sign);
        const __m256d vv = _mm256_fmadd_pd(vmom, _mm256_loadu_pd(v + i), u);
        _mm256_storeu_pd(v + i, vv);
        _mm256_storeu_pd(p + i, _mm256_add_pd(pv, vv));
    }
    for (; i < n; ++i) {
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

const Backend* avx2_backend_impl() {
    static const Backend table = {
        "avx2",
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

#endif  // x86-64
