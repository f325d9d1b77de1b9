#include "wiser/conv.hpp"

#include <algorithm>
#include <cmath>

#include "wiser/detail/kernel_glue.hpp"

namespace wiser {

namespace {

using namespace wiser::detail;

struct TapRange {
    long lo = 0, hi = -1;  // inclusive output-index range; empty when hi < lo
};

// output indices o with 0 <= o*stride + d - padding < in_extent
inline TapRange tap_range(long in_extent, long out_extent, long stride, long padding, long d) {
    TapRange r;
    const long off = d - padding;
    r.lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
    r.hi = std::min<long>(out_extent - 1, (in_extent - 1 - off) / stride);
    return r;
}

// acc[r',c'] += w * in[r'*s + di - p, c'*s + dj - p] over the valid window
template <typename T>
void tap_accumulate(const T* in, long in_h, long in_w, double w, long di, long dj, long stride,
                    long padding, double* acc, long out_h, long out_w) {
    const TapRange rr = tap_range(in_h, out_h, stride, padding, di);
    const TapRange cr = tap_range(in_w, out_w, stride, padding, dj);
    if (rr.hi < rr.lo || cr.hi < cr.lo) return;
    const long n = cr.hi - cr.lo + 1;
    const long r0 = rr.lo * stride + di - padding;
    const long c0 = cr.lo * stride + dj - padding;
    k_axpy2d(be(), w, in + r0 * in_w + c0, static_cast<std::size_t>(stride * in_w),
             static_cast<std::size_t>(stride), acc + rr.lo * out_w + cr.lo,
             static_cast<std::size_t>(out_w), 1, static_cast<std::size_t>(rr.hi - rr.lo + 1),
             static_cast<std::size_t>(n));
}

// d_in[r'*s + di - p, c'*s + dj - p] += w * g[r',c'] (adjoint of tap_accumulate)
template <typename T>
void tap_scatter(const T* g, long out_h, long out_w, double w, long di, long dj, long stride,
                 long padding, double* d_in, long in_h, long in_w) {
    const TapRange rr = tap_range(in_h, out_h, stride, padding, di);
    const TapRange cr = tap_range(in_w, out_w, stride, padding, dj);
    if (rr.hi < rr.lo || cr.hi < cr.lo) return;
    const long n = cr.hi - cr.lo + 1;
    const long r0 = rr.lo * stride + di - padding;
    const long c0 = cr.lo * stride + dj - padding;
    k_axpy2d(be(), w, g + rr.lo * out_w + cr.lo, static_cast<std::size_t>(out_w), 1,
             d_in + r0 * in_w + c0, static_cast<std::size_t>(stride * in_w),
             static_cast<std::size_t>(stride), static_cast<std::size_t>(rr.hi - rr.lo + 1),
             static_cast<std::size_t>(n));
}

// sum over the valid window of g[r',c'] * in[r'*s+di-p, c'*s+dj-p]
template <typename T>
double tap_correlate(const T* g, long out_h, long out_w, const T* in, long in_h, long in_w,
                     long di, long dj, long stride, long padding) {
    const TapRange rr = tap_range(in_h, out_h, stride, padding, di);
    const TapRange cr = tap_range(in_w, out_w, stride, padding, dj);
    if (rr.hi < rr.lo || cr.hi < cr.lo) return 0.0;
    const long n = cr.hi - cr.lo + 1;
    const long r0 = rr.lo * stride + di - padding;
    const long c0 = cr.lo * stride + dj - padding;
    return k_dot2d(be(), in + r0 * in_w + c0, static_cast<std::size_t>(stride * in_w),
                   static_cast<std::size_t>(stride), g + rr.lo * out_w + cr.lo,
                   static_cast<std::size_t>(out_w), static_cast<std::size_t>(rr.hi - rr.lo + 1),
                   static_cast<std::size_t>(n));
}

template <typename T>
void check_conv_shapes(const Tensor<T>& input, const Tensor<T>& weights, const ConvSpec& spec,
                       bool channelwise) {
    if (input.rank() != 3) throw ShapeMismatch("conv input must be [J,H,W]");
    if (weights.rank() != 4) throw ShapeMismatch("conv weights must be rank 4");
    if (input.extent(0) != spec.in_channels) throw ShapeMismatch("input channel count");
    const std::size_t dim0 = channelwise ? spec.in_channels : spec.out_channels;
    const std::size_t dim1 = channelwise ? spec.out_channels : spec.in_channels;
    if (weights.extent(0) != dim0 || weights.extent(1) != dim1 ||
        weights.extent(2) != spec.kernel_h || weights.extent(3) != spec.kernel_w)
        throw ShapeMismatch("weight extents do not match spec");
}

}  // namespace

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t padding) {
    if (stride == 0) throw ShapeMismatch("stride must be positive");
    if (in + 2 * padding < kernel) throw ShapeMismatch("kernel larger than padded input");
    return (in + 2 * padding - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d_normal(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>* bias,
                        const ConvSpec& spec) {
    check_conv_shapes(input, weights, spec, false);
    if (bias && bias->size() != spec.out_channels) throw ShapeMismatch("bias extent");
    const long H = static_cast<long>(input.extent(1)), W = static_cast<long>(input.extent(2));
    const std::size_t oh = conv_out_extent(H, spec.kernel_h, spec.stride, spec.padding);
    const std::size_t ow = conv_out_extent(W, spec.kernel_w, spec.stride, spec.padding);
    Tensor<T> out({spec.out_channels, oh, ow});
    std::vector<double> acc(oh * ow);

    for (std::size_t k = 0; k < spec.out_channels; ++k) {
        std::fill(acc.begin(), acc.end(), bias ? static_cast<double>((*bias)[k]) : 0.0);
        for (std::size_t j = 0; j < spec.in_channels; ++j) {
            const T* in = input.data() + j * H * W;
            const T* wbase =
                weights.data() + (k * spec.in_channels + j) * spec.kernel_h * spec.kernel_w;
            for (std::size_t di = 0; di < spec.kernel_h; ++di)
                for (std::size_t dj = 0; dj < spec.kernel_w; ++dj) {
                    const double w = static_cast<double>(wbase[di * spec.kernel_w + dj]);
                    if (w == 0.0) continue;
                    tap_accumulate(in, H, W, w, di, dj, spec.stride, spec.padding, acc.data(), oh,
                                   ow);
                }
        }
        k_cast(be(), acc.data(), out.data() + k * oh * ow, acc.size());
    }
    return out;
}

template <typename T>
Tensor<T> conv2d_channelwise(const Tensor<T>& input, const Tensor<T>& weights,
                             const ConvSpec& spec) {
    check_conv_shapes(input, weights, spec, true);
    const long H = static_cast<long>(input.extent(1)), W = static_cast<long>(input.extent(2));
    const std::size_t oh = conv_out_extent(H, spec.kernel_h, spec.stride, spec.padding);
    const std::size_t ow = conv_out_extent(W, spec.kernel_w, spec.stride, spec.padding);
    const std::size_t K = spec.out_channels;
    Tensor<T> out({spec.in_channels * K, oh, ow});
    std::vector<double> acc(oh * ow);

    for (std::size_t j = 0; j < spec.in_channels; ++j) {
        const T* in = input.data() + j * H * W;
        for (std::size_t k = 0; k < K; ++k) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const T* wbase = weights.data() + (j * K + k) * spec.kernel_h * spec.kernel_w;
            for (std::size_t di = 0; di < spec.kernel_h; ++di)
                for (std::size_t dj = 0; dj < spec.kernel_w; ++dj) {
                    const double w = static_cast<double>(wbase[di * spec.kernel_w + dj]);
                    if (w == 0.0) continue;
                    tap_accumulate(in, H, W, w, di, dj, spec.stride, spec.padding, acc.data(), oh,
                                   ow);
                }
            k_cast(be(), acc.data(), out.data() + (j * K + k) * oh * ow, acc.size());
        }
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_normal_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                    bool has_bias, const ConvSpec& spec,
                                    const Tensor<T>& grad_out, bool need_input_grad) {
    check_conv_shapes(input, weights, spec, false);
    const long H = static_cast<long>(input.extent(1)), W = static_cast<long>(input.extent(2));
    const long oh = static_cast<long>(grad_out.extent(1)), ow = static_cast<long>(grad_out.extent(2));
    if (grad_out.extent(0) != spec.out_channels) throw ShapeMismatch("grad_out channels");

    ConvGrads<T> g;
    g.input = Tensor<T>(input.shape());
    g.weights = Tensor<T>(weights.shape());
    if (has_bias) g.bias = Tensor<T>({spec.out_channels});

    const std::size_t ksz = spec.kernel_h * spec.kernel_w;
    std::vector<double> acc(static_cast<std::size_t>(H) * W);

    // weight and bias gradients
    for (std::size_t k = 0; k < spec.out_channels; ++k) {
        const T* go = grad_out.data() + k * oh * ow;
        if (has_bias) g.bias[k] = static_cast<T>(k_sum(be(), go, oh * ow));
        for (std::size_t j = 0; j < spec.in_channels; ++j) {
            const T* in = input.data() + j * H * W;
            T* dw = g.weights.data() + (k * spec.in_channels + j) * ksz;
            for (std::size_t di = 0; di < spec.kernel_h; ++di)
                for (std::size_t dj = 0; dj < spec.kernel_w; ++dj)
                    dw[di * spec.kernel_w + dj] = static_cast<T>(tap_correlate(
                        go, oh, ow, in, H, W, di, dj, spec.stride, spec.padding));
        }
    }

    // input gradient
    for (std::size_t j = 0; need_input_grad && j < spec.in_channels; ++j) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < spec.out_channels; ++k) {
            const T* go = grad_out.data() + k * oh * ow;
            const T* wbase = weights.data() + (k * spec.in_channels + j) * ksz;
            for (std::size_t di = 0; di < spec.kernel_h; ++di)
                for (std::size_t dj = 0; dj < spec.kernel_w; ++dj) {
                    const double w = static_cast<double>(wbase[di * spec.kernel_w + dj]);
                    if (w == 0.0) continue;
                    tap_scatter(go, oh, ow, w, di, dj, spec.stride, spec.padding, acc.data(), H, W);
                }
        }
        k_cast(be(), acc.data(), g.input.data() + j * H * W, acc.size());
    }
    return g;
}

template <typename T>
ConvGrads<T> conv2d_channelwise_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                         const ConvSpec& spec, const Tensor<T>& grad_out,
                                         bool need_input_grad) {
    check_conv_shapes(input, weights, spec, true);
    const long H = static_cast<long>(input.extent(1)), W = static_cast<long>(input.extent(2));
    const long oh = static_cast<long>(grad_out.extent(1)), ow = static_cast<long>(grad_out.extent(2));
    const std::size_t K = spec.out_channels;
    if (grad_out.extent(0) != spec.in_channels * K) throw ShapeMismatch("grad_out channels");

    ConvGrads<T> g;
    g.input = Tensor<T>(input.shape());
    g.weights = Tensor<T>(weights.shape());
    const std::size_t ksz = spec.kernel_h * spec.kernel_w;
    std::vector<double> acc(static_cast<std::size_t>(H) * W);

    for (std::size_t j = 0; j < spec.in_channels; ++j) {
        const T* in = input.data() + j * H * W;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const T* go = grad_out.data() + (j * K + k) * oh * ow;
            const T* wbase = weights.data() + (j * K + k) * ksz;
            T* dw = g.weights.data() + (j * K + k) * ksz;
            for (std::size_t di = 0; di < spec.kernel_h; ++di)
                for (std::size_t dj = 0; dj < spec.kernel_w; ++dj) {
                    dw[di * spec.kernel_w + dj] = static_cast<T>(tap_correlate(
                        go, oh, ow, in, H, W, di, dj, spec.stride, spec.padding));
                    const double w = static_cast<double>(wbase[di * spec.kernel_w + dj]);
                    if (need_input_grad && w != 0.0)
                        tap_scatter(go, oh, ow, w, di, dj, spec.stride, spec.padding, acc.data(),
                                    H, W);
                }
        }
        k_cast(be(), acc.data(), g.input.data() + j * H * W, acc.size());
    }
    return g;
}

template <typename T>
Tensor<T> avg_pool(const Tensor<T>& input, const PoolSpec& spec) {
    if (input.rank() != 3) throw ShapeMismatch("pool input must be [C,H,W]");
    const long H = static_cast<long>(input.extent(1)), W = static_cast<long>(input.extent(2));
    const std::size_t oh = conv_out_extent(H, spec.window, spec.stride, spec.padding);
    const std::size_t ow = conv_out_extent(W, spec.window, spec.stride, spec.padding);
    const std::size_t C = input.extent(0);
    const double w = 1.0 / (static_cast<double>(spec.window) * spec.window);
    Tensor<T> out({C, oh, ow});
    std::vector<double> acc(oh * ow);
    for (std::size_t c = 0; c < C; ++c) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const T* in = input.data() + c * H * W;
        for (std::size_t di = 0; di < spec.window; ++di)
            for (std::size_t dj = 0; dj < spec.window; ++dj)
                tap_accumulate(in, H, W, w, di, dj, spec.stride, spec.padding, acc.data(), oh, ow);
        k_cast(be(), acc.data(), out.data() + c * oh * ow, acc.size());
    }
    return out;
}

template <typename T>
Tensor<T> avg_pool_backward(const Tensor<T>& grad_out, std::size_t in_h, std::size_t in_w,
                            const PoolSpec& spec) {
    if (grad_out.rank() != 3) throw ShapeMismatch("pool grad must be [C,H',W']");
    const long oh = static_cast<long>(grad_out.extent(1)), ow = static_cast<long>(grad_out.extent(2));
    const std::size_t C = grad_out.extent(0);
    const double w = 1.0 / (static_cast<double>(spec.window) * spec.window);
    Tensor<T> din({C, in_h, in_w});
    std::vector<double> acc(in_h * in_w);
    for (std::size_t c = 0; c < C; ++c) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const T* go = grad_out.data() + c * oh * ow;
        for (std::size_t di = 0; di < spec.window; ++di)
            for (std::size_t dj = 0; dj < spec.window; ++dj)
                tap_scatter(go, oh, ow, w, di, dj, spec.stride, spec.padding, acc.data(),
                            static_cast<long>(in_h), static_cast<long>(in_w));
        k_cast(be(), acc.data(), din.data() + c * in_h * in_w, acc.size());
    }
    return din;
}

template <typename T>
BnState<T> BnState<T>::init(std::size_t channels) {
    BnState<T> s;
    s.gamma = Tensor<T>({channels}, T(1));
    s.beta = Tensor<T>({channels}, T(0));
    s.running_mean = Tensor<T>({channels}, T(0));
    s.running_var = Tensor<T>({channels}, T(1));
    return s;
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, BnState<T>& state, BnMode mode, BnCache* cache) {
    if (input.rank() != 4) throw ShapeMismatch("batch_norm input must be [B,C,H,W]");
    const std::size_t B = input.extent(0), C = input.extent(1);
    const std::size_t plane = input.extent(2) * input.extent(3);
    if (C != state.channels()) throw ShapeMismatch("channel count does not match BN state");
    const std::size_t n = B * plane;
    Tensor<T> out(input.shape());
    if (cache) {
        cache->mean.assign(C, 0.0);
        cache->inv_std.assign(C, 0.0);
    }

    for (std::size_t c = 0; c < C; ++c) {
        double mean, var;
        if (mode == BnMode::Train) {
            double total = 0.0;
            for (std::size_t b = 0; b < B; ++b)
                total += k_sum(be(), input.data() + (b * C + c) * plane, plane);
            mean = total / static_cast<double>(n);
            double ssq = 0.0;
            for (std::size_t b = 0; b < B; ++b)
                ssq += k_sumsq_shifted(be(), input.data() + (b * C + c) * plane, mean, plane);
            var = ssq / static_cast<double>(n);
            state.running_mean[c] = static_cast<T>(
                state.momentum * static_cast<double>(state.running_mean[c]) +
                (1.0 - state.momentum) * mean);
            state.running_var[c] = static_cast<T>(
                state.momentum * static_cast<double>(state.running_var[c]) +
                (1.0 - state.momentum) * var);
        } else {
            mean = static_cast<double>(state.running_mean[c]);
            var = static_cast<double>(state.running_var[c]);
        }
        const double inv_std = 1.0 / std::sqrt(var + state.epsilon);
        if (cache) {
            cache->mean[c] = mean;
            cache->inv_std[c] = inv_std;
        }
        const double scale = static_cast<double>(state.gamma[c]) * inv_std;
        const double shift = static_cast<double>(state.beta[c]) - mean * scale;
        for (std::size_t b = 0; b < B; ++b)
            k_affine(be(), input.data() + (b * C + c) * plane,
                     out.data() + (b * C + c) * plane, static_cast<T>(scale),
                     static_cast<T>(shift), plane);
    }
    return out;
}

template <typename T>
BnGrads<T> batch_norm_backward(const Tensor<T>& input, const BnState<T>& state,
                               const BnCache& cache, const Tensor<T>& grad_out) {
    if (!input.same_shape(grad_out)) throw ShapeMismatch("grad_out shape");
    const std::size_t B = input.extent(0), C = input.extent(1);
    const std::size_t plane = input.extent(2) * input.extent(3);
    const double n = static_cast<double>(B * plane);

    BnGrads<T> g;
    g.input = Tensor<T>(input.shape());
    g.gamma = Tensor<T>({C});
    g.beta = Tensor<T>({C});

    for (std::size_t c = 0; c < C; ++c) {
        const double mean = cache.mean[c];
        const double inv_std = cache.inv_std[c];
        double s1 = 0.0, sgx = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const T* go = grad_out.data() + (b * C + c) * plane;
            const T* x = input.data() + (b * C + c) * plane;
            s1 += k_sum(be(), go, plane);
            sgx += k_dot(be(), go, x, plane);
        }
        const double s2 = inv_std * (sgx - mean * s1);  // sum of g * xhat
        g.gamma[c] = static_cast<T>(s2);
        g.beta[c] = static_cast<T>(s1);

        const double a = static_cast<double>(state.gamma[c]) * inv_std;
        const double bcoef = -a * inv_std * s2 / n;
        const double ccoef = -a * s1 / n - bcoef * mean;
        for (std::size_t b = 0; b < B; ++b)
            k_lincomb2(be(), grad_out.data() + (b * C + c) * plane,
                       input.data() + (b * C + c) * plane,
                       g.input.data() + (b * C + c) * plane, static_cast<T>(a),
                       static_cast<T>(bcoef), static_cast<T>(ccoef), plane);
    }
    return g;
}

template <typename T>
Tensor<T> elementwise(const Tensor<T>& input, Elementwise f) {
    Tensor<T> out(input.shape());
    if constexpr (sizeof(T) == 4) {
        if (f == Elementwise::Relu)
            be().relu_f32(input.data(), out.data(), input.size());
        else
            be().abs_f32(input.data(), out.data(), input.size());
    } else {
        if (f == Elementwise::Relu)
            be().relu_f64(input.data(), out.data(), input.size());
        else
            be().abs_f64(input.data(), out.data(), input.size());
    }
    return out;
}

template <typename T>
Tensor<T> elementwise_backward(const Tensor<T>& input, Elementwise f, const Tensor<T>& grad_out) {
    if (!input.same_shape(grad_out)) throw ShapeMismatch("grad_out shape");
    Tensor<T> out(input.shape());
    if constexpr (sizeof(T) == 4) {
        if (f == Elementwise::Relu)
            be().relu_bwd_f32(input.data(), grad_out.data(), out.data(), input.size());
        else
            be().abs_bwd_f32(input.data(), grad_out.data(), out.data(), input.size());
    } else {
        if (f == Elementwise::Relu)
            be().relu_bwd_f64(input.data(), grad_out.data(), out.data(), input.size());
        else
            be().abs_bwd_f64(input.data(), grad_out.data(), out.data(), input.size());
    }
    return out;
}

template <typename T>
Tensor<T> concat_bands(const PlanarImage& img) {
    const std::size_t M = img.height(), N = img.width();
    Tensor<T> out({1, M, 3 * N});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t p = 0; p < M; ++p) {
            const std::uint8_t* src = img.band(i).data() + p * N;
            T* dst = out.data() + p * 3 * N + i * N;
            for (std::size_t q = 0; q < N; ++q) dst[q] = static_cast<T>(src[q]);
        }
    return out;
}

template <typename T>
Tensor<T> interleave_bands(const PlanarImage& img) {
    const std::size_t M = img.height(), N = img.width();
    Tensor<T> out({1, M, 3 * N});
    for (std::size_t p = 0; p < M; ++p) {
        T* dst = out.data() + p * 3 * N;
        for (std::size_t q = 0; q < N; ++q)
            for (std::size_t i = 0; i < 3; ++i)
                dst[3 * q + i] = static_cast<T>(img.band(i)[p * N + q]);
    }
    return out;
}

template <typename T>
PlanarImage deinterleave_bands(const Tensor<T>& t) {
    if (t.rank() != 3 || t.extent(0) != 1 || t.extent(2) % 3 != 0)
        throw ShapeMismatch("expected [1,M,3N] interleaved tensor");
    const std::size_t M = t.extent(1), N = t.extent(2) / 3;
    PlanarImage img(M, N);
    for (std::size_t p = 0; p < M; ++p)
        for (std::size_t q = 0; q < N; ++q)
            for (std::size_t i = 0; i < 3; ++i) {
                const double v = static_cast<double>(t[p * 3 * N + 3 * q + i]);
                const long r = std::lround(v);
                if (r < 0 || r > 255) throw ShapeMismatch("value outside intensity range");
                img.band(i)[p * N + q] = static_cast<std::uint8_t>(r);
            }
    return img;
}

template <typename T>
Tensor<T> filter_plane(const Tensor<T>& plane, const Tensor<T>& kernel, std::size_t padding) {
    if (plane.rank() != 2 || kernel.rank() != 2) throw ShapeMismatch("filter_plane takes 2-D");
    const long H = static_cast<long>(plane.extent(0)), W = static_cast<long>(plane.extent(1));
    const std::size_t kh = kernel.extent(0), kw = kernel.extent(1);
    const std::size_t oh = conv_out_extent(H, kh, 1, padding);
    const std::size_t ow = conv_out_extent(W, kw, 1, padding);
    Tensor<T> out({oh, ow});
    std::vector<double> acc(oh * ow, 0.0);
    for (std::size_t di = 0; di < kh; ++di)
        for (std::size_t dj = 0; dj < kw; ++dj) {
            const double w = static_cast<double>(kernel[di * kw + dj]);
            if (w == 0.0) continue;
            tap_accumulate(plane.data(), H, W, w, di, dj, 1, padding, acc.data(), oh, ow);
        }
    k_cast(be(), acc.data(), out.data(), acc.size());
    return out;
}

#define WISER_INSTANTIATE(T)                                                                      \
    template Tensor<T> conv2d_normal<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>*,    \
                                        const ConvSpec&);                                         \
    template Tensor<T> conv2d_channelwise<T>(const Tensor<T>&, const Tensor<T>&,                 \
                                             const ConvSpec&);                                    \
    template ConvGrads<T> conv2d_normal_backward<T>(const Tensor<T>&, const Tensor<T>&, bool,    \
                                                    const ConvSpec&, const Tensor<T>&, bool);    \
    template ConvGrads<T> conv2d_channelwise_backward<T>(const Tensor<T>&, const Tensor<T>&,     \
                                                         const ConvSpec&, const Tensor<T>&,      \
                                                         bool);                                  \
    template Tensor<T> avg_pool<T>(const Tensor<T>&, const PoolSpec&);                           \
    template Tensor<T> avg_pool_backward<T>(const Tensor<T>&, std::size_t, std::size_t,          \
                                            const PoolSpec&);                                    \
    template struct BnState<T>;                                                                  \
    template Tensor<T> batch_norm<T>(const Tensor<T>&, BnState<T>&, BnMode, BnCache*);           \
    template BnGrads<T> batch_norm_backward<T>(const Tensor<T>&, const BnState<T>&,              \
                                               const BnCache&, const Tensor<T>&);                \
    template Tensor<T> elementwise<T>(const Tensor<T>&, Elementwise);                            \
    template Tensor<T> elementwise_backward<T>(const Tensor<T>&, Elementwise, const Tensor<T>&); \
    template Tensor<T> concat_bands<T>(const PlanarImage&);                                      \
    template Tensor<T> interleave_bands<T>(const PlanarImage&);                                  \
    template PlanarImage deinterleave_bands<T>(const Tensor<T>&);                                \
    template Tensor<T> filter_plane<T>(const Tensor<T>&, const Tensor<T>&, std::size_t)

WISER_INSTANTIATE(float);
WISER_INSTANTIATE(double);

#undef WISER_INSTANTIATE

}  // namespace wiser
