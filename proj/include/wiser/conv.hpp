#ifndef WISER_CONV_HPP
#define WISER_CONV_HPP

#include <cstddef>
#include <vector>

#include "wiser/image.hpp"
#include "wiser/tensor.hpp"

namespace wiser {

// Spatial primitives. "Convolution" throughout is cross-correlation over a
// zero-padded input (no kernel flip), the deep-learning convention.
// real32 paths accumulate in real64 per output element; reductions follow
// the fixed tree documented in kernels.hpp.

struct ConvSpec {
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
};

struct PoolSpec {
    std::size_t window = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
};

// floor((in + 2*padding - kernel) / stride) + 1; throws ShapeMismatch when
// the result would not be strictly positive.
std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t padding);

// Z_k = sum_j Z_j * W_jk (+ bias_k). input [J,H,W], weights [K,J,kh,kw].
template <typename T>
Tensor<T> conv2d_normal(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>* bias,
                        const ConvSpec& spec);

template <typename T>
Tensor<T> conv2d_normal(const Tensor<T>& input, const Tensor<T>& weights, const ConvSpec& spec) {
    return conv2d_normal(input, weights, static_cast<const Tensor<T>*>(nullptr), spec);
}

// Z_{(j-1)K+k} = Z_j * W_jk, no cross-channel summation.
// input [J,H,W], weights [J,K,kh,kw], output [J*K,H',W'].
template <typename T>
Tensor<T> conv2d_channelwise(const Tensor<T>& input, const Tensor<T>& weights,
                             const ConvSpec& spec);

template <typename T>
struct ConvGrads {
    Tensor<T> input;
    Tensor<T> weights;
    Tensor<T> bias;  // empty when the forward had no bias
};

// need_input_grad = false skips the input-gradient pass (bottom layers
// backpropagate into raw images, where it is never consumed).
template <typename T>
ConvGrads<T> conv2d_normal_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                    bool has_bias, const ConvSpec& spec,
                                    const Tensor<T>& grad_out, bool need_input_grad = true);

template <typename T>
ConvGrads<T> conv2d_channelwise_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                         const ConvSpec& spec, const Tensor<T>& grad_out,
                                         bool need_input_grad = true);

// Mean over each window; zero-padded positions count toward the divisor
// (count-include-pad), so the divisor is always window*window.
template <typename T>
Tensor<T> avg_pool(const Tensor<T>& input, const PoolSpec& spec);

template <typename T>
Tensor<T> avg_pool_backward(const Tensor<T>& grad_out, std::size_t in_h, std::size_t in_w,
                            const PoolSpec& spec);

// Batch normalization over [B,C,H,W], statistics per channel.
template <typename T>
struct BnState {
    Tensor<T> gamma, beta;               // learnable, [C]
    Tensor<T> running_mean, running_var; // [C]
    double epsilon = 1e-5;
    double momentum = 0.9;  // running = momentum*running + (1-momentum)*batch

    static BnState init(std::size_t channels);
    std::size_t channels() const { return gamma.size(); }
};

enum class BnMode { Train, Infer };

struct BnCache {
    std::vector<double> mean, inv_std;  // train-mode batch statistics per channel
};

// Train mode normalizes with batch statistics (biased variance) and updates
// the running stats; infer mode uses the running stats. cache, when given,
// receives the statistics the backward pass needs.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, BnState<T>& state, BnMode mode,
                     BnCache* cache = nullptr);

template <typename T>
struct BnGrads {
    Tensor<T> input;
    Tensor<T> gamma, beta;
};

template <typename T>
BnGrads<T> batch_norm_backward(const Tensor<T>& input, const BnState<T>& state,
                               const BnCache& cache, const Tensor<T>& grad_out);

enum class Elementwise { Relu, Abs };

template <typename T>
Tensor<T> elementwise(const Tensor<T>& input, Elementwise f);

// d|x| at 0 and dReLU at 0 are taken as 0.
template <typename T>
Tensor<T> elementwise_backward(const Tensor<T>& input, Elementwise f, const Tensor<T>& grad_out);

// Side-by-side band concatenation: out[p, (i-1)*N + q] = band_i[p, q].
template <typename T>
Tensor<T> concat_bands(const PlanarImage& img);  // [1, M, 3N]

// Column-advance interleave: row sequence (r,g,b) per pixel,
// out[p, 3q + i] = band_i[p, q].
template <typename T>
Tensor<T> interleave_bands(const PlanarImage& img);  // [1, M, 3N]

template <typename T>
PlanarImage deinterleave_bands(const Tensor<T>& t);

// One plane filtered by one 2-D kernel, zero padding, stride 1.
// padding defaults to kernel_radius so the output keeps the input extents.
template <typename T>
Tensor<T> filter_plane(const Tensor<T>& plane, const Tensor<T>& kernel, std::size_t padding);

}  // namespace wiser

#endif
