#include "wiser/net.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>

#include "wiser/detail/kernel_glue.hpp"
#include "wiser/errors.hpp"
#include "wiser/io.hpp"
#include "wiser/parallel.hpp"
#include "wiser/rng.hpp"

namespace wiser {

using nlohmann::json;

namespace {

using namespace wiser::detail;

constexpr std::size_t kSrmKernels = 30;

std::size_t out_extent_or_throw(std::size_t in, std::size_t k, std::size_t s, std::size_t p) {
    try {
        return conv_out_extent(in, k, s, p);
    } catch (const ShapeMismatch& e) {
        throw IncompatibleShape(e.what());
    }
}

template <typename T>
Tensor<T> slice_sample(const Tensor<T>& batch, std::size_t b) {
    const std::size_t per = batch.size() / batch.extent(0);
    Tensor<T> out({batch.extent(1), batch.extent(2), batch.extent(3)});
    std::memcpy(out.data(), batch.data() + b * per, per * sizeof(T));
    return out;
}

template <typename T>
void paste_sample(Tensor<T>& batch, std::size_t b, const Tensor<T>& sample) {
    const std::size_t per = batch.size() / batch.extent(0);
    std::memcpy(batch.data() + b * per, sample.data(), per * sizeof(T));
}

// tensor-level variants of the band reshapes, applied per sample
template <typename T>
Tensor<T> concat_tensor(const Tensor<T>& batch) {
    const std::size_t B = batch.extent(0), H = batch.extent(2), W = batch.extent(3);
    Tensor<T> out({B, 1, H, 3 * W});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t p = 0; p < H; ++p)
                std::memcpy(out.data() + ((b * H) + p) * 3 * W + i * W,
                            batch.data() + ((b * 3 + i) * H + p) * W, W * sizeof(T));
    return out;
}

template <typename T>
Tensor<T> interleave_tensor(const Tensor<T>& batch) {
    const std::size_t B = batch.extent(0), H = batch.extent(2), W = batch.extent(3);
    Tensor<T> out({B, 1, H, 3 * W});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t p = 0; p < H; ++p) {
            T* dst = out.data() + (b * H + p) * 3 * W;
            for (std::size_t i = 0; i < 3; ++i) {
                const T* src = batch.data() + ((b * 3 + i) * H + p) * W;
                for (std::size_t q = 0; q < W; ++q) dst[3 * q + i] = src[q];
            }
        }
    return out;
}

template <typename T>
void fan_in_uniform(Tensor<T>& w, std::size_t fan_in, rng::Xoshiro256pp& gen) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = static_cast<T>((gen.next_double() * 2.0 - 1.0) * bound);
}

}  // namespace

const char* to_string(BottomMode m) {
    switch (m) {
        case BottomMode::Channelwise: return "channelwise";
        case BottomMode::Normal: return "normal";
        case BottomMode::Concat: return "concat";
        case BottomMode::Interleave: return "interleave";
    }
    return "?";
}

BottomMode bottom_mode_from_string(const std::string& s) {
    if (s == "channelwise") return BottomMode::Channelwise;
    if (s == "normal") return BottomMode::Normal;
    if (s == "concat") return BottomMode::Concat;
    if (s == "interleave") return BottomMode::Interleave;
    throw BadConfig("unknown bottom mode: " + s);
}

std::vector<LayerShape> compute_shape_table(const NetConfig& cfg) {
    if (cfg.n == 0) throw IncompatibleShape("magnification factor must be positive");
    if (cfg.input_h == 0 || cfg.input_w == 0) throw IncompatibleShape("empty input");
    const bool one_band =
        cfg.bottom_mode == BottomMode::Concat || cfg.bottom_mode == BottomMode::Interleave;
    const std::size_t h0 = cfg.input_h;
    const std::size_t w0 = one_band ? 3 * cfg.input_w : cfg.input_w;
    const std::size_t cb = cfg.bottom_mode == BottomMode::Channelwise ? 3 * kSrmKernels
                                                                      : kSrmKernels;

    std::vector<LayerShape> t;
    t.push_back({"separate", {cb, out_extent_or_throw(h0, 5, 1, 2), out_extent_or_throw(w0, 5, 1, 2)}});
    const std::size_t h1 = out_extent_or_throw(h0, 5, 2, 2), w1 = out_extent_or_throw(w0, 5, 2, 2);
    t.push_back({"conv1", {8 * cfg.n, h1, w1}});
    const std::size_t h2 = out_extent_or_throw(h1, 5, 2, 2), w2 = out_extent_or_throw(w1, 5, 2, 2);
    t.push_back({"pool1", {8 * cfg.n, h2, w2}});
    t.push_back({"conv2", {32 * cfg.n, out_extent_or_throw(h2, 3, 1, 1), out_extent_or_throw(w2, 3, 1, 1)}});
    const std::size_t h3 = out_extent_or_throw(h2, 5, 4, 2), w3 = out_extent_or_throw(w2, 5, 4, 2);
    t.push_back({"pool2", {32 * cfg.n, h3, w3}});
    t.push_back({"conv3", {128 * cfg.n, out_extent_or_throw(h3, 3, 1, 1), out_extent_or_throw(w3, 3, 1, 1)}});
    t.push_back({"pool3", {128 * cfg.n, 1, 1}});
    t.push_back({"flatten", {128 * cfg.n}});
    t.push_back({"fc1", {800}});
    t.push_back({"fc2", {400}});
    t.push_back({"fc3", {200}});
    t.push_back({"fc4", {2}});
    return t;
}

template <typename T>
Network<T> build(const NetConfig& cfg) {
    const auto table = compute_shape_table(cfg);  // validates the pooling chain
    Network<T> net;
    net.cfg = cfg;
    const KernelBank bank = KernelBank::load_default();

    const bool one_band =
        cfg.bottom_mode == BottomMode::Concat || cfg.bottom_mode == BottomMode::Interleave;
    const std::size_t in_ch = one_band ? 1 : 3;
    net.bottom_spec = {5, 5, 1, 2, in_ch, kSrmKernels};
    if (cfg.bottom_mode == BottomMode::Channelwise) {
        net.bottom_w = Tensor<T>({3, kSrmKernels, 5, 5});
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < kSrmKernels; ++k) {
                const Tensor<T> src = bank.kernel_as<T>(k + 1);
                std::memcpy(net.bottom_w.data() + (j * kSrmKernels + k) * 25, src.data(),
                            25 * sizeof(T));
            }
    } else {
        net.bottom_w = Tensor<T>({kSrmKernels, in_ch, 5, 5});
        for (std::size_t k = 0; k < kSrmKernels; ++k) {
            const Tensor<T> src = bank.kernel_as<T>(k + 1);
            for (std::size_t j = 0; j < in_ch; ++j)
                std::memcpy(net.bottom_w.data() + (k * in_ch + j) * 25, src.data(),
                            25 * sizeof(T));
        }
    }
    net.bottom_channels = table[0].extents[0];

    const std::size_t n = cfg.n;
    net.conv1_spec = {5, 5, 2, 2, net.bottom_channels, 8 * n};
    net.conv2_spec = {3, 3, 1, 1, 8 * n, 32 * n};
    net.conv3_spec = {3, 3, 1, 1, 32 * n, 128 * n};
    net.pool1_spec = {5, 2, 2};
    net.pool2_spec = {5, 4, 2};
    net.pool3_h = table[5].extents[1];
    net.pool3_w = table[5].extents[2];
    net.flat_dim = 128 * n;

    net.conv1_w = Tensor<T>({8 * n, net.bottom_channels, 5, 5});
    net.conv2_w = Tensor<T>({32 * n, 8 * n, 3, 3});
    net.conv3_w = Tensor<T>({128 * n, 32 * n, 3, 3});
    net.bn1 = BnState<T>::init(8 * n);
    net.bn2 = BnState<T>::init(32 * n);
    net.bn3 = BnState<T>::init(128 * n);

    const std::size_t dims[5] = {net.flat_dim, 800, 400, 200, 2};
    for (std::size_t i = 0; i < 4; ++i) {
        net.fc_w[i] = Tensor<T>({dims[i + 1], dims[i]});
        net.fc_b[i] = Tensor<T>({dims[i + 1]});
    }

    // fan-in-scaled uniform initialization of the reunion and dense weights
    {
        rng::Xoshiro256pp g1(rng::derive_stream(cfg.init_seed, 100));
        fan_in_uniform(net.conv1_w, net.bottom_channels * 25, g1);
        rng::Xoshiro256pp g2(rng::derive_stream(cfg.init_seed, 101));
        fan_in_uniform(net.conv2_w, 8 * n * 9, g2);
        rng::Xoshiro256pp g3(rng::derive_stream(cfg.init_seed, 102));
        fan_in_uniform(net.conv3_w, 32 * n * 9, g3);
        for (std::size_t i = 0; i < 4; ++i) {
            rng::Xoshiro256pp gf(rng::derive_stream(cfg.init_seed, 110 + i));
            fan_in_uniform(net.fc_w[i], dims[i], gf);
        }
    }
    return net;
}

namespace {

template <typename T>
void softmax_rows(Tensor<T>& logits, Tensor<T>& probs) {
    const std::size_t B = logits.extent(0);
    for (std::size_t b = 0; b < B; ++b) {
        const double l0 = logits(b, std::size_t(0)), l1 = logits(b, std::size_t(1));
        const double mx = std::max(l0, l1);
        const double e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
        const double s = e0 + e1;
        probs(b, std::size_t(0)) = static_cast<T>(e0 / s);
        probs(b, std::size_t(1)) = static_cast<T>(e1 / s);
    }
}

// fully-connected forward: z = x W^T + b, rows are samples
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
    const std::size_t B = x.extent(0), in = x.extent(1), out = w.extent(0);
    Tensor<T> z({B, out});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < out; ++o)
            z(b, o) = static_cast<T>(k_dot(be(), w.data() + o * in, x.data() + b * in, in) +
                                     static_cast<double>(bias[o]));
    return z;
}

}  // namespace

template <typename T>
Tensor<T> forward(Network<T>& net, const Tensor<T>& batch, RunMode mode, ForwardTrace<T>* trace) {
    if (batch.rank() != 4 || batch.extent(1) != 3 || batch.extent(2) != net.cfg.input_h ||
        batch.extent(3) != net.cfg.input_w)
        throw ShapeMismatch("batch must be [B,3," + std::to_string(net.cfg.input_h) + "," +
                            std::to_string(net.cfg.input_w) + "]");
    const std::size_t B = batch.extent(0);
    const BnMode bn_mode = mode == RunMode::Train ? BnMode::Train : BnMode::Infer;

    // band preprocessing
    Tensor<T> pre;
    switch (net.cfg.bottom_mode) {
        case BottomMode::Concat: pre = concat_tensor(batch); break;
        case BottomMode::Interleave: pre = interleave_tensor(batch); break;
        default: pre = batch; break;
    }

    // separate stage
    const std::size_t h0 = pre.extent(2), w0 = pre.extent(3);
    Tensor<T> bottom_out({B, net.bottom_channels, h0, w0});
    parallel_for(B, [&](std::size_t b) {
        const Tensor<T> sample = slice_sample(pre, b);
        Tensor<T> out = net.cfg.bottom_mode == BottomMode::Channelwise
                            ? conv2d_channelwise<T>(sample, net.bottom_w, net.bottom_spec)
                            : conv2d_normal<T>(sample, net.bottom_w, nullptr, net.bottom_spec);
        paste_sample(bottom_out, b, out);
    });

    // reunion block 1 (with ABS after the first normal convolution)
    const std::size_t h1 = conv_out_extent(h0, 5, 2, 2), w1 = conv_out_extent(w0, 5, 2, 2);
    Tensor<T> conv1_out({B, net.conv1_spec.out_channels, h1, w1});
    parallel_for(B, [&](std::size_t b) {
        paste_sample(conv1_out, b,
                     conv2d_normal<T>(slice_sample(bottom_out, b), net.conv1_w, nullptr,
                                      net.conv1_spec));
    });
    Tensor<T> abs_out = elementwise(conv1_out, Elementwise::Abs);
    BnCache cache1;
    Tensor<T> relu1_in = batch_norm(abs_out, net.bn1, bn_mode, &cache1);
    Tensor<T> relu1_out = elementwise(relu1_in, Elementwise::Relu);
    const std::size_t h2 = conv_out_extent(h1, 5, 2, 2), w2 = conv_out_extent(w1, 5, 2, 2);
    Tensor<T> pool1_out({B, net.conv1_spec.out_channels, h2, w2});
    for (std::size_t b = 0; b < B; ++b)
        paste_sample(pool1_out, b, avg_pool(slice_sample(relu1_out, b), net.pool1_spec));

    // reunion block 2
    Tensor<T> conv2_out({B, net.conv2_spec.out_channels, h2, w2});
    parallel_for(B, [&](std::size_t b) {
        paste_sample(conv2_out, b,
                     conv2d_normal<T>(slice_sample(pool1_out, b), net.conv2_w, nullptr,
                                      net.conv2_spec));
    });
    BnCache cache2;
    Tensor<T> relu2_in = batch_norm(conv2_out, net.bn2, bn_mode, &cache2);
    Tensor<T> relu2_out = elementwise(relu2_in, Elementwise::Relu);
    const std::size_t h3 = conv_out_extent(h2, 5, 4, 2), w3 = conv_out_extent(w2, 5, 4, 2);
    Tensor<T> pool2_out({B, net.conv2_spec.out_channels, h3, w3});
    for (std::size_t b = 0; b < B; ++b)
        paste_sample(pool2_out, b, avg_pool(slice_sample(relu2_out, b), net.pool2_spec));

    // reunion block 3 with the global average pool
    Tensor<T> conv3_out({B, net.conv3_spec.out_channels, h3, w3});
    parallel_for(B, [&](std::size_t b) {
        paste_sample(conv3_out, b,
                     conv2d_normal<T>(slice_sample(pool2_out, b), net.conv3_w, nullptr,
                                      net.conv3_spec));
    });
    BnCache cache3;
    Tensor<T> relu3_in = batch_norm(conv3_out, net.bn3, bn_mode, &cache3);
    Tensor<T> relu3_out = elementwise(relu3_in, Elementwise::Relu);

    const std::size_t plane3 = h3 * w3;
    Tensor<T> flat({B, net.flat_dim});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < net.flat_dim; ++c)
            flat(b, c) = static_cast<T>(
                k_sum(be(), relu3_out.data() + (b * net.flat_dim + c) * plane3, plane3) /
                static_cast<double>(plane3));

    // dense head
    std::array<Tensor<T>, 4> fc_z;
    std::array<Tensor<T>, 3> fc_a;
    const Tensor<T>* cur = &flat;
    for (std::size_t i = 0; i < 4; ++i) {
        fc_z[i] = dense_forward(*cur, net.fc_w[i], net.fc_b[i]);
        if (i < 3) {
            fc_a[i] = elementwise(fc_z[i], Elementwise::Relu);
            cur = &fc_a[i];
        }
    }
    Tensor<T> probs({B, 2});
    softmax_rows(fc_z[3], probs);

    if (trace) {
        trace->pre = std::move(pre);
        trace->bottom_out = std::move(bottom_out);
        trace->conv1_out = std::move(conv1_out);
        trace->abs_out = std::move(abs_out);
        trace->relu1_in = std::move(relu1_in);
        trace->relu1_out = std::move(relu1_out);
        trace->pool1_out = std::move(pool1_out);
        trace->conv2_out = std::move(conv2_out);
        trace->relu2_in = std::move(relu2_in);
        trace->relu2_out = std::move(relu2_out);
        trace->pool2_out = std::move(pool2_out);
        trace->conv3_out = std::move(conv3_out);
        trace->relu3_in = std::move(relu3_in);
        trace->relu3_out = std::move(relu3_out);
        trace->flat = std::move(flat);
        trace->fc_z = std::move(fc_z);
        trace->fc_a = std::move(fc_a);
        trace->probs = probs;
        trace->bn1_cache = std::move(cache1);
        trace->bn2_cache = std::move(cache2);
        trace->bn3_cache = std::move(cache3);
    }
    return probs;
}

template <typename T>
double compute_loss(Network<T>& net, const Tensor<T>& batch, const std::vector<int>& labels) {
    if (labels.size() != batch.extent(0)) throw ShapeMismatch("one label per sample");
    ForwardTrace<T> trace;
    forward(net, batch, RunMode::Train, &trace);
    const std::size_t B = batch.extent(0);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const double l0 = trace.fc_z[3](b, std::size_t(0)), l1 = trace.fc_z[3](b, std::size_t(1));
        const double mx = std::max(l0, l1);
        const double lse = mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
        loss += lse - (labels[b] == 0 ? l0 : l1);
    }
    return loss / static_cast<double>(B);
}

template <typename T>
BackwardResult<T> backward(Network<T>& net, const Tensor<T>& batch,
                           const std::vector<int>& labels) {
    if (labels.size() != batch.extent(0)) throw ShapeMismatch("one label per sample");
    for (int y : labels)
        if (y != 0 && y != 1) throw ShapeMismatch("labels must be 0 (cover) or 1 (stego)");
    ForwardTrace<T> trace;
    forward(net, batch, RunMode::Train, &trace);
    const std::size_t B = batch.extent(0);

    BackwardResult<T> result;
    GradStore<T>& g = result.grads;
    const bool learn_bottom = net.cfg.bottom_learnable;
    if (learn_bottom) g.bottom_w = Tensor<T>(net.bottom_w.shape());
    g.conv1_w = Tensor<T>(net.conv1_w.shape());
    g.conv2_w = Tensor<T>(net.conv2_w.shape());
    g.conv3_w = Tensor<T>(net.conv3_w.shape());
    for (std::size_t i = 0; i < 3; ++i) {
        const BnState<T>& bn = i == 0 ? net.bn1 : (i == 1 ? net.bn2 : net.bn3);
        g.bn_gamma[i] = Tensor<T>(bn.gamma.shape());
        g.bn_beta[i] = Tensor<T>(bn.beta.shape());
    }
    for (std::size_t i = 0; i < 4; ++i) {
        g.fc_w[i] = Tensor<T>(net.fc_w[i].shape());
        g.fc_b[i] = Tensor<T>(net.fc_b[i].shape());
    }

    // loss and logits gradient
    Tensor<T> dz({B, 2});
    {
        double loss = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const double l0 = trace.fc_z[3](b, std::size_t(0));
            const double l1 = trace.fc_z[3](b, std::size_t(1));
            const double mx = std::max(l0, l1);
            const double lse = mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
            loss += lse - (labels[b] == 0 ? l0 : l1);
            for (std::size_t c = 0; c < 2; ++c) {
                const double p = static_cast<double>(trace.probs(b, c));
                const double target = labels[b] == static_cast<int>(c) ? 1.0 : 0.0;
                dz(b, c) = static_cast<T>((p - target) / static_cast<double>(B));
            }
        }
        result.loss = loss / static_cast<double>(B);
    }

    // dense chain
    Tensor<T> da = dz;
    for (int layer = 3; layer >= 0; --layer) {
        const Tensor<T>& x = layer == 0 ? trace.flat : trace.fc_a[layer - 1];
        const std::size_t in = x.extent(1), out = net.fc_w[layer].extent(0);
        std::vector<double> dw_acc(out * in, 0.0), db_acc(out, 0.0);
        std::vector<double> dx_acc;
        Tensor<T> dx({B, in});
        for (std::size_t b = 0; b < B; ++b) {
            dx_acc.assign(in, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                const double gv = static_cast<double>(da(b, o));
                db_acc[o] += gv;
                if (gv != 0.0) {
                    k_axpy(be(), gv, x.data() + b * in, dw_acc.data() + o * in, in);
                    k_axpy(be(), gv, net.fc_w[layer].data() + o * in, dx_acc.data(), in);
                }
            }
            k_cast(be(), dx_acc.data(), dx.data() + b * in, in);
        }
        k_cast(be(), dw_acc.data(), g.fc_w[layer].data(), dw_acc.size());
        k_cast(be(), db_acc.data(), g.fc_b[layer].data(), db_acc.size());
        if (layer > 0)
            da = elementwise_backward(trace.fc_z[layer - 1], Elementwise::Relu, dx);
        else
            da = std::move(dx);  // gradient w.r.t. the flattened pool output
    }

    // global pool backward
    const std::size_t h3 = trace.relu3_out.extent(2), w3 = trace.relu3_out.extent(3);
    const double inv_plane3 = 1.0 / static_cast<double>(h3 * w3);
    Tensor<T> drelu3(trace.relu3_out.shape());
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < net.flat_dim; ++c) {
            const T v = static_cast<T>(static_cast<double>(da(b, c)) * inv_plane3);
            T* dst = drelu3.data() + (b * net.flat_dim + c) * h3 * w3;
            for (std::size_t i = 0; i < h3 * w3; ++i) dst[i] = v;
        }

    // block 3 backward
    Tensor<T> dbn3 = elementwise_backward(trace.relu3_in, Elementwise::Relu, drelu3);
    BnGrads<T> bn3g = batch_norm_backward(trace.conv3_out, net.bn3, trace.bn3_cache, dbn3);
    g.bn_gamma[2] = std::move(bn3g.gamma);
    g.bn_beta[2] = std::move(bn3g.beta);
    Tensor<T> dpool2(trace.pool2_out.shape());
    for (std::size_t b = 0; b < B; ++b) {
        ConvGrads<T> cg = conv2d_normal_backward(slice_sample(trace.pool2_out, b), net.conv3_w,
                                                 false, net.conv3_spec,
                                                 slice_sample(bn3g.input, b));
        for (std::size_t i = 0; i < g.conv3_w.size(); ++i) g.conv3_w[i] += cg.weights[i];
        paste_sample(dpool2, b, cg.input);
    }

    // block 2 backward
    Tensor<T> drelu2(trace.relu2_out.shape());
    for (std::size_t b = 0; b < B; ++b)
        paste_sample(drelu2, b,
                     avg_pool_backward(slice_sample(dpool2, b), trace.relu2_out.extent(2),
                                       trace.relu2_out.extent(3), net.pool2_spec));
    Tensor<T> dbn2 = elementwise_backward(trace.relu2_in, Elementwise::Relu, drelu2);
    BnGrads<T> bn2g = batch_norm_backward(trace.conv2_out, net.bn2, trace.bn2_cache, dbn2);
    g.bn_gamma[1] = std::move(bn2g.gamma);
    g.bn_beta[1] = std::move(bn2g.beta);
    Tensor<T> dpool1(trace.pool1_out.shape());
    for (std::size_t b = 0; b < B; ++b) {
        ConvGrads<T> cg = conv2d_normal_backward(slice_sample(trace.pool1_out, b), net.conv2_w,
                                                 false, net.conv2_spec,
                                                 slice_sample(bn2g.input, b));
        for (std::size_t i = 0; i < g.conv2_w.size(); ++i) g.conv2_w[i] += cg.weights[i];
        paste_sample(dpool1, b, cg.input);
    }

    // block 1 backward
    Tensor<T> drelu1(trace.relu1_out.shape());
    for (std::size_t b = 0; b < B; ++b)
        paste_sample(drelu1, b,
                     avg_pool_backward(slice_sample(dpool1, b), trace.relu1_out.extent(2),
                                       trace.relu1_out.extent(3), net.pool1_spec));
    Tensor<T> dbn1 = elementwise_backward(trace.relu1_in, Elementwise::Relu, drelu1);
    BnGrads<T> bn1g = batch_norm_backward(trace.abs_out, net.bn1, trace.bn1_cache, dbn1);
    g.bn_gamma[0] = std::move(bn1g.gamma);
    g.bn_beta[0] = std::move(bn1g.beta);
    Tensor<T> dconv1 = elementwise_backward(trace.conv1_out, Elementwise::Abs, bn1g.input);

    Tensor<T> dbottom;
    if (learn_bottom) dbottom = Tensor<T>(trace.bottom_out.shape());
    for (std::size_t b = 0; b < B; ++b) {
        ConvGrads<T> cg = conv2d_normal_backward(slice_sample(trace.bottom_out, b), net.conv1_w,
                                                 false, net.conv1_spec, slice_sample(dconv1, b),
                                                 learn_bottom);
        for (std::size_t i = 0; i < g.conv1_w.size(); ++i) g.conv1_w[i] += cg.weights[i];
        if (learn_bottom) paste_sample(dbottom, b, cg.input);
    }

    // separate stage backward, only when the bottom kernels learn
    if (learn_bottom) {
        for (std::size_t b = 0; b < B; ++b) {
            const Tensor<T> sample = slice_sample(trace.pre, b);
            const Tensor<T> gout = slice_sample(dbottom, b);
            if (net.cfg.bottom_mode == BottomMode::Channelwise) {
                ConvGrads<T> cg = conv2d_channelwise_backward(sample, net.bottom_w,
                                                              net.bottom_spec, gout, false);
                for (std::size_t i = 0; i < g.bottom_w.size(); ++i)
                    g.bottom_w[i] += cg.weights[i];
            } else {
                ConvGrads<T> cg = conv2d_normal_backward(sample, net.bottom_w, false,
                                                         net.bottom_spec, gout, false);
                for (std::size_t i = 0; i < g.bottom_w.size(); ++i)
                    g.bottom_w[i] += cg.weights[i];
            }
        }
    }
    return result;
}

template <typename T>
std::vector<ParamRef<T>> param_refs(Network<T>& net, GradStore<T>* grads) {
    std::vector<ParamRef<T>> refs;
    auto add = [&](const char* name, Tensor<T>* v, Tensor<T>* gr, bool exempt) {
        refs.push_back({name, v, gr, exempt});
    };
    if (net.cfg.bottom_learnable)
        add("bottom_w", &net.bottom_w, grads ? &grads->bottom_w : nullptr, false);
    add("conv1_w", &net.conv1_w, grads ? &grads->conv1_w : nullptr, false);
    add("conv2_w", &net.conv2_w, grads ? &grads->conv2_w : nullptr, false);
    add("conv3_w", &net.conv3_w, grads ? &grads->conv3_w : nullptr, false);
    BnState<T>* bns[3] = {&net.bn1, &net.bn2, &net.bn3};
    static const char* gamma_names[3] = {"bn1_gamma", "bn2_gamma", "bn3_gamma"};
    static const char* beta_names[3] = {"bn1_beta", "bn2_beta", "bn3_beta"};
    for (std::size_t i = 0; i < 3; ++i) {
        add(gamma_names[i], &bns[i]->gamma, grads ? &grads->bn_gamma[i] : nullptr, true);
        add(beta_names[i], &bns[i]->beta, grads ? &grads->bn_beta[i] : nullptr, true);
    }
    static const char* w_names[4] = {"fc1_w", "fc2_w", "fc3_w", "fc4_w"};
    static const char* b_names[4] = {"fc1_b", "fc2_b", "fc3_b", "fc4_b"};
    for (std::size_t i = 0; i < 4; ++i) {
        add(w_names[i], &net.fc_w[i], grads ? &grads->fc_w[i] : nullptr, false);
        add(b_names[i], &net.fc_b[i], grads ? &grads->fc_b[i] : nullptr, true);
    }
    return refs;
}

template <typename T>
AuditReport count_params_flops(const Network<T>& net) {
    const auto table = compute_shape_table(net.cfg);
    auto area = [&](std::size_t row) { return table[row].extents[1] * table[row].extents[2]; };

    AuditReport rep;
    auto add = [&](const std::string& name, std::size_t params, std::size_t flops) {
        rep.rows.push_back({name, params, flops});
        rep.params += params;
        rep.flops += flops;
    };

    const std::size_t bottom_params = net.cfg.bottom_learnable ? net.bottom_w.size() : 0;
    const std::size_t bottom_macs =
        net.bottom_channels * area(0) * 25;  // channel-wise: one kernel per output map
    const std::size_t bottom_flops = net.cfg.bottom_mode == BottomMode::Channelwise ||
                                             net.cfg.bottom_mode == BottomMode::Concat ||
                                             net.cfg.bottom_mode == BottomMode::Interleave
                                         ? 2 * bottom_macs
                                         : 2 * net.bottom_channels * area(0) * 25 * 3;
    add("separate", bottom_params, bottom_flops);

    const ConvSpec* convs[3] = {&net.conv1_spec, &net.conv2_spec, &net.conv3_spec};
    const Tensor<T>* weights[3] = {&net.conv1_w, &net.conv2_w, &net.conv3_w};
    const std::size_t conv_rows[3] = {1, 3, 5};
    static const char* conv_names[3] = {"conv1", "conv2", "conv3"};
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t out_elems = convs[i]->out_channels * area(conv_rows[i]);
        const std::size_t macs =
            out_elems * convs[i]->in_channels * convs[i]->kernel_h * convs[i]->kernel_w;
        add(conv_names[i], weights[i]->size(), 2 * macs);
        // ABS on block 1 only, BN (2/elem) + ReLU (1/elem)
        const std::size_t act = out_elems * (i == 0 ? 4 : 3);
        add(std::string(conv_names[i]) + "_bn_act",
            2 * convs[i]->out_channels, act);
    }

    add("pool1", 0, net.conv1_spec.out_channels * area(2) * (net.pool1_spec.window * net.pool1_spec.window + 1));
    add("pool2", 0, net.conv2_spec.out_channels * area(4) * (net.pool2_spec.window * net.pool2_spec.window + 1));
    add("pool3", 0, net.conv3_spec.out_channels * (net.pool3_h * net.pool3_w + 1));

    static const char* fc_names[4] = {"fc1", "fc2", "fc3", "fc4"};
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t out = net.fc_w[i].extent(0), in = net.fc_w[i].extent(1);
        const std::size_t relu = i < 3 ? out : 0;
        add(fc_names[i], out * in + out, 2 * out * in + out + relu);
    }
    add("softmax", 0, 8);
    return rep;
}

double cosine_to_ones(double m1, double m2, double m3) {
    const double norm = std::sqrt(m1 * m1 + m2 * m2 + m3 * m3);
    if (norm == 0.0) return 0.0;
    return (m1 + m2 + m3) / (std::sqrt(3.0) * norm);
}

namespace {

// Pearson correlation over kernel coefficients; bitwise-equal inputs are
// exactly 1 (the mathematical value, free of rounding).
template <typename T>
double kernel_pearson(const T* a, const T* b, std::size_t n) {
    if (std::memcmp(a, b, n * sizeof(T)) == 0) {
        double va = 0.0, ma = 0.0;
        for (std::size_t i = 0; i < n; ++i) ma += static_cast<double>(a[i]);
        ma /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = static_cast<double>(a[i]) - ma;
            va += d * d;
        }
        if (va == 0.0) throw DegenerateKernel("constant kernel has no correlation");
        return 1.0;
    }
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += static_cast<double>(a[i]);
        mb += static_cast<double>(b[i]);
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = static_cast<double>(a[i]) - ma;
        const double db = static_cast<double>(b[i]) - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) throw DegenerateKernel("zero-variance kernel");
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

// summed-area table for fast means of zero-padded filter outputs
class RectSums {
public:
    explicit RectSums(const std::vector<std::uint8_t>& plane, std::size_t h, std::size_t w)
        : h_(h), w_(w), table_((h + 1) * (w + 1), 0.0) {
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                table_[(r + 1) * (w_ + 1) + c + 1] =
                    static_cast<double>(plane[r * w + c]) + table_[r * (w_ + 1) + c + 1] +
                    table_[(r + 1) * (w_ + 1) + c] - table_[r * (w_ + 1) + c];
    }

    // inclusive rectangle, clipped to the plane
    double sum(long r0, long r1, long c0, long c1) const {
        r0 = std::max<long>(r0, 0);
        c0 = std::max<long>(c0, 0);
        r1 = std::min<long>(r1, static_cast<long>(h_) - 1);
        c1 = std::min<long>(c1, static_cast<long>(w_) - 1);
        if (r0 > r1 || c0 > c1) return 0.0;
        return table_[(r1 + 1) * (w_ + 1) + c1 + 1] - table_[r0 * (w_ + 1) + c1 + 1] -
               table_[(r1 + 1) * (w_ + 1) + c0] + table_[r0 * (w_ + 1) + c0];
    }

private:
    std::size_t h_, w_;
    std::vector<double> table_;
};

// mean over the zero-padded same-size output of plane * kernel
template <typename T>
double filtered_mean(const RectSums& sums, std::size_t h, std::size_t w, const T* kernel) {
    double total = 0.0;
    for (long di = 0; di < 5; ++di)
        for (long dj = 0; dj < 5; ++dj) {
            const double wv = static_cast<double>(kernel[di * 5 + dj]);
            if (wv == 0.0) continue;
            // output (r,c) reads plane(r+di-2, c+dj-2); sum over valid reads
            total += wv * sums.sum(di - 2, static_cast<long>(h) - 1 + di - 2, dj - 2,
                                   static_cast<long>(w) - 1 + dj - 2);
        }
    return total / static_cast<double>(h * w);
}

}  // namespace

template <typename T>
double avg_kernel_correlation(const Network<T>& net) {
    if (net.cfg.bottom_mode != BottomMode::Channelwise)
        throw WrongBottomMode("kernel-correlation diagnostic needs the channel-wise bottom");
    double total = 0.0;
    for (std::size_t k = 0; k < kSrmKernels; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
                total += kernel_pearson(net.bottom_w.data() + (i * kSrmKernels + k) * 25,
                                        net.bottom_w.data() + (j * kSrmKernels + k) * 25, 25);
    return total / 90.0;
}

template <typename T>
DiagnosticsReport cosine_similarity_diag(const Network<T>& net,
                                         const std::vector<PlanarImage>& covers,
                                         const std::vector<PlanarImage>& stegos) {
    if (net.cfg.bottom_mode != BottomMode::Channelwise)
        throw WrongBottomMode("cosine diagnostic needs the channel-wise bottom");
    if (covers.empty() && stegos.empty()) throw EmptyDataset("no images");

    DiagnosticsReport rep;
    rep.cw_bar = avg_kernel_correlation(net);

    auto accumulate = [&](const std::vector<PlanarImage>& images, std::vector<double>& per_k,
                          double& overall) {
        per_k.assign(kSrmKernels, 0.0);
        overall = 0.0;
        for (const PlanarImage& img : images) {
            const RectSums sums[3] = {RectSums(img.band(0), img.height(), img.width()),
                                      RectSums(img.band(1), img.height(), img.width()),
                                      RectSums(img.band(2), img.height(), img.width())};
            double image_mean = 0.0;
            for (std::size_t k = 0; k < kSrmKernels; ++k) {
                double mu[3];
                for (std::size_t i = 0; i < 3; ++i)
                    mu[i] = filtered_mean(sums[i], img.height(), img.width(),
                                          net.bottom_w.data() + (i * kSrmKernels + k) * 25);
                const double s = std::fabs(cosine_to_ones(mu[0], mu[1], mu[2]));
                per_k[k] += s;
                image_mean += s;
            }
            overall += image_mean / static_cast<double>(kSrmKernels);
        }
        if (!images.empty()) {
            for (auto& v : per_k) v /= static_cast<double>(images.size());
            overall /= static_cast<double>(images.size());
        }
    };

    accumulate(covers, rep.s_cover_per_k, rep.s_cover);
    accumulate(stegos, rep.s_stego_per_k, rep.s_stego);
    return rep;
}

namespace {

json config_to_json(const NetConfig& cfg) {
    return json{{"n", cfg.n},
                {"input_h", cfg.input_h},
                {"input_w", cfg.input_w},
                {"bottom_mode", to_string(cfg.bottom_mode)},
                {"bottom_learnable", cfg.bottom_learnable},
                {"dtype", cfg.dtype == Dtype::Real32 ? "real32" : "real64"},
                {"init_seed", cfg.init_seed}};
}

NetConfig config_from_json(const json& j) {
    NetConfig cfg;
    cfg.n = j.at("n").get<std::size_t>();
    cfg.input_h = j.at("input_h").get<std::size_t>();
    cfg.input_w = j.at("input_w").get<std::size_t>();
    cfg.bottom_mode = bottom_mode_from_string(j.at("bottom_mode").get<std::string>());
    cfg.bottom_learnable = j.at("bottom_learnable").get<bool>();
    const std::string dt = j.at("dtype").get<std::string>();
    if (dt != "real32" && dt != "real64") throw BadConfig("unknown dtype: " + dt);
    cfg.dtype = dt == "real32" ? Dtype::Real32 : Dtype::Real64;
    cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
    return cfg;
}

constexpr char kCkptMagic[8] = {'W', 'L', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> checkpoint_tensors(Network<T>& net) {
    std::vector<std::pair<std::string, Tensor<T>*>> list = {
        {"bottom_w", &net.bottom_w},   {"conv1_w", &net.conv1_w},
        {"conv2_w", &net.conv2_w},     {"conv3_w", &net.conv3_w},
        {"bn1_gamma", &net.bn1.gamma}, {"bn1_beta", &net.bn1.beta},
        {"bn1_mean", &net.bn1.running_mean}, {"bn1_var", &net.bn1.running_var},
        {"bn2_gamma", &net.bn2.gamma}, {"bn2_beta", &net.bn2.beta},
        {"bn2_mean", &net.bn2.running_mean}, {"bn2_var", &net.bn2.running_var},
        {"bn3_gamma", &net.bn3.gamma}, {"bn3_beta", &net.bn3.beta},
        {"bn3_mean", &net.bn3.running_mean}, {"bn3_var", &net.bn3.running_var},
    };
    static const char* w_names[4] = {"fc1_w", "fc2_w", "fc3_w", "fc4_w"};
    static const char* b_names[4] = {"fc1_b", "fc2_b", "fc3_b", "fc4_b"};
    for (std::size_t i = 0; i < 4; ++i) {
        list.emplace_back(w_names[i], &net.fc_w[i]);
        list.emplace_back(b_names[i], &net.fc_b[i]);
    }
    return list;
}

}  // namespace

template <typename T>
void save_checkpoint(const Network<T>& net, std::uint64_t iteration, const std::string& path) {
    auto& mutable_net = const_cast<Network<T>&>(net);  // tensors are only read
    const auto tensors = checkpoint_tensors(mutable_net);

    std::string blobs;
    json dir = json::array();
    for (const auto& [name, tensor] : tensors) {
        const std::string enc = encode_tensor(*tensor);
        dir.push_back({{"name", name},
                       {"dtype", dtype_of<T>() == Dtype::Real32 ? "real32" : "real64"},
                       {"shape", tensor->shape()},
                       {"offset", blobs.size()},
                       {"bytes", enc.size()}});
        blobs += enc;
    }
    json manifest{{"format", "wlckpt-1"},
                  {"config", config_to_json(net.cfg)},
                  {"iteration", iteration},
                  {"tensors", dir}};
    const std::string mtext = manifest.dump();

    std::string out;
    out.append(kCkptMagic, 8);
    const std::uint64_t mlen = mtext.size();
    out.append(reinterpret_cast<const char*>(&mlen), 8);
    out += mtext;
    out += blobs;
    write_file(path, out);
}

namespace {

json read_manifest(const std::string& bytes, std::size_t& blob_base) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kCkptMagic, 8) != 0)
        throw BadMagic("not a checkpoint file");
    std::uint64_t mlen;
    std::memcpy(&mlen, bytes.data() + 8, 8);
    if (bytes.size() < 16 + mlen) throw TruncatedPayload("checkpoint manifest short");
    blob_base = 16 + mlen;
    try {
        return json::parse(bytes.substr(16, mlen));
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint manifest: ") + e.what());
    }
}

}  // namespace

NetConfig peek_checkpoint_config(const std::string& path) {
    const std::string bytes = read_file(path);
    std::size_t blob_base;
    const json manifest = read_manifest(bytes, blob_base);
    return config_from_json(manifest.at("config"));
}

template <typename T>
std::pair<Network<T>, std::uint64_t> load_checkpoint(const std::string& path) {
    const std::string bytes = read_file(path);
    std::size_t blob_base;
    const json manifest = read_manifest(bytes, blob_base);
    const NetConfig cfg = config_from_json(manifest.at("config"));
    if (cfg.dtype != dtype_of<T>()) throw BadMagic("checkpoint holds the other dtype");

    Network<T> net = build<T>(cfg);
    auto tensors = checkpoint_tensors(net);
    const json& dir = manifest.at("tensors");
    if (dir.size() != tensors.size()) throw ParseError("unexpected tensor directory size");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& entry = dir.at(i);
        if (entry.at("name").get<std::string>() != tensors[i].first)
            throw ParseError("tensor directory order mismatch");
        if (entry.at("shape").get<std::vector<std::size_t>>() != tensors[i].second->shape())
            throw ShapeMismatch("manifest shape mismatch: " + tensors[i].first);
        const std::size_t off = blob_base + entry.at("offset").get<std::size_t>();
        const std::size_t len = entry.at("bytes").get<std::size_t>();
        if (off + len > bytes.size()) throw TruncatedPayload("checkpoint blob short");
        LoadedTensor lt = decode_tensor(bytes.data() + off, len);
        auto* typed = std::get_if<Tensor<T>>(&lt);
        if (!typed) throw BadMagic("blob dtype mismatch");
        if (typed->shape() != tensors[i].second->shape())
            throw ShapeMismatch("checkpoint tensor shape mismatch: " + tensors[i].first);
        *tensors[i].second = std::move(*typed);
    }
    return {std::move(net), manifest.at("iteration").get<std::uint64_t>()};
}

#define WISER_NET_INSTANTIATE(T)                                                             \
    template Network<T> build<T>(const NetConfig&);                                         \
    template Tensor<T> forward<T>(Network<T>&, const Tensor<T>&, RunMode, ForwardTrace<T>*); \
    template double compute_loss<T>(Network<T>&, const Tensor<T>&, const std::vector<int>&); \
    template BackwardResult<T> backward<T>(Network<T>&, const Tensor<T>&,                   \
                                           const std::vector<int>&);                        \
    template std::vector<ParamRef<T>> param_refs<T>(Network<T>&, GradStore<T>*);            \
    template AuditReport count_params_flops<T>(const Network<T>&);                          \
    template double avg_kernel_correlation<T>(const Network<T>&);                           \
    template DiagnosticsReport cosine_similarity_diag<T>(const Network<T>&,                 \
                                                         const std::vector<PlanarImage>&,   \
                                                         const std::vector<PlanarImage>&);  \
    template void save_checkpoint<T>(const Network<T>&, std::uint64_t, const std::string&); \
    template std::pair<Network<T>, std::uint64_t> load_checkpoint<T>(const std::string&)

WISER_NET_INSTANTIATE(float);
WISER_NET_INSTANTIATE(double);

#undef WISER_NET_INSTANTIATE

}  // namespace wiser
