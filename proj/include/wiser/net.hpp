#ifndef WISER_NET_HPP
#define WISER_NET_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wiser/conv.hpp"
#include "wiser/image.hpp"
#include "wiser/srm.hpp"
#include "wiser/tensor.hpp"

namespace wiser {

enum class BottomMode { Channelwise, Normal, Concat, Interleave };

const char* to_string(BottomMode m);
BottomMode bottom_mode_from_string(const std::string& s);

struct NetConfig {
    std::size_t n = 9;  // model magnification factor
    std::size_t input_h = 512, input_w = 512;
    BottomMode bottom_mode = BottomMode::Channelwise;
    bool bottom_learnable = true;
    Dtype dtype = Dtype::Real32;
    std::uint64_t init_seed = 1;  // upper-layer initialization stream
};

struct LayerShape {
    std::string name;
    std::vector<std::size_t> extents;  // [C,H,W] for maps, [D] for vectors
};

// Closed-form output shapes of every stage; throws IncompatibleShape when
// the pooling chain collapses. No allocation, usable at any input size.
std::vector<LayerShape> compute_shape_table(const NetConfig& cfg);

// Separate stage -> three wide reunion blocks -> 800/400/200/2 dense head.
// Convolutions carry no biases (BN absorbs the shift); dense layers do.
template <typename T>
struct Network {
    NetConfig cfg;

    Tensor<T> bottom_w;  // channelwise [3,30,5,5]; normal [30,3,5,5]; concat/interleave [30,1,5,5]
    Tensor<T> conv1_w, conv2_w, conv3_w;
    BnState<T> bn1, bn2, bn3;
    std::array<Tensor<T>, 4> fc_w;
    std::array<Tensor<T>, 4> fc_b;

    ConvSpec bottom_spec, conv1_spec, conv2_spec, conv3_spec;
    PoolSpec pool1_spec, pool2_spec;
    std::size_t pool3_h = 0, pool3_w = 0;  // final pool is a global average
    std::size_t bottom_channels = 0;
    std::size_t flat_dim = 0;
};

template <typename T>
Network<T> build(const NetConfig& cfg);

enum class RunMode { Train, Infer };

template <typename T>
struct ForwardTrace {
    Tensor<T> pre;  // network input after band preprocessing
    Tensor<T> bottom_out;
    Tensor<T> conv1_out, abs_out, relu1_in, relu1_out, pool1_out;
    Tensor<T> conv2_out, relu2_in, relu2_out, pool2_out;
    Tensor<T> conv3_out, relu3_in, relu3_out;
    Tensor<T> flat;                  // [B, 128n]
    std::array<Tensor<T>, 4> fc_z;   // pre-activation outputs, fc_z[3] = logits
    std::array<Tensor<T>, 3> fc_a;   // hidden activations
    Tensor<T> probs;
    BnCache bn1_cache, bn2_cache, bn3_cache;
};

// batch [B,3,H,W] of raw intensities -> class probabilities [B,2],
// class order (cover, stego). Train mode uses batch statistics in BN and
// updates the running estimates.
template <typename T>
Tensor<T> forward(Network<T>& net, const Tensor<T>& batch, RunMode mode,
                  ForwardTrace<T>* trace = nullptr);

template <typename T>
struct GradStore {
    Tensor<T> bottom_w;  // zero-shaped when the bottom is fixed
    Tensor<T> conv1_w, conv2_w, conv3_w;
    std::array<Tensor<T>, 3> bn_gamma, bn_beta;
    std::array<Tensor<T>, 4> fc_w, fc_b;
};

template <typename T>
struct BackwardResult {
    double loss = 0.0;
    GradStore<T> grads;
};

// Mean cross-entropy over the batch; labels are 0 = cover, 1 = stego.
// Runs a train-mode forward internally.
template <typename T>
BackwardResult<T> backward(Network<T>& net, const Tensor<T>& batch,
                           const std::vector<int>& labels);

template <typename T>
double compute_loss(Network<T>& net, const Tensor<T>& batch, const std::vector<int>& labels);

// Uniform access to learnable parameters (SGD, checkpoints, gradient checks).
template <typename T>
struct ParamRef {
    const char* name;
    Tensor<T>* value;
    Tensor<T>* grad;     // null when no gradient store given
    bool decay_exempt;   // BN gamma/beta and dense biases
};

template <typename T>
std::vector<ParamRef<T>> param_refs(Network<T>& net, GradStore<T>* grads = nullptr);

struct AuditRow {
    std::string name;
    std::size_t params = 0;
    std::size_t flops = 0;
};

struct AuditReport {
    std::size_t params = 0;  // learnable scalars
    std::size_t flops = 0;   // one forward pass, 1 MAC = 2 FLOPs
    std::vector<AuditRow> rows;
};

template <typename T>
AuditReport count_params_flops(const Network<T>& net);

// (mu1 + mu2 + mu3) / (sqrt(3) * ||mu||); 0 for the zero vector.
double cosine_to_ones(double m1, double m2, double m3);

// Mean pairwise Pearson correlation of the 30 bottom-kernel triples.
// Bitwise-equal kernels contribute exactly 1.
template <typename T>
double avg_kernel_correlation(const Network<T>& net);

struct DiagnosticsReport {
    double cw_bar = 0.0;
    std::vector<double> s_cover_per_k, s_stego_per_k;  // mean |S_k| over each subset
    double s_cover = 0.0, s_stego = 0.0;               // overall means
};

template <typename T>
DiagnosticsReport cosine_similarity_diag(const Network<T>& net,
                                         const std::vector<PlanarImage>& covers,
                                         const std::vector<PlanarImage>& stegos);

// Checkpoint container: magic "WLCKPT01", u64 manifest length, JSON manifest
// (config, iteration, tensor directory), then concatenated WLTENSOR blobs.
// Round-trips bit-exactly.
template <typename T>
void save_checkpoint(const Network<T>& net, std::uint64_t iteration, const std::string& path);

NetConfig peek_checkpoint_config(const std::string& path);

template <typename T>
std::pair<Network<T>, std::uint64_t> load_checkpoint(const std::string& path);

}  // namespace wiser

#endif
