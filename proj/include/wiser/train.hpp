#ifndef WISER_TRAIN_HPP
#define WISER_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wiser/image.hpp"
#include "wiser/net.hpp"

namespace wiser {

struct TrainConfig {
    double base_lr = 1e-3;
    double power = 0.75;
    double gamma = 1e-4;
    double weight_decay = 5e-4;
    double momentum = 0.9;
    std::size_t batch_size = 16;
    std::size_t max_iters = 5000;
    std::size_t checkpoint_every = 10000;
    std::uint64_t seed = 0;
    bool pair_batching = true;        // cover and its stego travel together
    bool decay_exempt_bn_bias = true; // false = one global decay for everything
};

// "inv" schedule: base_lr * (1 + gamma*iter)^(-power)
double lr_at(const TrainConfig& cfg, std::uint64_t iter);

// Cover/stego pairs matched by index.
struct Dataset {
    std::vector<PlanarImage> covers, stegos;
    std::size_t pairs() const { return covers.size(); }
};

// Expects <dir>/cover and <dir>/stego holding PPMs matched by filename.
Dataset load_dataset_dir(const std::string& dir);

template <typename T>
Tensor<T> make_batch(const std::vector<const PlanarImage*>& images);

template <typename T>
struct Velocity {
    std::vector<Tensor<T>> v;  // aligned with param_refs(net)
};

template <typename T>
Velocity<T> init_velocity(Network<T>& net);

// v <- momentum*v - lr_at(iter)*(g + wd*p); p <- p + v.
// BN gamma/beta and dense biases skip the decay term unless the config
// selects global decay.
template <typename T>
void sgd_step(Network<T>& net, GradStore<T>& grads, Velocity<T>& vel, const TrainConfig& cfg,
              std::uint64_t iter);

struct RunLogRow {
    std::uint64_t iteration = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double cw_bar = 0.0;   // NaN for non-channelwise bottoms
    double s_cover = 0.0;  // NaN likewise
    double s_stego = 0.0;
};

template <typename T>
struct TrainResult {
    std::vector<RunLogRow> log;
    Network<T> best;
    std::uint64_t best_iteration = 0;
    double best_val_acc = 0.0;
};

// Mini-batch SGD with the inv schedule. A RunLog row is recorded before any
// update (iteration 0) and after every checkpoint_every iterations; the
// returned network is the row with the highest validation accuracy, earliest
// iteration on ties. on_checkpoint, when set, fires for every recorded row;
// stop_request, when set, ends the run after any recorded row it accepts.
template <typename T>
TrainResult<T> train(Network<T> net, const TrainConfig& cfg, const Dataset& train_set,
                     const Dataset& val_set,
                     const std::function<void(const RunLogRow&, const Network<T>&)>&
                         on_checkpoint = nullptr,
                     const std::function<bool(const RunLogRow&)>& stop_request = nullptr);

// Fraction of correct argmax predictions in infer mode; probability ties
// resolve to cover.
template <typename T>
double evaluate(Network<T>& net, const Dataset& data);

std::string runlog_csv(const std::vector<RunLogRow>& log);
std::string runlog_jsonl(const std::vector<RunLogRow>& log);

}  // namespace wiser

#endif
