#include "wiser/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wiser/detail/kernel_glue.hpp"
#include "wiser/errors.hpp"
#include "wiser/io.hpp"
#include "wiser/rng.hpp"

namespace wiser {

namespace fs = std::filesystem;
using namespace wiser::detail;

double lr_at(const TrainConfig& cfg, std::uint64_t iter) {
    return cfg.base_lr * std::pow(1.0 + cfg.gamma * static_cast<double>(iter), -cfg.power);
}

Dataset load_dataset_dir(const std::string& dir) {
    const fs::path cover_dir = fs::path(dir) / "cover";
    const fs::path stego_dir = fs::path(dir) / "stego";
    if (!fs::is_directory(cover_dir) || !fs::is_directory(stego_dir))
        throw NoInput("expected cover/ and stego/ under " + dir);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(cover_dir))
        if (e.is_regular_file() && e.path().extension() == ".ppm")
            names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    Dataset data;
    for (const auto& name : names) {
        const fs::path stego = stego_dir / name;
        if (!fs::exists(stego)) continue;
        data.covers.push_back(load_ppm((cover_dir / name).string()));
        data.stegos.push_back(load_ppm(stego.string()));
    }
    if (data.covers.empty()) throw EmptyDataset("no matched cover/stego pairs in " + dir);
    return data;
}

template <typename T>
Tensor<T> make_batch(const std::vector<const PlanarImage*>& images) {
    if (images.empty()) throw EmptyDataset("empty batch");
    const std::size_t H = images[0]->height(), W = images[0]->width();
    Tensor<T> batch({images.size(), 3, H, W});
    for (std::size_t b = 0; b < images.size(); ++b) {
        if (images[b]->height() != H || images[b]->width() != W)
            throw ShapeMismatch("images in a batch must share extents");
        for (std::size_t c = 0; c < 3; ++c) {
            const auto& src = images[b]->band(c);
            T* dst = batch.data() + (b * 3 + c) * H * W;
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
        }
    }
    return batch;
}

template <typename T>
Velocity<T> init_velocity(Network<T>& net) {
    Velocity<T> vel;
    for (const auto& ref : param_refs(net)) vel.v.emplace_back(ref.value->shape());
    return vel;
}

template <typename T>
void sgd_step(Network<T>& net, GradStore<T>& grads, Velocity<T>& vel, const TrainConfig& cfg,
              std::uint64_t iter) {
    const auto refs = param_refs(net, &grads);
    if (refs.size() != vel.v.size()) throw ShapeMismatch("velocity store out of step");
    const double lr = lr_at(cfg, iter);
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& ref = refs[i];
        if (!ref.grad || ref.grad->size() != ref.value->size())
            throw ShapeMismatch(std::string("gradient missing for ") + ref.name);
        const double wd =
            cfg.decay_exempt_bn_bias && ref.decay_exempt ? 0.0 : cfg.weight_decay;
        k_sgd(be(), ref.value->data(), vel.v[i].data(), ref.grad->data(), static_cast<T>(lr),
              static_cast<T>(cfg.momentum), static_cast<T>(wd), ref.value->size());
    }
}

namespace {

// deterministic Fisher-Yates
template <typename V>
void shuffle_indices(V& idx, rng::Xoshiro256pp& gen) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[gen.next_below(i)]);
}

template <typename T>
double infer_loss(Network<T>& net, const Tensor<T>& batch, const std::vector<int>& labels) {
    const Tensor<T> probs = forward(net, batch, RunMode::Infer);
    double loss = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const double p = static_cast<double>(probs(b, static_cast<std::size_t>(labels[b])));
        loss += -std::log(std::max(p, 1e-300));
    }
    return loss / static_cast<double>(labels.size());
}

}  // namespace

template <typename T>
double evaluate(Network<T>& net, const Dataset& data) {
    if (data.pairs() == 0) throw EmptyDataset("evaluate needs a nonempty dataset");
    std::vector<const PlanarImage*> images;
    std::vector<int> labels;
    for (std::size_t i = 0; i < data.pairs(); ++i) {
        images.push_back(&data.covers[i]);
        labels.push_back(0);
        images.push_back(&data.stegos[i]);
        labels.push_back(1);
    }
    std::size_t correct = 0;
    const std::size_t chunk = 16;
    for (std::size_t base = 0; base < images.size(); base += chunk) {
        const std::size_t count = std::min(chunk, images.size() - base);
        std::vector<const PlanarImage*> part(images.begin() + base,
                                             images.begin() + base + count);
        const Tensor<T> batch = make_batch<T>(part);
        const Tensor<T> probs = forward(net, batch, RunMode::Infer);
        for (std::size_t b = 0; b < count; ++b) {
            const int pred = probs(b, std::size_t(0)) >= probs(b, std::size_t(1)) ? 0 : 1;
            if (pred == labels[base + b]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(images.size());
}

namespace {

// endless shuffled sample stream; pair mode keeps cover+stego adjacent
template <typename T>
class BatchStream {
public:
    BatchStream(const Dataset& data, const TrainConfig& cfg)
        : data_(data), cfg_(cfg), gen_(rng::derive_stream(cfg.seed, 7001)) {
        if (cfg_.pair_batching) {
            order_.resize(data_.pairs());
        } else {
            order_.resize(2 * data_.pairs());
        }
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        pos_ = order_.size();  // trigger reshuffle on first use
    }

    std::pair<Tensor<T>, std::vector<int>> next() {
        std::vector<const PlanarImage*> images;
        std::vector<int> labels;
        const std::size_t want = cfg_.batch_size;
        while (images.size() < want) {
            if (pos_ == order_.size()) {
                shuffle_indices(order_, gen_);
                pos_ = 0;
            }
            const std::size_t id = order_[pos_++];
            if (cfg_.pair_batching) {
                images.push_back(&data_.covers[id]);
                labels.push_back(0);
                images.push_back(&data_.stegos[id]);
                labels.push_back(1);
            } else {
                images.push_back(id < data_.pairs() ? &data_.covers[id]
                                                    : &data_.stegos[id - data_.pairs()]);
                labels.push_back(id < data_.pairs() ? 0 : 1);
            }
        }
        images.resize(want);
        labels.resize(want);
        return {make_batch<T>(images), std::move(labels)};
    }

private:
    const Dataset& data_;
    const TrainConfig& cfg_;
    rng::Xoshiro256pp gen_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
};

template <typename T>
RunLogRow make_row(Network<T>& net, const TrainConfig& cfg, std::uint64_t iter,
                   double train_loss, const Dataset& val_set,
                   const std::vector<PlanarImage>& diag_covers,
                   const std::vector<PlanarImage>& diag_stegos) {
    RunLogRow row;
    row.iteration = iter;
    row.lr = lr_at(cfg, iter);
    row.train_loss = train_loss;
    row.val_accuracy = evaluate(net, val_set);
    if (net.cfg.bottom_mode == BottomMode::Channelwise) {
        const DiagnosticsReport rep = cosine_similarity_diag(net, diag_covers, diag_stegos);
        row.cw_bar = rep.cw_bar;
        row.s_cover = rep.s_cover;
        row.s_stego = rep.s_stego;
    } else {
        row.cw_bar = row.s_cover = row.s_stego = std::nan("");
    }
    return row;
}

}  // namespace

template <typename T>
TrainResult<T> train(Network<T> net, const TrainConfig& cfg, const Dataset& train_set,
                     const Dataset& val_set,
                     const std::function<void(const RunLogRow&, const Network<T>&)>&
                         on_checkpoint,
                     const std::function<bool(const RunLogRow&)>& stop_request) {
    if (train_set.pairs() == 0 || val_set.pairs() == 0)
        throw EmptyDataset("train and validation sets must both hold pairs");
    if (cfg.batch_size < 2) throw BadConfig("batch size must be at least 2");
    if (cfg.checkpoint_every == 0) throw BadConfig("checkpoint_every must be positive");

    // diagnostics subset: up to 4 validation pairs
    std::vector<PlanarImage> diag_covers, diag_stegos;
    for (std::size_t i = 0; i < std::min<std::size_t>(4, val_set.pairs()); ++i) {
        diag_covers.push_back(val_set.covers[i]);
        diag_stegos.push_back(val_set.stegos[i]);
    }

    BatchStream<T> stream(train_set, cfg);
    Velocity<T> vel = init_velocity(net);

    TrainResult<T> result;
    auto record = [&](std::uint64_t iter, double loss) {
        const RunLogRow row = make_row(net, cfg, iter, loss, val_set, diag_covers, diag_stegos);
        result.log.push_back(row);
        if (result.log.size() == 1 || row.val_accuracy > result.best_val_acc) {
            result.best_val_acc = row.val_accuracy;
            result.best_iteration = iter;
            result.best = net;
        }
        if (on_checkpoint) on_checkpoint(row, net);
        return stop_request && stop_request(row);
    };

    // iteration-0 row: infer-mode loss on a probe batch, before any update
    {
        BatchStream<T> probe(train_set, cfg);
        auto [batch, labels] = probe.next();
        if (record(0, infer_loss(net, batch, labels))) return result;
    }

    double window_loss = 0.0;
    std::size_t window_count = 0;
    for (std::uint64_t iter = 0; iter < cfg.max_iters; ++iter) {
        auto [batch, labels] = stream.next();
        BackwardResult<T> back = backward(net, batch, labels);
        if (!std::isfinite(back.loss))
            throw DivergedLoss("loss " + std::to_string(back.loss) + " at iteration " +
                               std::to_string(iter) + "; aborting with state dump");
        sgd_step(net, back.grads, vel, cfg, iter);
        window_loss += back.loss;
        ++window_count;
        if ((iter + 1) % cfg.checkpoint_every == 0) {
            if (record(iter + 1, window_loss / static_cast<double>(window_count))) return result;
            window_loss = 0.0;
            window_count = 0;
        }
    }
    return result;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

std::string runlog_csv(const std::vector<RunLogRow>& log) {
    std::string out = "iteration,lr,train_loss,val_accuracy,cw_bar,s_cover,s_stego\n";
    for (const auto& r : log) {
        out += std::to_string(r.iteration) + "," + format_double(r.lr) + "," +
               format_double(r.train_loss) + "," + format_double(r.val_accuracy) + "," +
               format_double(r.cw_bar) + "," + format_double(r.s_cover) + "," +
               format_double(r.s_stego) + "\n";
    }
    return out;
}

std::string runlog_jsonl(const std::vector<RunLogRow>& log) {
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("null"); };
    std::string out;
    for (const auto& r : log) {
        out += "{\"iteration\":" + std::to_string(r.iteration) + ",\"lr\":" + num(r.lr) +
               ",\"train_loss\":" + num(r.train_loss) +
               ",\"val_accuracy\":" + num(r.val_accuracy) + ",\"cw_bar\":" + num(r.cw_bar) +
               ",\"s_cover\":" + num(r.s_cover) + ",\"s_stego\":" + num(r.s_stego) + "}\n";
    }
    return out;
}

#define WISER_TRAIN_INSTANTIATE(T)                                                          \
    template Tensor<T> make_batch<T>(const std::vector<const PlanarImage*>&);               \
    template Velocity<T> init_velocity<T>(Network<T>&);                                     \
    template void sgd_step<T>(Network<T>&, GradStore<T>&, Velocity<T>&, const TrainConfig&, \
                              std::uint64_t);                                               \
    template double evaluate<T>(Network<T>&, const Dataset&);                               \
    template TrainResult<T> train<T>(                                                       \
        Network<T>, const TrainConfig&, const Dataset&, const Dataset&,                     \
        const std::function<void(const RunLogRow&, const Network<T>&)>&,                    \
        const std::function<bool(const RunLogRow&)>&)

WISER_TRAIN_INSTANTIATE(float);
WISER_TRAIN_INSTANTIATE(double);

#undef WISER_TRAIN_INSTANTIATE

}  // namespace wiser
