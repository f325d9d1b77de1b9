// wiser: command-line front end for the steganalysis toolkit.
// One subcommand per experiment; every option can also come from a JSON
// config file (--config), with command-line flags winning. Unknown config
// keys are rejected. All randomized outputs are reproducible from the seed
// recorded in the adjacent manifest.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "wiser/errors.hpp"
#include "wiser/io.hpp"
#include "wiser/mmd.hpp"
#include "wiser/net.hpp"
#include "wiser/noise.hpp"
#include "wiser/rng.hpp"
#include "wiser/srm.hpp"
#include "wiser/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wiser;

namespace {

// Binds one JSON config key to one CLI flag of the same name, so the help
// text, the parser, and the config schema cannot drift apart.
class KeyedOptions {
public:
    explicit KeyedOptions(CLI::App* cmd) : cmd_(cmd) {
        cmd->add_option("--config", config_path_, "JSON config file; flags override its keys");
    }

    template <typename T>
    void bind(const std::string& key, T& var, const std::string& desc) {
        CLI::Option* opt = cmd_->add_option("--" + key, var, desc);
        entries_[key] = {opt, [&var](const json& j) { var = j.get<T>(); }};
    }

    // called after CLI11 parsing; config values fill in unset flags
    void apply_config() const {
        if (config_path_.empty()) return;
        json cfg;
        try {
            cfg = json::parse(read_file(config_path_));
        } catch (const json::exception& e) {
            throw BadConfig(std::string("config parse: ") + e.what());
        }
        if (!cfg.is_object()) throw BadConfig("config must be a JSON object");
        for (auto it = cfg.begin(); it != cfg.end(); ++it) {
            const auto found = entries_.find(it.key());
            if (found == entries_.end()) throw BadConfig("unknown config key: " + it.key());
            if (found->second.opt->count() == 0) {
                try {
                    found->second.set(it.value());
                } catch (const json::exception& e) {
                    throw BadConfig("config key '" + it.key() + "': " + e.what());
                }
            }
        }
    }

private:
    struct Entry {
        CLI::Option* opt;
        std::function<void(const json&)> set;
    };
    CLI::App* cmd_;
    std::string config_path_;
    std::map<std::string, Entry> entries_;
};

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<double> parse_grid(const std::string& grid) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < grid.size()) {
        std::size_t next = grid.find(',', pos);
        if (next == std::string::npos) next = grid.size();
        const std::string tok = grid.substr(pos, next - pos);
        if (!tok.empty()) out.push_back(std::stod(tok));
        pos = next + 1;
    }
    if (out.empty()) throw BadConfig("empty rho grid");
    for (double r : out)
        if (r < 0.0 || r > 1.0) throw BadConfig("rho grid values must lie in [0,1]");
    return out;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path == "-" || out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_file(out_path, text);
    }
}

Tensor<double> load_kernel(std::size_t index, const std::string& bank_path) {
    const KernelBank bank =
        bank_path.empty() ? KernelBank::load_default() : KernelBank::load_file(bank_path);
    return bank.kernel(index);
}

std::vector<std::string> list_ppms(const std::string& dir) {
    if (!fs::is_directory(dir)) throw NoInput("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ppm")
            names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    if (names.empty()) throw NoInput("no .ppm files in " + dir);
    return names;
}

// ---------------------------------------------------------------- gen-noise

struct GenNoiseArgs {
    std::size_t height = 64, width = 64, count = 1;
    double rate = 0.4, rho = 0.0;
    std::uint64_t seed = 0;
    std::string out_dir = "noise_out";
};

int cmd_gen_noise(const GenNoiseArgs& a) {
    fs::create_directories(a.out_dir);
    json files = json::array();
    for (std::size_t i = 0; i < a.count; ++i) {
        NoiseConfig cfg;
        cfg.rate = a.rate;
        cfg.rho = a.rho;
        cfg.seed = rng::derive_stream(a.seed, i);
        const NoiseField field = gen_correlated_noise(a.height, a.width, cfg);
        char name[32];
        std::snprintf(name, sizeof name, "noise_%04zu.wlt", i);
        save_tensor(field.as_tensor<float>(), (fs::path(a.out_dir) / name).string());
        files.push_back({{"name", name}, {"seed", cfg.seed}});
    }
    const json manifest{{"command", "gen-noise"}, {"height", a.height}, {"width", a.width},
                        {"rate", a.rate},         {"rho", a.rho},       {"seed", a.seed},
                        {"count", a.count},       {"prng", "splitmix64+xoshiro256++"},
                        {"files", files}};
    write_file((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

// -------------------------------------------------------------------- embed

struct EmbedArgs {
    std::string in_dir, out_dir = "stego_out";
    double rate = 0.4, rho = 0.0;
    std::uint64_t seed = 0;
};

int cmd_embed(const EmbedArgs& a) {
    if (a.in_dir.empty()) throw NoInput("embed needs --in_dir");
    const auto names = list_ppms(a.in_dir);
    fs::create_directories(a.out_dir);
    json files = json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        const PlanarImage cover = load_ppm((fs::path(a.in_dir) / names[i]).string());
        NoiseConfig cfg;
        cfg.rate = a.rate;
        cfg.rho = a.rho;
        cfg.seed = rng::derive_stream(a.seed, i);
        const NoiseField noise = gen_correlated_noise(cover.height(), cover.width(), cfg);
        save_ppm(apply_noise(cover, noise), (fs::path(a.out_dir) / names[i]).string());
        files.push_back({{"name", names[i]}, {"seed", cfg.seed}});
    }
    const json manifest{{"command", "embed"}, {"in_dir", a.in_dir}, {"rate", a.rate},
                        {"rho", a.rho},       {"seed", a.seed},     {"files", files}};
    write_file((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------- snr

struct SnrArgs {
    std::size_t covers = 50, size = 256, replications = 1, kernel_index = 5;
    double rate = 0.4;
    std::string rho_grid = "0,0.3,1";
    std::uint64_t seed = 0;
    std::string kernel_file;
    std::string out = "-";
};

int cmd_snr(const SnrArgs& a) {
    const Tensor<double> kernel = load_kernel(a.kernel_index, a.kernel_file);
    std::string csv =
        "rho,rate,snr_separate,snr_summed,predicted_ratio,measured_ratio,n_covers,seed\n";
    for (const double rho : parse_grid(a.rho_grid)) {
        for (std::size_t rep = 0; rep < a.replications; ++rep) {
            const std::uint64_t rep_seed = rng::derive_stream(a.seed, 100 + rep);
            const auto covers =
                synth_covers(a.covers, a.size, a.size, rng::derive_stream(rep_seed, 1),
                             CoverStyle::Smooth);
            NoiseConfig cfg;
            cfg.rate = a.rate;
            cfg.rho = rho;
            cfg.seed = rng::derive_stream(rep_seed, 2);
            const SnrReport r = snr_experiment(covers, cfg, kernel);
            csv += fmt6(rho) + "," + fmt6(a.rate) + "," + fmt6(r.snr_separate) + "," +
                   fmt6(r.snr_summed) + "," + fmt6(r.predicted_ratio) + "," +
                   fmt6(r.measured_ratio) + "," + std::to_string(a.covers) + "," +
                   std::to_string(rep_seed) + "\n";
        }
    }
    emit(a.out, csv);
    return 0;
}

// ---------------------------------------------------------------------- mmd

struct MmdArgs {
    std::size_t covers = 100, size = 256, replications = 1, kernel_index = 5;
    double rate = 0.4;
    std::string rho_grid = "0,0.5,1";
    std::uint64_t seed = 0;
    std::string feature_mode = "avg";  // avg | concat
    std::string kernel_file;
    std::string out = "-";
};

int cmd_mmd(const MmdArgs& a) {
    const Tensor<double> kernel = load_kernel(a.kernel_index, a.kernel_file);
    ChannelFeatureMode mode;
    if (a.feature_mode == "avg")
        mode = ChannelFeatureMode::Average;
    else if (a.feature_mode == "concat")
        mode = ChannelFeatureMode::Concat;
    else
        throw BadConfig("feature_mode must be avg or concat");

    std::string csv = "rho,rate,mmd_n,mmd_c,ratio,n_covers,seed\n";
    for (const double rho : parse_grid(a.rho_grid)) {
        for (std::size_t rep = 0; rep < a.replications; ++rep) {
            const std::uint64_t rep_seed = rng::derive_stream(a.seed, 300 + rep);
            const auto covers =
                synth_covers(a.covers, a.size, a.size, rng::derive_stream(rep_seed, 1),
                             CoverStyle::Textured);
            const MmdRatioResult r = mmd_ratio_experiment(
                covers, a.rate, rho, kernel, MmdConfig{}, rng::derive_stream(rep_seed, 2), mode);
            csv += fmt6(rho) + "," + fmt6(a.rate) + "," + fmt6(r.mmd_n) + "," + fmt6(r.mmd_c) +
                   "," + fmt6(r.ratio) + "," + std::to_string(a.covers) + "," +
                   std::to_string(rep_seed) + "\n";
        }
    }
    emit(a.out, csv);
    return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
    std::string train_dir, val_dir, out_dir = "train_out";
    double val_fraction = 0.2;
    std::size_t n = 1;
    std::string bottom_mode = "channelwise";
    bool bottom_learnable = true;
    std::string dtype = "real32";
    std::uint64_t init_seed = 1;
    double base_lr = 1e-3, power = 0.75, gamma = 1e-4, weight_decay = 5e-4, momentum = 0.9;
    std::size_t batch_size = 16, max_iters = 5000, checkpoint_every = 10000;
    std::uint64_t seed = 0;
    bool pair_batching = true;
    std::string decay_mode = "exempt";  // exempt | global
};

void split_pairs(const Dataset& all, double val_fraction, std::uint64_t seed, Dataset& train_set,
                 Dataset& val_set) {
    std::vector<std::size_t> idx(all.pairs());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng::Xoshiro256pp gen(rng::derive_stream(seed, 9000));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[gen.next_below(i)]);
    std::size_t val_count =
        static_cast<std::size_t>(val_fraction * static_cast<double>(idx.size()));
    val_count = std::max<std::size_t>(1, std::min(val_count, idx.size() - 1));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        Dataset& dst = i < val_count ? val_set : train_set;
        dst.covers.push_back(all.covers[idx[i]]);
        dst.stegos.push_back(all.stegos[idx[i]]);
    }
}

template <typename T>
int run_train(const TrainArgs& a, const Dataset& train_set, const Dataset& val_set) {
    NetConfig ncfg;
    ncfg.n = a.n;
    ncfg.input_h = train_set.covers[0].height();
    ncfg.input_w = train_set.covers[0].width();
    ncfg.bottom_mode = bottom_mode_from_string(a.bottom_mode);
    ncfg.bottom_learnable = a.bottom_learnable;
    ncfg.dtype = dtype_of<T>();
    ncfg.init_seed = a.init_seed;

    TrainConfig tcfg;
    tcfg.base_lr = a.base_lr;
    tcfg.power = a.power;
    tcfg.gamma = a.gamma;
    tcfg.weight_decay = a.weight_decay;
    tcfg.momentum = a.momentum;
    tcfg.batch_size = a.batch_size;
    tcfg.max_iters = a.max_iters;
    tcfg.checkpoint_every = a.checkpoint_every;
    tcfg.seed = a.seed;
    tcfg.pair_batching = a.pair_batching;
    if (a.decay_mode == "exempt")
        tcfg.decay_exempt_bn_bias = true;
    else if (a.decay_mode == "global")
        tcfg.decay_exempt_bn_bias = false;
    else
        throw BadConfig("decay_mode must be exempt or global");

    fs::create_directories(a.out_dir);
    auto on_checkpoint = [&](const RunLogRow& row, const Network<T>& net) {
        if (row.iteration == 0) return;  // periodic files only; best.wckpt covers iteration 0
        char name[48];
        std::snprintf(name, sizeof name, "ckpt_%09llu.wckpt",
                      static_cast<unsigned long long>(row.iteration));
        save_checkpoint(net, row.iteration, (fs::path(a.out_dir) / name).string());
    };

    const std::function<void(const RunLogRow&, const Network<T>&)> cb = on_checkpoint;
    const TrainResult<T> result = train(build<T>(ncfg), tcfg, train_set, val_set, cb);

    save_checkpoint(result.best, result.best_iteration,
                    (fs::path(a.out_dir) / "best.wckpt").string());
    write_file((fs::path(a.out_dir) / "runlog.csv").string(), runlog_csv(result.log));
    write_file((fs::path(a.out_dir) / "runlog.jsonl").string(), runlog_jsonl(result.log));
    const json manifest{{"command", "train"},
                        {"seed", a.seed},
                        {"init_seed", a.init_seed},
                        {"train_pairs", train_set.pairs()},
                        {"val_pairs", val_set.pairs()},
                        {"best_iteration", result.best_iteration},
                        {"best_val_accuracy", result.best_val_acc}};
    write_file((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    std::printf("best_iteration=%llu\nbest_val_accuracy=%s\n",
                static_cast<unsigned long long>(result.best_iteration),
                fmt6(result.best_val_acc).c_str());
    return 0;
}

int cmd_train(const TrainArgs& a) {
    if (a.train_dir.empty()) throw NoInput("train needs --train_dir");
    Dataset train_set, val_set;
    if (!a.val_dir.empty()) {
        train_set = load_dataset_dir(a.train_dir);
        val_set = load_dataset_dir(a.val_dir);
    } else {
        const Dataset all = load_dataset_dir(a.train_dir);
        if (all.pairs() < 2)
            throw EmptyDataset("need at least 2 pairs to split out a validation set");
        split_pairs(all, a.val_fraction, a.seed, train_set, val_set);
    }
    if (a.dtype == "real32") return run_train<float>(a, train_set, val_set);
    if (a.dtype == "real64") return run_train<double>(a, train_set, val_set);
    throw BadConfig("dtype must be real32 or real64");
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
    std::string checkpoint, data_dir;
};

template <typename T>
double run_eval(const std::string& ckpt, const Dataset& data) {
    auto [net, iter] = load_checkpoint<T>(ckpt);
    (void)iter;
    return evaluate(net, data);
}

int cmd_eval(const EvalArgs& a) {
    if (a.checkpoint.empty() || a.data_dir.empty())
        throw NoInput("eval needs --checkpoint and --data_dir");
    const Dataset data = load_dataset_dir(a.data_dir);
    const NetConfig cfg = peek_checkpoint_config(a.checkpoint);
    const double acc = cfg.dtype == Dtype::Real32 ? run_eval<float>(a.checkpoint, data)
                                                  : run_eval<double>(a.checkpoint, data);
    std::printf("accuracy=%s\n", fmt6(acc).c_str());
    return 0;
}

// ----------------------------------------------------------------- diagnose

struct DiagnoseArgs {
    std::string checkpoint, images_dir;
};

template <typename T>
int run_diagnose(const DiagnoseArgs& a) {
    auto [net, iter] = load_checkpoint<T>(a.checkpoint);
    std::printf("iteration=%llu\n", static_cast<unsigned long long>(iter));
    std::printf("cw_bar=%s\n", fmt6(avg_kernel_correlation(net)).c_str());
    if (!a.images_dir.empty()) {
        const Dataset data = load_dataset_dir(a.images_dir);
        const DiagnosticsReport rep = cosine_similarity_diag(net, data.covers, data.stegos);
        std::printf("s_cover=%s\n", fmt6(rep.s_cover).c_str());
        std::printf("s_stego=%s\n", fmt6(rep.s_stego).c_str());
    }
    return 0;
}

int cmd_diagnose(const DiagnoseArgs& a) {
    if (a.checkpoint.empty()) throw NoInput("diagnose needs --checkpoint");
    const NetConfig cfg = peek_checkpoint_config(a.checkpoint);
    return cfg.dtype == Dtype::Real32 ? run_diagnose<float>(a) : run_diagnose<double>(a);
}

// -------------------------------------------------------------------- audit

struct AuditArgs {
    std::size_t n = 9, input_h = 512, input_w = 512;
    std::string bottom_mode = "channelwise";
    bool bottom_learnable = true;
};

int cmd_audit(const AuditArgs& a) {
    NetConfig cfg;
    cfg.n = a.n;
    cfg.input_h = a.input_h;
    cfg.input_w = a.input_w;
    cfg.bottom_mode = bottom_mode_from_string(a.bottom_mode);
    cfg.bottom_learnable = a.bottom_learnable;
    const auto net = build<float>(cfg);
    const AuditReport rep = count_params_flops(net);
    std::printf("layer,params,flops\n");
    for (const auto& row : rep.rows)
        std::printf("%s,%zu,%zu\n", row.name.c_str(), row.params, row.flops);
    std::printf("params=%zu\n", rep.params);
    std::printf("flops=%zu\n", rep.flops);
    // Published figures for the n=9, 512x512 architecture; the publication's
    // counting convention is unstated, so the numbers are shown side by side
    // rather than reconciled. Ours: learnable scalars, 1 MAC = 2 FLOPs.
    std::printf("published_params=2.12e6\n");
    std::printf("published_flops=4.11e9\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wiser: color-image steganalysis research toolkit"};
    app.require_subcommand(1);

    GenNoiseArgs gn;
    CLI::App* gen_noise_cmd =
        app.add_subcommand("gen-noise", "generate +-1 stego-noise fields as WLTENSOR files");
    KeyedOptions gn_keys(gen_noise_cmd);
    gn_keys.bind("height", gn.height, "field height in pixels");
    gn_keys.bind("width", gn.width, "field width in pixels");
    gn_keys.bind("rate", gn.rate, "fraction of modified pixels per band");
    gn_keys.bind("rho", gn.rho, "target red-green and red-blue correlation");
    gn_keys.bind("seed", gn.seed, "master seed");
    gn_keys.bind("count", gn.count, "number of fields");
    gn_keys.bind("out_dir", gn.out_dir, "output directory");

    EmbedArgs em;
    CLI::App* embed_cmd = app.add_subcommand("embed", "write pseudo-stego PPMs from cover PPMs");
    KeyedOptions em_keys(embed_cmd);
    em_keys.bind("in_dir", em.in_dir, "directory of cover .ppm files");
    em_keys.bind("out_dir", em.out_dir, "output directory");
    em_keys.bind("rate", em.rate, "fraction of modified pixels per band");
    em_keys.bind("rho", em.rho, "target inter-band noise correlation");
    em_keys.bind("seed", em.seed, "master seed");

    SnrArgs sn;
    CLI::App* snr_cmd = app.add_subcommand("snr", "summed vs. per-band SNR experiment (CSV)");
    KeyedOptions sn_keys(snr_cmd);
    sn_keys.bind("covers", sn.covers, "synthetic covers per replication");
    sn_keys.bind("size", sn.size, "cover extent in pixels");
    sn_keys.bind("rate", sn.rate, "modification rate");
    sn_keys.bind("rho_grid", sn.rho_grid, "comma-separated correlation grid");
    sn_keys.bind("replications", sn.replications, "independent repetitions per rho");
    sn_keys.bind("seed", sn.seed, "master seed");
    sn_keys.bind("kernel_index", sn.kernel_index, "filter-bank index (1..30, 5 = K5)");
    sn_keys.bind("kernel_file", sn.kernel_file, "override filter definition file");
    sn_keys.bind("out", sn.out, "CSV path, - for stdout");

    MmdArgs mm;
    CLI::App* mmd_cmd =
        app.add_subcommand("mmd", "channel-wise vs. normal convolution MMD experiment (CSV)");
    KeyedOptions mm_keys(mmd_cmd);
    mm_keys.bind("covers", mm.covers, "synthetic covers per replication");
    mm_keys.bind("size", mm.size, "cover extent in pixels");
    mm_keys.bind("rate", mm.rate, "modification rate");
    mm_keys.bind("rho_grid", mm.rho_grid, "comma-separated correlation grid");
    mm_keys.bind("replications", mm.replications, "independent repetitions per rho");
    mm_keys.bind("seed", mm.seed, "master seed");
    mm_keys.bind("kernel_index", mm.kernel_index, "filter-bank index (1..30, 5 = K5)");
    mm_keys.bind("kernel_file", mm.kernel_file, "override filter definition file");
    mm_keys.bind("feature_mode", mm.feature_mode, "channel-wise features: avg or concat");
    mm_keys.bind("out", mm.out, "CSV path, - for stdout");

    TrainArgs tr;
    CLI::App* train_cmd = app.add_subcommand("train", "mini-batch SGD training");
    KeyedOptions tr_keys(train_cmd);
    tr_keys.bind("train_dir", tr.train_dir, "dataset dir with cover/ and stego/");
    tr_keys.bind("val_dir", tr.val_dir, "validation dataset dir (else split train_dir)");
    tr_keys.bind("val_fraction", tr.val_fraction, "validation share when splitting");
    tr_keys.bind("out_dir", tr.out_dir, "checkpoints and run log directory");
    tr_keys.bind("n", tr.n, "model magnification factor");
    tr_keys.bind("bottom_mode", tr.bottom_mode, "channelwise | normal | concat | interleave");
    tr_keys.bind("bottom_learnable", tr.bottom_learnable, "train the bottom kernels");
    tr_keys.bind("dtype", tr.dtype, "real32 | real64");
    tr_keys.bind("init_seed", tr.init_seed, "upper-layer initialization seed");
    tr_keys.bind("base_lr", tr.base_lr, "initial learning rate");
    tr_keys.bind("power", tr.power, "inv schedule power");
    tr_keys.bind("gamma", tr.gamma, "inv schedule gamma");
    tr_keys.bind("weight_decay", tr.weight_decay, "L2 weight decay");
    tr_keys.bind("momentum", tr.momentum, "SGD momentum");
    tr_keys.bind("batch_size", tr.batch_size, "samples per iteration");
    tr_keys.bind("max_iters", tr.max_iters, "training iterations");
    tr_keys.bind("checkpoint_every", tr.checkpoint_every, "iterations between checkpoints");
    tr_keys.bind("seed", tr.seed, "training seed (shuffling, splits)");
    tr_keys.bind("pair_batching", tr.pair_batching, "keep cover and stego in the same batch");
    tr_keys.bind("decay_mode", tr.decay_mode,
                 "exempt (BN/bias skip decay) | global (decay everything)");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "accuracy of a checkpoint on a dataset");
    KeyedOptions ev_keys(eval_cmd);
    ev_keys.bind("checkpoint", ev.checkpoint, "checkpoint file");
    ev_keys.bind("data_dir", ev.data_dir, "dataset dir with cover/ and stego/");

    DiagnoseArgs dg;
    CLI::App* diagnose_cmd =
        app.add_subcommand("diagnose", "kernel-diversity and band-mean diagnostics");
    KeyedOptions dg_keys(diagnose_cmd);
    dg_keys.bind("checkpoint", dg.checkpoint, "checkpoint file");
    dg_keys.bind("images_dir", dg.images_dir, "optional dataset dir for the cosine report");

    AuditArgs au;
    CLI::App* audit_cmd = app.add_subcommand("audit", "parameter and FLOP audit");
    KeyedOptions au_keys(audit_cmd);
    au_keys.bind("n", au.n, "model magnification factor");
    au_keys.bind("input_h", au.input_h, "input height");
    au_keys.bind("input_w", au.input_w, "input width");
    au_keys.bind("bottom_mode", au.bottom_mode, "channelwise | normal | concat | interleave");
    au_keys.bind("bottom_learnable", au.bottom_learnable, "count bottom kernels as learnable");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_noise_cmd->parsed()) {
            gn_keys.apply_config();
            return cmd_gen_noise(gn);
        }
        if (embed_cmd->parsed()) {
            em_keys.apply_config();
            return cmd_embed(em);
        }
        if (snr_cmd->parsed()) {
            sn_keys.apply_config();
            return cmd_snr(sn);
        }
        if (mmd_cmd->parsed()) {
            mm_keys.apply_config();
            return cmd_mmd(mm);
        }
        if (train_cmd->parsed()) {
            tr_keys.apply_config();
            return cmd_train(tr);
        }
        if (eval_cmd->parsed()) {
            ev_keys.apply_config();
            return cmd_eval(ev);
        }
        if (diagnose_cmd->parsed()) {
            dg_keys.apply_config();
            return cmd_diagnose(dg);
        }
        if (audit_cmd->parsed()) {
            au_keys.apply_config();
            return cmd_audit(au);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: Unhandled: %s\n", e.what());
        return 1;
    }
    return 0;
}
