#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wiser/io.hpp"
#include "wiser/net.hpp"
#include "wiser/noise.hpp"
#include "wiser/rng.hpp"

using namespace wiser;

namespace {

Tensor<float> random_batch(std::size_t B, std::size_t H, std::size_t W, std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    Tensor<float> t({B, 3, H, W});
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<float>(gen.next_double() * 255.0);
    return t;
}

NetConfig small_cfg(std::size_t n = 1, std::size_t hw = 16,
                    BottomMode mode = BottomMode::Channelwise) {
    NetConfig cfg;
    cfg.n = n;
    cfg.input_h = cfg.input_w = hw;
    cfg.bottom_mode = mode;
    return cfg;
}

}  // namespace

TEST_CASE("shape table at n=9, 512x512 matches the published configuration") {
    NetConfig cfg;  // defaults are n=9, 512x512, channelwise
    const auto table = compute_shape_table(cfg);
    REQUIRE(table.size() == 12);
    CHECK(table[0].extents == std::vector<std::size_t>{90, 512, 512});
    CHECK(table[1].extents == std::vector<std::size_t>{72, 256, 256});
    CHECK(table[2].extents == std::vector<std::size_t>{72, 128, 128});
    CHECK(table[3].extents == std::vector<std::size_t>{288, 128, 128});
    CHECK(table[4].extents == std::vector<std::size_t>{288, 32, 32});
    CHECK(table[5].extents == std::vector<std::size_t>{1152, 32, 32});
    CHECK(table[6].extents == std::vector<std::size_t>{1152, 1, 1});
    CHECK(table[7].extents == std::vector<std::size_t>{1152});
    CHECK(table[8].extents == std::vector<std::size_t>{800});
    CHECK(table[9].extents == std::vector<std::size_t>{400});
    CHECK(table[10].extents == std::vector<std::size_t>{200});
    CHECK(table[11].extents == std::vector<std::size_t>{2});
}

TEST_CASE("shape table holds for n in 1..10 at 64 and 512") {
    for (std::size_t n = 1; n <= 10; ++n)
        for (const std::size_t hw : {std::size_t(64), std::size_t(512)}) {
            NetConfig cfg = small_cfg(n, hw);
            const auto table = compute_shape_table(cfg);
            CHECK(table[0].extents[0] == 90);
            CHECK(table[1].extents[0] == 8 * n);
            CHECK(table[3].extents[0] == 32 * n);
            CHECK(table[5].extents[0] == 128 * n);
            CHECK(table[6].extents == std::vector<std::size_t>{128 * n, 1, 1});
            // closed-form spatial chain
            const std::size_t h1 = (hw + 4 - 5) / 2 + 1;
            const std::size_t h2 = (h1 + 4 - 5) / 2 + 1;
            const std::size_t h3 = (h2 + 4 - 5) / 4 + 1;
            CHECK(table[1].extents[1] == h1);
            CHECK(table[2].extents[1] == h2);
            CHECK(table[4].extents[1] == h3);
        }
}

TEST_CASE("n=1 at 64x64 adapts the final pool to the 4x4 map") {
    const auto table = compute_shape_table(small_cfg(1, 64));
    CHECK(table[1].extents == std::vector<std::size_t>{8, 32, 32});
    CHECK(table[4].extents == std::vector<std::size_t>{32, 4, 4});
    CHECK(table[6].extents == std::vector<std::size_t>{128, 1, 1});
    const auto net = build<float>(small_cfg(1, 64));
    CHECK(net.pool3_h == 4);
    CHECK(net.pool3_w == 4);
    CHECK(net.flat_dim == 128);
}

TEST_CASE("normal bottom yields 30 channels, channelwise 90") {
    CHECK(compute_shape_table(small_cfg(1, 64, BottomMode::Normal))[0].extents[0] == 30);
    CHECK(compute_shape_table(small_cfg(1, 64, BottomMode::Channelwise))[0].extents[0] == 90);
    // concatenation widens the single band
    const auto t = compute_shape_table(small_cfg(1, 64, BottomMode::Concat));
    CHECK(t[0].extents == std::vector<std::size_t>{30, 64, 192});
}

TEST_CASE("invalid configurations raise IncompatibleShape") {
    NetConfig cfg = small_cfg(0, 64);
    CHECK_THROWS_AS(compute_shape_table(cfg), IncompatibleShape);
    cfg = small_cfg(1, 64);
    cfg.input_h = 0;
    CHECK_THROWS_AS(compute_shape_table(cfg), IncompatibleShape);
}

TEST_CASE("softmax rows sum to one and zeroed dense head gives exactly (0.5, 0.5)") {
    auto net = build<float>(small_cfg(1, 16));
    const Tensor<float> batch = random_batch(3, 16, 16, 9);
    const Tensor<float> probs = forward(net, batch, RunMode::Infer);
    for (std::size_t b = 0; b < 3; ++b) {
        const double sum = probs(b, std::size_t(0)) + probs(b, std::size_t(1));
        CHECK(std::fabs(sum - 1.0) < 1e-6);
        CHECK(probs(b, std::size_t(0)) >= 0.0f);
        CHECK(probs(b, std::size_t(1)) <= 1.0f);
    }
    for (auto& w : net.fc_w) w.fill(0.0f);
    for (auto& b : net.fc_b) b.fill(0.0f);
    const Tensor<float> uniform = forward(net, batch, RunMode::Infer);
    for (std::size_t b = 0; b < 3; ++b) {
        CHECK(uniform(b, std::size_t(0)) == 0.5f);
        CHECK(uniform(b, std::size_t(1)) == 0.5f);
    }
}

TEST_CASE("permuting a batch permutes the rows identically in infer mode") {
    auto net = build<float>(small_cfg(1, 16));
    const Tensor<float> batch = random_batch(4, 16, 16, 21);
    const Tensor<float> probs = forward(net, batch, RunMode::Infer);
    Tensor<float> rev({4, 3, 16, 16});
    const std::size_t per = batch.size() / 4;
    for (std::size_t b = 0; b < 4; ++b)
        std::copy(batch.data() + b * per, batch.data() + (b + 1) * per,
                  rev.data() + (3 - b) * per);
    const Tensor<float> probs_rev = forward(net, rev, RunMode::Infer);
    for (std::size_t b = 0; b < 4; ++b) {
        CHECK(probs(b, std::size_t(0)) == probs_rev(3 - b, std::size_t(0)));
        CHECK(probs(b, std::size_t(1)) == probs_rev(3 - b, std::size_t(1)));
    }
}

TEST_CASE("channelwise bottom with replicated kernels reproduces the normal bottom") {
    // summing the 90 channel-wise maps in groups of 3 per kernel matches the
    // 30-channel normal bottom within real32 accumulation tolerance
    auto cw_net = build<float>(small_cfg(1, 16, BottomMode::Channelwise));
    auto nm_net = build<float>(small_cfg(1, 16, BottomMode::Normal));
    const Tensor<float> batch = random_batch(1, 16, 16, 33);

    ForwardTrace<float> cw_trace, nm_trace;
    forward(cw_net, batch, RunMode::Infer, &cw_trace);
    forward(nm_net, batch, RunMode::Infer, &nm_trace);
    const std::size_t plane = 16 * 16;
    for (std::size_t k = 0; k < 30; ++k)
        for (std::size_t i = 0; i < plane; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < 3; ++j)
                sum += cw_trace.bottom_out[(j * 30 + k) * plane + i];
            const double ref = nm_trace.bottom_out[k * plane + i];
            CHECK(std::fabs(sum - ref) <= 1e-4);
        }
}

TEST_CASE("backward returns gradients for every learnable tensor") {
    auto net = build<double>(small_cfg(1, 16));
    Tensor<double> batch({2, 3, 16, 16});
    rng::Xoshiro256pp gen(41);
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = gen.next_double() * 255.0;
    const BackwardResult<double> res = backward(net, batch, {0, 1});
    CHECK(std::isfinite(res.loss));
    CHECK(res.grads.bottom_w.size() == net.bottom_w.size());
    CHECK(res.grads.conv1_w.size() == net.conv1_w.size());
    CHECK(res.grads.fc_w[3].size() == net.fc_w[3].size());
    bool any_nonzero = false;
    for (std::size_t i = 0; i < res.grads.conv1_w.size(); ++i)
        any_nonzero |= res.grads.conv1_w[i] != 0.0;
    CHECK(any_nonzero);
}

TEST_CASE("fixed bottom kernels receive no gradients") {
    NetConfig cfg = small_cfg(1, 16);
    cfg.bottom_learnable = false;
    auto net = build<double>(cfg);
    Tensor<double> batch({2, 3, 16, 16}, 100.0);
    const BackwardResult<double> res = backward(net, batch, {0, 1});
    CHECK(res.grads.bottom_w.size() == 0);
    const auto refs = param_refs(net);
    for (const auto& r : refs) CHECK(std::string(r.name) != "bottom_w");
}

TEST_CASE("duplicating a batch keeps the mean gradient unchanged") {
    auto net = build<double>(small_cfg(1, 16));
    rng::Xoshiro256pp gen(43);
    Tensor<double> one({1, 3, 16, 16});
    for (std::size_t i = 0; i < one.size(); ++i) one[i] = gen.next_double() * 255.0;
    Tensor<double> two({2, 3, 16, 16});
    std::copy(one.values().begin(), one.values().end(), two.data());
    std::copy(one.values().begin(), one.values().end(), two.data() + one.size());

    auto net1 = net, net2 = net;
    const auto r1 = backward(net1, one, {1});
    const auto r2 = backward(net2, two, {1, 1});
    CHECK(r1.loss == doctest::Approx(r2.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < r1.grads.conv2_w.size(); i += 11)
        CHECK(r1.grads.conv2_w[i] == doctest::Approx(r2.grads.conv2_w[i]).epsilon(1e-9));
}

TEST_CASE("dense head parameter count follows the closed form") {
    const auto net = build<float>(small_cfg(1, 64));
    const AuditReport rep = count_params_flops(net);
    std::size_t dense = 0;
    for (const auto& row : rep.rows)
        if (row.name.rfind("fc", 0) == 0) dense += row.params;
    // 128*800+800 + 800*400+400 + 400*200+200 + 200*2+2
    CHECK(dense == 504202);
}

TEST_CASE("parameter count strictly increases with n") {
    std::size_t prev = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto net = build<float>(small_cfg(n, 64));
        const AuditReport rep = count_params_flops(net);
        CHECK(rep.params > prev);
        prev = rep.params;
    }
}

TEST_CASE("fixed bottom kernels drop out of the learnable count") {
    NetConfig cfg = small_cfg(1, 64);
    const std::size_t learnable = count_params_flops(build<float>(cfg)).params;
    cfg.bottom_learnable = false;
    const std::size_t fixed = count_params_flops(build<float>(cfg)).params;
    CHECK(learnable - fixed == 3 * 30 * 25);
}

TEST_CASE("avg_kernel_correlation is exactly 1 on a fresh net and drops when perturbed") {
    auto net = build<double>(small_cfg(1, 16));
    CHECK(avg_kernel_correlation(net) == 1.0);
    // perturb one band's kernels with independent noise
    rng::Xoshiro256pp gen(55);
    for (std::size_t k = 0; k < 30; ++k)
        for (std::size_t t = 0; t < 25; ++t)
            net.bottom_w[(2 * 30 + k) * 25 + t] += gen.next_double() * 0.05;
    CHECK(avg_kernel_correlation(net) < 1.0);
    CHECK(avg_kernel_correlation(net) >= -1.0);
}

TEST_CASE("avg_kernel_correlation needs the channelwise bottom") {
    auto net = build<double>(small_cfg(1, 16, BottomMode::Normal));
    CHECK_THROWS_AS(avg_kernel_correlation(net), WrongBottomMode);
}

TEST_CASE("hand-built Pearson case matches a direct evaluation") {
    auto net = build<double>(small_cfg(1, 16));
    // make band 2's copy of kernel 1 differ in two coefficients
    const std::size_t base = (1 * 30 + 0) * 25;
    net.bottom_w[base + 0] += 0.5;
    net.bottom_w[base + 24] -= 0.5;
    // direct Pearson of the two 25-vectors
    const double* a = net.bottom_w.data() + (0 * 30 + 0) * 25;
    const double* b = net.bottom_w.data() + base;
    double ma = 0, mb = 0;
    for (int i = 0; i < 25; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= 25;
    mb /= 25;
    double cov = 0, va = 0, vb = 0;
    for (int i = 0; i < 25; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    // pairs (0,1) and (1,2) both involve the perturbed copy; band 2 still
    // equals band 0, so both have the same direct Pearson value
    const double expected = (88.0 + 2.0 * cov / std::sqrt(va * vb)) / 90.0;
    CHECK(avg_kernel_correlation(net) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cosine_to_ones hand cases") {
    CHECK(cosine_to_ones(3.5, 3.5, 3.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_to_ones(1.0, -1.0, 0.0) == doctest::Approx(0.0));
    CHECK(cosine_to_ones(1.0, 2.0, 2.0) ==
          doctest::Approx(5.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-9));
    CHECK(cosine_to_ones(0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("cosine diagnostics stay in range and barely move under stego noise") {
    auto net = build<double>(small_cfg(1, 64));
    const auto covers = synth_covers(4, 64, 64, 777, CoverStyle::Textured);
    std::vector<PlanarImage> stegos;
    for (std::size_t i = 0; i < covers.size(); ++i) {
        NoiseConfig ncfg;
        ncfg.rate = 0.4;
        ncfg.seed = 800 + i;
        stegos.push_back(apply_noise(covers[i], gen_noise(64, 64, ncfg)));
    }
    const DiagnosticsReport rep = cosine_similarity_diag(net, covers, stegos);
    CHECK(rep.cw_bar == 1.0);
    for (double s : rep.s_cover_per_k) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    CHECK(std::fabs(rep.s_cover - rep.s_stego) < 1e-3);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    namespace fs = std::filesystem;
    auto net = build<float>(small_cfg(2, 32));
    // move things away from initialization
    net.bn1.running_mean[0] = 3.25f;
    net.fc_b[1][7] = -0.125f;
    const std::string p1 = (fs::temp_directory_path() / "wiser_ck1.wckpt").string();
    const std::string p2 = (fs::temp_directory_path() / "wiser_ck2.wckpt").string();
    save_checkpoint(net, 12345, p1);

    const NetConfig peeked = peek_checkpoint_config(p1);
    CHECK(peeked.n == 2);
    CHECK(peeked.input_h == 32);

    auto [loaded, iter] = load_checkpoint<float>(p1);
    CHECK(iter == 12345);
    CHECK(loaded.bottom_w.values() == net.bottom_w.values());
    CHECK(loaded.fc_w[3].values() == net.fc_w[3].values());
    CHECK(loaded.bn1.running_mean.values() == net.bn1.running_mean.values());

    save_checkpoint(loaded, iter, p2);
    CHECK(read_file(p1) == read_file(p2));
    CHECK_THROWS_AS(load_checkpoint<double>(p1), BadMagic);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("forward rejects mismatched batches") {
    auto net = build<float>(small_cfg(1, 16));
    Tensor<float> bad({1, 3, 8, 8});
    CHECK_THROWS_AS(forward(net, bad, RunMode::Infer), ShapeMismatch);
}
