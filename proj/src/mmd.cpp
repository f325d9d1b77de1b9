#include "wiser/mmd.hpp"

#include <algorithm>
#include <cmath>

#include "wiser/conv.hpp"
#include "wiser/errors.hpp"
#include "wiser/noise.hpp"
#include "wiser/rng.hpp"

namespace wiser {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

double mmd(const std::vector<std::vector<double>>& X, const std::vector<std::vector<double>>& Y,
           const MmdConfig& cfg) {
    const std::size_t m = X.size(), n = Y.size();
    if (m < 2 || n < 2) throw TooFewSamples("mmd needs at least two samples per set");
    const std::size_t dim = X[0].size();
    for (const auto& x : X)
        if (x.size() != dim) throw ShapeMismatch("inconsistent feature length in X");
    for (const auto& y : Y)
        if (y.size() != dim) throw ShapeMismatch("inconsistent feature length in Y");

    // standardize with the cover set's statistics
    std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
    for (const auto& x : X)
        for (std::size_t d = 0; d < dim; ++d) mean[d] += x[d];
    for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(m);
    for (const auto& x : X)
        for (std::size_t d = 0; d < dim; ++d) {
            const double v = x[d] - mean[d];
            sd[d] += v * v;
        }
    for (std::size_t d = 0; d < dim; ++d) {
        sd[d] = std::sqrt(sd[d] / static_cast<double>(m));
        if (sd[d] == 0.0) sd[d] = 1.0;
    }
    auto standardize = [&](const std::vector<std::vector<double>>& src) {
        std::vector<std::vector<double>> out(src.size(), std::vector<double>(dim));
        for (std::size_t i = 0; i < src.size(); ++i)
            for (std::size_t d = 0; d < dim; ++d) out[i][d] = (src[i][d] - mean[d]) / sd[d];
        return out;
    };
    const auto Xs = standardize(X);
    const auto Ys = standardize(Y);

    double h = cfg.bandwidth;
    if (h <= 0.0) {
        std::vector<const std::vector<double>*> pooled;
        pooled.reserve(m + n);
        for (const auto& x : Xs) pooled.push_back(&x);
        for (const auto& y : Ys) pooled.push_back(&y);
        std::vector<double> dists;
        dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
        for (std::size_t i = 0; i < pooled.size(); ++i)
            for (std::size_t j = i + 1; j < pooled.size(); ++j)
                dists.push_back(std::sqrt(sq_distance(*pooled[i], *pooled[j])));
        const std::size_t mid = dists.size() / 2;
        std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
        h = dists[mid];
        if (h == 0.0) h = 1.0;
    }
    const double gamma = 1.0 / (2.0 * h * h);
    auto kernel = [gamma](const std::vector<double>& a, const std::vector<double>& b) {
        return std::exp(-gamma * sq_distance(a, b));
    };

    double kxx = 0.0, kyy = 0.0, kxy = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) kxx += kernel(Xs[i], Xs[j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) kyy += kernel(Ys[i], Ys[j]);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) kxy += kernel(Xs[i], Ys[j]);

    const double est = kxx / (static_cast<double>(m) * (m - 1)) +
                       kyy / (static_cast<double>(n) * (n - 1)) -
                       2.0 * kxy / (static_cast<double>(m) * n);
    return std::sqrt(std::max(0.0, est));
}

namespace {

Tensor<double> normal_map(const PlanarImage& img, const Tensor<double>& kernel, std::size_t pad) {
    Tensor<double> sum({img.height(), img.width()});
    for (std::size_t b = 0; b < 3; ++b) {
        const Tensor<double> f = filter_plane(img.band_tensor<double>(b), kernel, pad);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += f[i];
    }
    return sum;
}

std::vector<double> channel_feature(const PlanarImage& img, const Tensor<double>& kernel,
                                    std::size_t pad, ChannelFeatureMode mode) {
    std::vector<double> out;
    for (std::size_t b = 0; b < 3; ++b) {
        const SpamFeature f =
            spam_features(filter_plane(img.band_tensor<double>(b), kernel, pad));
        if (mode == ChannelFeatureMode::Concat) {
            out.insert(out.end(), f.begin(), f.end());
        } else {
            if (out.empty()) out.assign(f.size(), 0.0);
            for (std::size_t i = 0; i < f.size(); ++i) out[i] += f[i] / 3.0;
        }
    }
    return out;
}

}  // namespace

MmdRatioResult mmd_ratio_experiment(const std::vector<PlanarImage>& covers, double rate,
                                    double rho, const Tensor<double>& kernel,
                                    const MmdConfig& cfg, std::uint64_t seed,
                                    ChannelFeatureMode mode) {
    if (covers.size() < 10) throw TooFewSamples("mmd_ratio_experiment needs at least 10 covers");
    const std::size_t pad = kernel.extent(0) / 2;

    std::vector<std::vector<double>> cover_n, stego_n, cover_c, stego_c;
    cover_n.reserve(covers.size());
    for (std::size_t i = 0; i < covers.size(); ++i) {
        const PlanarImage& cover = covers[i];
        NoiseConfig ncfg;
        ncfg.rate = rate;
        ncfg.rho = rho;
        ncfg.seed = rng::derive_stream(seed, i);
        const PlanarImage stego =
            apply_noise(cover, gen_correlated_noise(cover.height(), cover.width(), ncfg));

        cover_n.push_back(spam_features(normal_map(cover, kernel, pad)));
        stego_n.push_back(spam_features(normal_map(stego, kernel, pad)));
        cover_c.push_back(channel_feature(cover, kernel, pad, mode));
        stego_c.push_back(channel_feature(stego, kernel, pad, mode));
    }

    MmdRatioResult r;
    r.mmd_n = mmd(cover_n, stego_n, cfg);
    r.mmd_c = mmd(cover_c, stego_c, cfg);
    r.ratio = r.mmd_c / r.mmd_n;
    return r;
}

}  // namespace wiser
