#include "wiser/noise.hpp"

#include <algorithm>
#include <cmath>

#include "wiser/conv.hpp"
#include "wiser/errors.hpp"
#include "wiser/rng.hpp"

namespace wiser {

namespace {

void validate(const NoiseConfig& cfg) {
    if (!(cfg.rate >= 0.0 && cfg.rate <= 1.0)) throw BadConfig("rate must lie in [0,1]");
    if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0)) throw BadConfig("rho must lie in [0,1]");
}

std::int8_t draw_marginal(rng::Xoshiro256pp& gen, double rate) {
    if (gen.next_double() < rate) return gen.next_double() < 0.5 ? std::int8_t(1) : std::int8_t(-1);
    return 0;
}

}  // namespace

NoiseField gen_noise(std::size_t height, std::size_t width, const NoiseConfig& cfg) {
    validate(cfg);
    if (cfg.rho != 0.0) throw BadConfig("gen_noise requires rho = 0");
    NoiseField out(height, width);
    for (std::size_t b = 0; b < 3; ++b) {
        rng::Xoshiro256pp gen(rng::derive_stream(cfg.seed, b));
        auto& plane = out.band(b);
        for (auto& v : plane) v = draw_marginal(gen, cfg.rate);
    }
    return out;
}

NoiseField gen_correlated_noise(std::size_t height, std::size_t width, const NoiseConfig& cfg) {
    validate(cfg);
    if (cfg.rho == 0.0) {
        NoiseConfig independent = cfg;
        return gen_noise(height, width, independent);
    }
    NoiseField out(height, width);
    {
        rng::Xoshiro256pp gen(rng::derive_stream(cfg.seed, 0));
        for (auto& v : out.band(0)) v = draw_marginal(gen, cfg.rate);
    }
    for (std::size_t b = 1; b < 3; ++b) {
        rng::Xoshiro256pp gen(rng::derive_stream(cfg.seed, b));
        const auto& red = out.band(0);
        auto& plane = out.band(b);
        for (std::size_t i = 0; i < plane.size(); ++i) {
            if (gen.next_double() < cfg.rho)
                plane[i] = red[i];
            else
                plane[i] = draw_marginal(gen, cfg.rate);
        }
    }
    return out;
}

double interband_correlation(const Tensor<double>& a, const Tensor<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw DimensionMismatch("correlation needs two equal planes with at least 2 elements");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) throw DegenerateVariance("a plane has zero variance");
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

double empirical_snr(const Tensor<double>& cover_band_filtered,
                     const Tensor<double>& noise_band_filtered) {
    const double n = static_cast<double>(cover_band_filtered.size());
    if (n == 0) throw DimensionMismatch("empty tensor");
    double mean_cover = 0.0;
    for (std::size_t i = 0; i < cover_band_filtered.size(); ++i) mean_cover += cover_band_filtered[i];
    mean_cover /= n;
    if (mean_cover == 0.0)
        throw ZeroMeanDenominator("filtered cover has exactly zero mean; use a nonzero-mean proxy");

    const double m = static_cast<double>(noise_band_filtered.size());
    double mean_noise = 0.0;
    for (std::size_t i = 0; i < noise_band_filtered.size(); ++i) mean_noise += noise_band_filtered[i];
    mean_noise /= m;
    double var_noise = 0.0;
    for (std::size_t i = 0; i < noise_band_filtered.size(); ++i) {
        const double d = noise_band_filtered[i] - mean_noise;
        var_noise += d * d;
    }
    var_noise /= m;
    return var_noise / (mean_cover * mean_cover);
}

double predicted_snr_ratio(double rho_rg, double rho_rb, double rho_gb) {
    return (3.0 + 2.0 * (rho_rg + rho_rb + rho_gb)) / 9.0;
}

SnrReport snr_experiment(const std::vector<PlanarImage>& covers, const NoiseConfig& cfg,
                         const Tensor<double>& kernel) {
    if (covers.empty()) throw EmptyDataset("snr_experiment needs at least one cover");
    validate(cfg);
    const std::size_t pad = kernel.extent(0) / 2;

    double sum_sep = 0.0, sum_sum = 0.0;
    std::size_t n_sep = 0, n_sum = 0;
    for (std::size_t idx = 0; idx < covers.size(); ++idx) {
        const PlanarImage& cover = covers[idx];
        NoiseConfig per = cfg;
        per.seed = rng::derive_stream(cfg.seed, idx);
        const NoiseField noise = gen_correlated_noise(cover.height(), cover.width(), per);

        Tensor<double> cover_sum({cover.height(), cover.width()});
        Tensor<double> noise_sum({cover.height(), cover.width()});
        for (std::size_t b = 0; b < 3; ++b) {
            const Tensor<double> cf = filter_plane(cover.band_tensor<double>(b), kernel, pad);
            const Tensor<double> nf = filter_plane(noise.band_tensor<double>(b), kernel, pad);
            sum_sep += empirical_snr(cf, nf);
            ++n_sep;
            for (std::size_t i = 0; i < cf.size(); ++i) {
                cover_sum[i] += cf[i];
                noise_sum[i] += nf[i];
            }
        }
        sum_sum += empirical_snr(cover_sum, noise_sum);
        ++n_sum;
    }

    SnrReport report;
    report.snr_separate = sum_sep / static_cast<double>(n_sep);
    report.snr_summed = sum_sum / static_cast<double>(n_sum);
    report.predicted_ratio = predicted_snr_ratio(cfg.rho, cfg.rho, cfg.rho * cfg.rho);
    report.measured_ratio = report.snr_summed / report.snr_separate;
    return report;
}

namespace {

// low-frequency field: coarse Gaussian grid, bilinear upsample, amplitude amp
std::vector<double> smooth_field(std::size_t height, std::size_t width, std::size_t cell,
                                 double amp, rng::Xoshiro256pp& gen) {
    const std::size_t gh = height / cell + 2, gw = width / cell + 2;
    std::vector<double> grid(gh * gw);
    for (auto& v : grid) v = gen.next_gaussian() * amp;
    std::vector<double> out(height * width);
    const double inv = 1.0 / static_cast<double>(cell);
    for (std::size_t r = 0; r < height; ++r) {
        const double fr = static_cast<double>(r) * inv;
        const std::size_t r0 = static_cast<std::size_t>(fr);
        const double tr = fr - static_cast<double>(r0);
        for (std::size_t c = 0; c < width; ++c) {
            const double fc = static_cast<double>(c) * inv;
            const std::size_t c0 = static_cast<std::size_t>(fc);
            const double tc = fc - static_cast<double>(c0);
            const double v00 = grid[r0 * gw + c0], v01 = grid[r0 * gw + c0 + 1];
            const double v10 = grid[(r0 + 1) * gw + c0], v11 = grid[(r0 + 1) * gw + c0 + 1];
            out[r * width + c] = (1 - tr) * ((1 - tc) * v00 + tc * v01) +
                                 tr * ((1 - tc) * v10 + tc * v11);
        }
    }
    return out;
}

std::uint8_t quantize(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

}  // namespace

PlanarImage synth_cover(std::size_t height, std::size_t width, std::uint64_t seed,
                        CoverStyle style) {
    PlanarImage img(height, width);
    if (style == CoverStyle::Smooth) {
        // independent per-band low-frequency content around a common mean
        for (std::size_t b = 0; b < 3; ++b) {
            rng::Xoshiro256pp gen(rng::derive_stream(seed, 10 + b));
            const auto field = smooth_field(height, width, 16, 20.0, gen);
            auto& plane = img.band(b);
            for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = quantize(128.0 + field[i]);
        }
        return img;
    }

    // Textured: shared low/mid-frequency content plus shared pixel grain and
    // small per-band deviations, so band intensities correlate strongly as in
    // camera images while high-pass residuals keep realistic energy.
    rng::Xoshiro256pp shared_gen(rng::derive_stream(seed, 20));
    const auto low = smooth_field(height, width, 16, 26.0, shared_gen);
    const auto mid = smooth_field(height, width, 4, 7.0, shared_gen);
    std::vector<double> grain(height * width);
    for (auto& v : grain) v = shared_gen.next_gaussian() * 0.9;
    for (std::size_t b = 0; b < 3; ++b) {
        rng::Xoshiro256pp gen(rng::derive_stream(seed, 30 + b));
        const auto dev = smooth_field(height, width, 8, 1.0, gen);
        const double band_offset = (static_cast<double>(b) - 1.0) * 6.0;
        auto& plane = img.band(b);
        for (std::size_t i = 0; i < plane.size(); ++i)
            plane[i] = quantize(128.0 + band_offset + low[i] + mid[i] + grain[i] + dev[i] +
                                gen.next_gaussian() * 0.1);
    }
    return img;
}

std::vector<PlanarImage> synth_covers(std::size_t count, std::size_t height, std::size_t width,
                                      std::uint64_t seed, CoverStyle style) {
    std::vector<PlanarImage> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(synth_cover(height, width, rng::derive_stream(seed, 1000 + i), style));
    return out;
}

namespace {

template <typename Item>
CorrelationReport mean_abs_report(const std::vector<Item>& items) {
    if (items.empty()) throw EmptyDataset("no items");
    CorrelationReport rep;
    for (const auto& item : items) {
        const Tensor<double> r = item.template band_tensor<double>(0);
        const Tensor<double> g = item.template band_tensor<double>(1);
        const Tensor<double> b = item.template band_tensor<double>(2);
        rep.rg += std::fabs(interband_correlation(r, g));
        rep.rb += std::fabs(interband_correlation(r, b));
        rep.gb += std::fabs(interband_correlation(g, b));
    }
    const double n = static_cast<double>(items.size());
    rep.rg /= n;
    rep.rb /= n;
    rep.gb /= n;
    return rep;
}

}  // namespace

CorrelationReport mean_abs_interband_correlation(const std::vector<PlanarImage>& images) {
    return mean_abs_report(images);
}

CorrelationReport mean_abs_interband_correlation(const std::vector<NoiseField>& fields) {
    return mean_abs_report(fields);
}

}  // namespace wiser
