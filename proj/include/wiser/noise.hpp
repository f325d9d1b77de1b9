#ifndef WISER_NOISE_HPP
#define WISER_NOISE_HPP

#include <cstdint>
#include <vector>

#include "wiser/image.hpp"
#include "wiser/tensor.hpp"

namespace wiser {

// Stego-noise generation and the SNR analysis around it.
//
// All randomness flows through the documented chain: per-band streams are
// xoshiro256++ generators seeded with derive_stream(seed, band); each pixel
// consumes one uniform for the modify decision and, when modified, a second
// for the sign (u < 0.5 -> +1). Identical (seed, M, N, cfg) always produce
// bit-identical fields.
struct NoiseConfig {
    double rate = 0.4;   // fraction of pixels modified per band
    double rho = 0.0;    // target Corr(N_r,N_g) = Corr(N_r,N_b)
    std::uint64_t seed = 0;
};

// Independent +-1 noise per band; requires cfg.rho == 0.
NoiseField gen_noise(std::size_t height, std::size_t width, const NoiseConfig& cfg);

// Red band as gen_noise; green and blue copy the red value with probability
// rho, otherwise draw a fresh sample from the same marginal. This yields
// Corr(N_r,N_g) = Corr(N_r,N_b) = rho and Corr(N_g,N_b) = rho^2 while
// preserving the per-band marginal. rho == 0 reduces bit-exactly to
// gen_noise.
NoiseField gen_correlated_noise(std::size_t height, std::size_t width, const NoiseConfig& cfg);

// Sample Pearson correlation of two equally-sized planes, clamped to [-1,1].
double interband_correlation(const Tensor<double>& a, const Tensor<double>& b);

// Var(filtered noise) / E^2(filtered cover).
double empirical_snr(const Tensor<double>& cover_band_filtered,
                     const Tensor<double>& noise_band_filtered);

// SNR(Z1_k) / SNR(X_j * W) under equal band means and equal noise deviations:
// (3 + 2*(rho_rg + rho_rb + rho_gb)) / 9.
double predicted_snr_ratio(double rho_rg, double rho_rb, double rho_gb);

struct SnrReport {
    double snr_separate = 0.0;   // mean over covers and bands of per-band SNR
    double snr_summed = 0.0;     // mean over covers of the summed-map SNR
    double predicted_ratio = 0.0;
    double measured_ratio = 0.0; // snr_summed / snr_separate
};

// Filters each band of cover and noise with the kernel (zero padding 2,
// same-size output) and measures both SNR forms empirically. The prediction
// uses the sampler's true correlations (rho, rho, rho^2).
SnrReport snr_experiment(const std::vector<PlanarImage>& covers, const NoiseConfig& cfg,
                         const Tensor<double>& kernel);

// Synthetic covers. Smooth: independent low-frequency band fields around a
// common mean, for the SNR experiment. Textured: strongly band-correlated
// low+mid frequency content with small per-band deviations, for the
// SPAM/MMD experiments.
enum class CoverStyle { Smooth, Textured };
PlanarImage synth_cover(std::size_t height, std::size_t width, std::uint64_t seed,
                        CoverStyle style);
std::vector<PlanarImage> synth_covers(std::size_t count, std::size_t height, std::size_t width,
                                      std::uint64_t seed, CoverStyle style);

// Mean absolute pairwise band correlation, computed per item then averaged.
struct CorrelationReport {
    double rg = 0.0, rb = 0.0, gb = 0.0;
};
CorrelationReport mean_abs_interband_correlation(const std::vector<PlanarImage>& images);
CorrelationReport mean_abs_interband_correlation(const std::vector<NoiseField>& fields);

}  // namespace wiser

#endif
