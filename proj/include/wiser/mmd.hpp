#ifndef WISER_MMD_HPP
#define WISER_MMD_HPP

#include <cstdint>
#include <vector>

#include "wiser/image.hpp"
#include "wiser/spam.hpp"
#include "wiser/tensor.hpp"

namespace wiser {

// Gaussian-kernel MMD, unbiased U-statistic of the squared statistic.
struct MmdConfig {
    // explicit bandwidth when positive; otherwise the median pairwise
    // distance of the pooled standardized sample (1.0 when that median is 0)
    double bandwidth = 0.0;
};

// Features are standardized per dimension with X's (cover-set) mean and
// standard deviation before kernel evaluation; zero deviations become 1.
// Returns sqrt(max(0, estimate)).
double mmd(const std::vector<std::vector<double>>& X, const std::vector<std::vector<double>>& Y,
           const MmdConfig& cfg);

// How the three channel-wise maps become one feature vector per image.
enum class ChannelFeatureMode { Average, Concat };

struct MmdRatioResult {
    double mmd_n = 0.0;
    double mmd_c = 0.0;
    double ratio = 0.0;
};

// The channel-wise vs. normal convolution verification experiment:
// pseudo-stegos from correlated +-1 noise, one kernel replicated per band
// for the normal arm (single summed map) against three channel-wise maps,
// SPAM features per map, MMD between cover and stego feature sets per arm.
MmdRatioResult mmd_ratio_experiment(const std::vector<PlanarImage>& covers, double rate,
                                    double rho, const Tensor<double>& kernel,
                                    const MmdConfig& cfg, std::uint64_t seed,
                                    ChannelFeatureMode mode = ChannelFeatureMode::Average);

}  // namespace wiser

#endif
