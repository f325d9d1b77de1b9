#ifndef WISER_SPAM_HPP
#define WISER_SPAM_HPP

#include <vector>

#include "wiser/tensor.hpp"

namespace wiser {

// 686-dimensional second-order SPAM feature with truncation T = 3:
// block 1 (343 values) averages the 4 straight-direction co-occurrence
// histograms, block 2 the 4 diagonal ones; each block sums to 1.
using SpamFeature = std::vector<double>;

inline constexpr std::size_t kSpamTruncation = 3;
inline constexpr std::size_t kSpamBlock = 343;  // 7^3
inline constexpr std::size_t kSpamDim = 2 * kSpamBlock;

// The map is rounded to nearest integer (ties away from zero) first;
// first-order differences along 8 directions are truncated to [-3,3] and
// second-order co-occurrence triples are accumulated per direction.
SpamFeature spam_features(const Tensor<double>& map);

}  // namespace wiser

#endif
