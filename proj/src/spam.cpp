#include "wiser/spam.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "wiser/errors.hpp"

namespace wiser {

namespace {

constexpr int kT = static_cast<int>(kSpamTruncation);

inline int truncate3(int d) { return std::clamp(d, -kT, kT); }

inline std::size_t bin_index(int a, int b, int c) {
    return static_cast<std::size_t>((a + kT) * 49 + (b + kT) * 7 + (c + kT));
}

struct Direction {
    int dr, dc;
};

// 4 straight then 4 diagonal
constexpr Direction kDirections[8] = {{0, 1}, {0, -1}, {1, 0},  {-1, 0},
                                      {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};

}  // namespace

SpamFeature spam_features(const Tensor<double>& map) {
    if (map.rank() != 2) throw ShapeMismatch("spam_features takes a 2-D map");
    const long H = static_cast<long>(map.extent(0)), W = static_cast<long>(map.extent(1));
    // a second-order triple spans 4 samples along every direction
    if (H < 4 || W < 4) throw TooSmall("map must be at least 4x4");

    std::vector<int> m(static_cast<std::size_t>(H * W));
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = static_cast<int>(std::lround(map[i]));  // ties away from zero

    std::array<std::vector<double>, 8> hist;
    for (auto& h : hist) h.assign(kSpamBlock, 0.0);

    for (std::size_t d = 0; d < 8; ++d) {
        const long dr = kDirections[d].dr, dc = kDirections[d].dc;
        // p, p+dir, p+2 dir, p+3 dir all in bounds
        const long r_lo = std::max<long>(0, -3 * dr);
        const long r_hi = H - 1 - std::max<long>(0, 3 * dr);
        const long c_lo = std::max<long>(0, -3 * dc);
        const long c_hi = W - 1 - std::max<long>(0, 3 * dc);
        auto& h = hist[d];
        const long step = dr * W + dc;
        for (long r = r_lo; r <= r_hi; ++r) {
            const int* row = m.data() + r * W;
            for (long c = c_lo; c <= c_hi; ++c) {
                const int* p = row + c;
                const int d1 = truncate3(p[0] - p[step]);
                const int d2 = truncate3(p[step] - p[2 * step]);
                const int d3 = truncate3(p[2 * step] - p[3 * step]);
                h[bin_index(d1, d2, d3)] += 1.0;
            }
        }
    }

    SpamFeature feature(kSpamDim, 0.0);
    for (std::size_t block = 0; block < 2; ++block) {
        double total = 0.0;
        for (std::size_t d = 4 * block; d < 4 * block + 4; ++d)
            for (std::size_t i = 0; i < kSpamBlock; ++i) {
                feature[block * kSpamBlock + i] += hist[d][i];
                total += hist[d][i];
            }
        if (total == 0.0) throw TooSmall("no co-occurrence triples in a direction block");
        for (std::size_t i = 0; i < kSpamBlock; ++i) feature[block * kSpamBlock + i] /= total;
    }
    return feature;
}

}  // namespace wiser
