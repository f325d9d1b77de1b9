#include "wiser/image.hpp"

namespace wiser {

PlanarImage apply_noise(const PlanarImage& img, const NoiseField& n) {
    if (img.height() != n.height() || img.width() != n.width())
        throw DimensionMismatch("image and noise field extents differ");
    PlanarImage out(img.height(), img.width());
    for (std::size_t b = 0; b < 3; ++b) {
        const auto& src = img.band(b);
        const auto& noise = n.band(b);
        auto& dst = out.band(b);
        for (std::size_t i = 0; i < src.size(); ++i) {
            int v = static_cast<int>(src[i]) + static_cast<int>(noise[i]);
            if (v < 0) v = 1;        // 0 with -1 reflects to 1
            if (v > 255) v = 254;    // 255 with +1 reflects to 254
            dst[i] = static_cast<std::uint8_t>(v);
        }
    }
    return out;
}

}  // namespace wiser
