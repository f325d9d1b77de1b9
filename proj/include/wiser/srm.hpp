#ifndef WISER_SRM_HPP
#define WISER_SRM_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "wiser/tensor.hpp"

namespace wiser {

struct SrmKernel {
    std::string name;
    std::size_t native_rows = 0, native_cols = 0;
    double divisor = 1.0;
    Tensor<double> matrix;  // normalized, zero-embedded into 5x5
};

// The 30 fixed high-pass residual filters. Immutable after load.
class KernelBank {
public:
    static constexpr std::size_t kCount = 30;
    static constexpr std::size_t kWindow = 5;
    // documented convention: index 5 in the bundled ordering is K5,
    // the 5x5 SQUARE kernel with divisor 12
    static constexpr std::size_t kK5Index = 5;

    static KernelBank load_default();
    static KernelBank load_file(const std::string& path);
    static KernelBank parse(const std::string& text);

    // the bundled definition text, byte-identical to data/srm_kernels.txt
    static const char* default_definition();

    std::size_t size() const { return kernels_.size(); }
    const SrmKernel& info(std::size_t index1) const;

    // copy of the normalized 5x5 kernel, 1-based index
    Tensor<double> kernel(std::size_t index1) const;

    template <typename T>
    Tensor<T> kernel_as(std::size_t index1) const {
        const Tensor<double> k = kernel(index1);
        Tensor<T> out({kWindow, kWindow});
        for (std::size_t i = 0; i < k.size(); ++i) out[i] = static_cast<T>(k[i]);
        return out;
    }

private:
    std::vector<SrmKernel> kernels_;
};

}  // namespace wiser

#endif
