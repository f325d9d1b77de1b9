#ifndef WISER_TENSOR_HPP
#define WISER_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "wiser/errors.hpp"

namespace wiser {

enum class Dtype : std::uint8_t { Real32 = 0, Real64 = 1 };

template <typename T>
constexpr Dtype dtype_of() {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    return sizeof(T) == 4 ? Dtype::Real32 : Dtype::Real64;
}

// Dense row-major N-d array (outermost extent first). Value semantics;
// immutable once handed to another module unless documented otherwise.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, T fill = T(0))
        : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}

    static Tensor from_data(std::vector<std::size_t> shape, std::vector<T> data) {
        Tensor t;
        if (checked_size(shape) != data.size())
            throw ShapeMismatch("data length does not match shape product");
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    T& operator[](std::size_t flat) { return data_[flat]; }
    const T& operator[](std::size_t flat) const { return data_[flat]; }

    template <typename... Ix>
    T& operator()(Ix... ix) {
        return data_[flat_index(ix...)];
    }
    template <typename... Ix>
    const T& operator()(Ix... ix) const {
        return data_[flat_index(ix...)];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    void fill(T v) { data_.assign(data_.size(), v); }

    template <typename... Ix>
    std::size_t flat_index(Ix... ix) const {
        const std::size_t idx[] = {static_cast<std::size_t>(ix)...};
        constexpr std::size_t n = sizeof...(Ix);
        std::size_t flat = 0;
        for (std::size_t a = 0; a < n; ++a) flat = flat * shape_[a] + idx[a];
        return flat;
    }

private:
    static std::size_t checked_size(const std::vector<std::size_t>& shape) {
        std::size_t total = 1;
        for (std::size_t e : shape) {
            if (e == 0) throw ShapeOverflow("zero extent");
            if (total > (std::size_t(1) << 48) / e) throw ShapeOverflow("shape product too large");
            total *= e;
        }
        return shape.empty() ? 0 : total;
    }

    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace wiser

#endif
