#ifndef WISER_IO_HPP
#define WISER_IO_HPP

#include <string>
#include <variant>

#include "wiser/image.hpp"
#include "wiser/tensor.hpp"

namespace wiser {

// Binary PPM (P6, maxval 255). Decoding is bit-exact; save emits the
// canonical header "P6\n<W> <H>\n255\n" followed by interleaved RGB bytes.
PlanarImage load_ppm(const std::string& path);
void save_ppm(const PlanarImage& img, const std::string& path);

// WLTENSOR container: 8-byte magic "WLTENSOR", u8 dtype tag
// (0 = real32, 1 = real64), u8 rank, rank x u64 little-endian extents,
// then the raw little-endian values.
void save_tensor(const Tensor<float>& t, const std::string& path);
void save_tensor(const Tensor<double>& t, const std::string& path);

using LoadedTensor = std::variant<Tensor<float>, Tensor<double>>;
LoadedTensor load_tensor(const std::string& path);

template <typename T>
Tensor<T> load_tensor_as(const std::string& path) {
    LoadedTensor v = load_tensor(path);
    if (auto* t = std::get_if<Tensor<T>>(&v)) return std::move(*t);
    throw BadMagic("tensor file holds the other dtype");
}

// In-memory forms of the WLTENSOR encoding, shared with the checkpoint container.
std::string encode_tensor(const Tensor<float>& t);
std::string encode_tensor(const Tensor<double>& t);
LoadedTensor decode_tensor(const char* bytes, std::size_t len);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace wiser

#endif
