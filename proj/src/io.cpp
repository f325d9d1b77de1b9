#include "wiser/io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace wiser {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) throw IoFailure("read failed: " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out.good()) throw IoFailure("write failed: " + path);
}

namespace {

// One PPM header token, skipping whitespace and '#' comments.
std::size_t parse_ppm_uint(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
            ++pos;
        } else if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    if (pos >= buf.size() || !std::isdigit(static_cast<unsigned char>(buf[pos])))
        throw MalformedHeader("expected integer in PPM header");
    std::size_t value = 0;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
        value = value * 10 + static_cast<std::size_t>(buf[pos] - '0');
        if (value > (std::size_t(1) << 32)) throw MalformedHeader("header value too large");
        ++pos;
    }
    return value;
}

}  // namespace

PlanarImage load_ppm(const std::string& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '6')
        throw MalformedHeader("not a binary PPM (P6) file: " + path);
    std::size_t pos = 2;
    const std::size_t width = parse_ppm_uint(buf, pos);
    const std::size_t height = parse_ppm_uint(buf, pos);
    const std::size_t maxval = parse_ppm_uint(buf, pos);
    if (maxval != 255) throw MalformedHeader("maxval must be 255");
    if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos])))
        throw MalformedHeader("missing whitespace after maxval");
    ++pos;  // exactly one whitespace byte before the payload
    const std::size_t need = 3 * width * height;
    if (buf.size() - pos < need) throw TruncatedPayload("PPM payload short: " + path);

    PlanarImage img(height, width);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data()) + pos;
    for (std::size_t i = 0; i < width * height; ++i) {
        img.band(0)[i] = p[3 * i + 0];
        img.band(1)[i] = p[3 * i + 1];
        img.band(2)[i] = p[3 * i + 2];
    }
    return img;
}

void save_ppm(const PlanarImage& img, const std::string& path) {
    std::string out;
    out.reserve(32 + 3 * img.pixels());
    out += "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    const std::size_t base = out.size();
    out.resize(base + 3 * img.pixels());
    unsigned char* p = reinterpret_cast<unsigned char*>(out.data()) + base;
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        p[3 * i + 0] = img.band(0)[i];
        p[3 * i + 1] = img.band(1)[i];
        p[3 * i + 2] = img.band(2)[i];
    }
    write_file(path, out);
}

namespace {

constexpr char kMagic[8] = {'W', 'L', 'T', 'E', 'N', 'S', 'O', 'R'};

template <typename T>
std::string encode_impl(const Tensor<T>& t) {
    if (t.rank() == 0) throw ShapeOverflow("refusing to encode rank-0 tensor");
    std::string out;
    out.reserve(10 + 8 * t.rank() + sizeof(T) * t.size());
    out.append(kMagic, 8);
    out.push_back(static_cast<char>(dtype_of<T>()));
    out.push_back(static_cast<char>(t.rank()));
    for (std::size_t e : t.shape()) {
        std::uint64_t le = e;
        out.append(reinterpret_cast<const char*>(&le), 8);
    }
    out.append(reinterpret_cast<const char*>(t.data()), sizeof(T) * t.size());
    return out;
}

template <typename T>
Tensor<T> decode_payload(const char* bytes, std::size_t len, std::size_t pos,
                         std::vector<std::size_t> shape) {
    std::size_t total = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw ShapeOverflow("zero extent");
        if (total > (std::size_t(1) << 48) / e) throw ShapeOverflow("extent product too large");
        total *= e;
    }
    if (len - pos < sizeof(T) * total) throw TruncatedPayload("tensor payload short");
    std::vector<T> data(total);
    std::memcpy(data.data(), bytes + pos, sizeof(T) * total);
    return Tensor<T>::from_data(std::move(shape), std::move(data));
}

}  // namespace

std::string encode_tensor(const Tensor<float>& t) { return encode_impl(t); }
std::string encode_tensor(const Tensor<double>& t) { return encode_impl(t); }

LoadedTensor decode_tensor(const char* bytes, std::size_t len) {
    if (len < 10) throw TruncatedPayload("tensor header short");
    if (std::memcmp(bytes, kMagic, 8) != 0) throw BadMagic("bad tensor magic");
    const auto tag = static_cast<std::uint8_t>(bytes[8]);
    const auto rank = static_cast<std::uint8_t>(bytes[9]);
    if (tag > 1) throw BadMagic("unknown dtype tag");
    if (rank == 0 || rank > 8) throw ShapeOverflow("unsupported rank");
    if (len < 10 + std::size_t(8) * rank) throw TruncatedPayload("tensor extents short");
    std::vector<std::size_t> shape(rank);
    for (std::size_t a = 0; a < rank; ++a) {
        std::uint64_t e;
        std::memcpy(&e, bytes + 10 + 8 * a, 8);
        shape[a] = static_cast<std::size_t>(e);
    }
    const std::size_t pos = 10 + std::size_t(8) * rank;
    if (tag == 0) return decode_payload<float>(bytes, len, pos, std::move(shape));
    return decode_payload<double>(bytes, len, pos, std::move(shape));
}

void save_tensor(const Tensor<float>& t, const std::string& path) {
    write_file(path, encode_tensor(t));
}

void save_tensor(const Tensor<double>& t, const std::string& path) {
    write_file(path, encode_tensor(t));
}

LoadedTensor load_tensor(const std::string& path) {
    const std::string buf = read_file(path);
    return decode_tensor(buf.data(), buf.size());
}

}  // namespace wiser
