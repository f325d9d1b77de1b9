#include "wiser/srm.hpp"

#include <cmath>
#include <sstream>

#include "wiser/errors.hpp"
#include "wiser/io.hpp"

namespace wiser {

namespace {

// mirror of data/srm_kernels.txt; a unit test keeps the two in sync
constexpr const char* kDefaultBank =
    R"(# Spatial rich model high-pass filter bank: 30 kernels.
# Line format: name; native_rows native_cols; divisor; row-major integer coefficients
# Native stencils are zero-embedded at the center of a 5x5 window and divided
# by the divisor at load time. Index 5 (square_5x5) is the designated K5.
# Ordering: one representative per class first (1..5), then the remaining
# members class by class.
first_e; 1 3; 1; 0 -1 1
second_h; 1 3; 2; 1 -2 1
third_e; 1 5; 3; 0 1 -3 3 -1
square_3x3; 3 3; 4; -1 2 -1 2 -4 2 -1 2 -1
square_5x5; 5 5; 12; -1 2 -2 2 -1 2 -6 8 -6 2 -2 8 -12 8 -2 2 -6 8 -6 2 -1 2 -2 2 -1
edge3x3_u; 3 3; 4; -1 2 -1 2 -4 2 0 0 0
edge3x3_r; 3 3; 4; 0 2 -1 0 -4 2 0 2 -1
edge3x3_d; 3 3; 4; 0 0 0 2 -4 2 -1 2 -1
edge3x3_l; 3 3; 4; -1 2 0 2 -4 0 -1 2 0
first_ne; 3 3; 1; 0 0 1 0 -1 0 0 0 0
first_n; 3 1; 1; 1 -1 0
first_nw; 3 3; 1; 1 0 0 0 -1 0 0 0 0
first_w; 1 3; 1; 1 -1 0
first_sw; 3 3; 1; 0 0 0 0 -1 0 1 0 0
first_s; 3 1; 1; 0 -1 1
first_se; 3 3; 1; 0 0 0 0 -1 0 0 0 1
second_v; 3 1; 2; 1 -2 1
second_d; 3 3; 2; 1 0 0 0 -2 0 0 0 1
second_a; 3 3; 2; 0 0 1 0 -2 0 1 0 0
third_ne; 5 5; 3; 0 0 0 0 -1 0 0 0 3 0 0 0 -3 0 0 0 1 0 0 0 0 0 0 0 0
third_n; 5 1; 3; -1 3 -3 1 0
third_nw; 5 5; 3; -1 0 0 0 0 0 3 0 0 0 0 0 -3 0 0 0 0 0 1 0 0 0 0 0 0
third_w; 1 5; 3; -1 3 -3 1 0
third_sw; 5 5; 3; 0 0 0 0 0 0 0 0 1 0 0 0 -3 0 0 0 3 0 0 0 -1 0 0 0 0
third_s; 5 1; 3; 0 1 -3 3 -1
third_se; 5 5; 3; 0 0 0 0 0 0 1 0 0 0 0 0 -3 0 0 0 0 0 3 0 0 0 0 0 -1
edge5x5_u; 5 5; 12; -1 2 -2 2 -1 2 -6 8 -6 2 -2 8 -12 8 -2 0 0 0 0 0 0 0 0 0 0
edge5x5_r; 5 5; 12; 0 0 -2 2 -1 0 0 8 -6 2 0 0 -12 8 -2 0 0 8 -6 2 0 0 -2 2 -1
edge5x5_d; 5 5; 12; 0 0 0 0 0 0 0 0 0 0 -2 8 -12 8 -2 2 -6 8 -6 2 -1 2 -2 2 -1
edge5x5_l; 5 5; 12; -1 2 -2 0 0 2 -6 8 0 0 -2 8 -12 0 0 2 -6 8 0 0 -1 2 -2 0 0
)";

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

SrmKernel parse_line(const std::string& line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto semi = line.find(';', start);
        if (semi == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, semi - start)));
        start = semi + 1;
    }
    if (fields.size() != 4)
        throw ParseError("line " + std::to_string(lineno) + ": expected 4 ';'-separated fields");

    SrmKernel k;
    k.name = fields[0];
    if (k.name.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty name");

    std::istringstream dims(fields[1]);
    if (!(dims >> k.native_rows >> k.native_cols))
        throw ParseError("line " + std::to_string(lineno) + ": bad native extents");
    if (k.native_rows == 0 || k.native_cols == 0 || k.native_rows > KernelBank::kWindow ||
        k.native_cols > KernelBank::kWindow || k.native_rows % 2 == 0 || k.native_cols % 2 == 0)
        throw ParseError("line " + std::to_string(lineno) +
                         ": native extents must be odd and at most 5");

    std::istringstream div(fields[2]);
    if (!(div >> k.divisor) || k.divisor <= 0)
        throw ParseError("line " + std::to_string(lineno) + ": bad divisor");

    std::istringstream coef(fields[3]);
    std::vector<double> raw;
    double v;
    while (coef >> v) raw.push_back(v);
    if (raw.size() != k.native_rows * k.native_cols)
        throw ParseError("line " + std::to_string(lineno) + ": expected " +
                         std::to_string(k.native_rows * k.native_cols) + " coefficients");

    k.matrix = Tensor<double>({KernelBank::kWindow, KernelBank::kWindow});
    const std::size_t r0 = (KernelBank::kWindow - k.native_rows) / 2;
    const std::size_t c0 = (KernelBank::kWindow - k.native_cols) / 2;
    bool any_nonzero = false;
    double sum = 0.0;
    for (std::size_t r = 0; r < k.native_rows; ++r)
        for (std::size_t c = 0; c < k.native_cols; ++c) {
            const double coeff = raw[r * k.native_cols + c] / k.divisor;
            k.matrix(r0 + r, c0 + c) = coeff;
            sum += coeff;
            if (coeff != 0.0) any_nonzero = true;
        }
    if (!any_nonzero) throw ParseError("line " + std::to_string(lineno) + ": all-zero kernel");
    if (std::fabs(sum) > 1e-12)
        throw NonZeroSum("kernel '" + k.name + "' coefficients sum to " + std::to_string(sum));
    return k;
}

}  // namespace

const char* KernelBank::default_definition() { return kDefaultBank; }

KernelBank KernelBank::parse(const std::string& text) {
    KernelBank bank;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        bank.kernels_.push_back(parse_line(t, lineno));
    }
    if (bank.kernels_.size() != kCount)
        throw WrongKernelCount("expected " + std::to_string(kCount) + " kernels, found " +
                               std::to_string(bank.kernels_.size()));
    return bank;
}

KernelBank KernelBank::load_default() { return parse(kDefaultBank); }

KernelBank KernelBank::load_file(const std::string& path) { return parse(read_file(path)); }

const SrmKernel& KernelBank::info(std::size_t index1) const {
    if (index1 < 1 || index1 > kernels_.size())
        throw IndexOutOfRange("kernel index " + std::to_string(index1) + " outside 1..30");
    return kernels_[index1 - 1];
}

Tensor<double> KernelBank::kernel(std::size_t index1) const { return info(index1).matrix; }

}  // namespace wiser
