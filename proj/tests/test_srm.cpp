#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "wiser/conv.hpp"
#include "wiser/io.hpp"
#include "wiser/srm.hpp"

using namespace wiser;

TEST_CASE("bundled bank holds exactly 30 kernels") {
    const KernelBank bank = KernelBank::load_default();
    CHECK(bank.size() == 30);
}

TEST_CASE("embedded default matches the shipped definition file") {
    const auto path = std::filesystem::path(__FILE__).parent_path().parent_path() / "data" /
                      "srm_kernels.txt";
    if (std::filesystem::exists(path))
        CHECK(read_file(path.string()) == std::string(KernelBank::default_definition()));
}

TEST_CASE("every kernel sums to zero, is finite, and has support") {
    const KernelBank bank = KernelBank::load_default();
    for (std::size_t i = 1; i <= bank.size(); ++i) {
        const Tensor<double> k = bank.kernel(i);
        REQUIRE(k.shape() == std::vector<std::size_t>{5, 5});
        double sum = 0.0;
        bool nonzero = false;
        for (std::size_t j = 0; j < k.size(); ++j) {
            REQUIRE(std::isfinite(k[j]));
            sum += k[j];
            nonzero = nonzero || k[j] != 0.0;
        }
        INFO("kernel ", bank.info(i).name);
        CHECK(std::fabs(sum) <= 1e-12);
        CHECK(nonzero);
    }
}

TEST_CASE("first-order horizontal kernel matches its stated stencil") {
    const KernelBank bank = KernelBank::load_default();
    const Tensor<double> k = bank.kernel(1);
    CHECK(bank.info(1).name == "first_e");
    CHECK(k(2, 2) == -1.0);
    CHECK(k(2, 3) == 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) sum += k[i];
    CHECK(sum == 0.0);
}

TEST_CASE("K5 is the 5x5 SQUARE kernel with divisor 12") {
    const KernelBank bank = KernelBank::load_default();
    const auto& info = bank.info(KernelBank::kK5Index);
    CHECK(info.name == "square_5x5");
    CHECK(info.divisor == 12.0);
    CHECK(bank.kernel(5)(2, 2) == -1.0);  // -12/12
    CHECK(bank.kernel(5)(0, 0) == doctest::Approx(-1.0 / 12.0));
}

TEST_CASE("kernel index outside 1..30 raises") {
    const KernelBank bank = KernelBank::load_default();
    CHECK_THROWS_AS(bank.kernel(0), IndexOutOfRange);
    CHECK_THROWS_AS(bank.kernel(31), IndexOutOfRange);
}

TEST_CASE("repeated access returns equal matrices") {
    const KernelBank bank = KernelBank::load_default();
    CHECK(bank.kernel(7).values() == bank.kernel(7).values());
}

TEST_CASE("a 29-kernel file raises WrongKernelCount") {
    std::string text(KernelBank::default_definition());
    text.erase(text.rfind("edge5x5_l"));
    CHECK_THROWS_AS(KernelBank::parse(text), WrongKernelCount);
}

TEST_CASE("parse errors are reported") {
    CHECK_THROWS_AS(KernelBank::parse("bad line with; too few; fields"), ParseError);
    CHECK_THROWS_AS(KernelBank::parse("k; 2 2; 1; 1 -1 1 -1"), ParseError);  // even extents
    std::string text = "k; 1 3; 1; 1 -1 1\n";
    CHECK_THROWS_AS(KernelBank::parse(text), NonZeroSum);
}

TEST_CASE("bank load is deterministic") {
    const KernelBank a = KernelBank::load_default();
    const KernelBank b = KernelBank::load_default();
    for (std::size_t i = 1; i <= 30; ++i) CHECK(a.kernel(i).values() == b.kernel(i).values());
}

TEST_CASE("constant image filtered by any bank kernel is zero in the interior") {
    const KernelBank bank = KernelBank::load_default();
    const Tensor<double> plane({16, 16}, 93.0);
    for (std::size_t i = 1; i <= 30; ++i) {
        const Tensor<double> out = filter_plane(plane, bank.kernel(i), 2);
        for (std::size_t r = 2; r < 14; ++r)
            for (std::size_t c = 2; c < 14; ++c)
                CHECK(std::fabs(out(r, c)) <= 1e-10);
    }
}

TEST_CASE("class symmetries: mirrored directions and symmetric squares") {
    const KernelBank bank = KernelBank::load_default();
    auto find = [&](const std::string& name) {
        for (std::size_t i = 1; i <= 30; ++i)
            if (bank.info(i).name == name) return bank.kernel(i);
        FAIL("kernel not found: ", name);
        return Tensor<double>({5, 5});
    };
    // first_w is first_e flipped horizontally
    const auto fe = find("first_e"), fw = find("first_w");
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 5; ++c) CHECK(fw(r, c) == fe(r, 4 - c));
    // square kernels are transpose-symmetric
    for (const char* name : {"square_3x3", "square_5x5"}) {
        const auto s = find(name);
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t c = 0; c < 5; ++c) CHECK(s(r, c) == s(c, r));
    }
    // edge5x5_d is edge5x5_u flipped vertically
    const auto eu = find("edge5x5_u"), ed = find("edge5x5_d");
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 5; ++c) CHECK(ed(r, c) == eu(4 - r, c));
}
