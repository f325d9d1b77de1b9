#include <doctest.h>

#include <cstring>
#include <vector>

#include "wiser/kernels.hpp"
#include "wiser/rng.hpp"

using namespace wiser;

namespace {

std::vector<float> random_f32(std::size_t n, std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(gen.next_double() * 4.0 - 2.0);
    return v;
}

std::vector<double> random_f64(std::size_t n, std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = gen.next_double() * 4.0 - 2.0;
    return v;
}

// sizes straddling the vector width, including ragged tails
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 257};

}  // namespace

TEST_CASE("backend table lists scalar first and the active one is available") {
    const auto backends = kernels::available_backends();
    REQUIRE(!backends.empty());
    CHECK(std::string(backends[0]->name) == "scalar");
    bool found = false;
    for (const auto* b : backends)
        if (b == &kernels::active()) found = true;
    CHECK(found);
}

TEST_CASE("every available backend matches the scalar reference bit for bit") {
    const auto& ref = kernels::scalar_backend();
    for (const auto* b : kernels::available_backends()) {
        INFO("backend: ", b->name);
        std::uint64_t seed = 99;
        for (std::size_t n : kSizes) {
            ++seed;
            const auto xf = random_f32(2 * n + 2, seed);
            const auto yf = random_f32(2 * n + 2, seed + 1);
            const auto xd = random_f64(2 * n + 2, seed + 2);
            const auto yd = random_f64(2 * n + 2, seed + 3);
            const double a = 1.37;

            // axpy family (f64 accumulators)
            {
                auto acc1 = random_f64(2 * n + 2, seed + 4);
                auto acc2 = acc1;
                ref.axpy_f32(a, xf.data(), acc1.data(), n);
                b->axpy_f32(a, xf.data(), acc2.data(), n);
                CHECK(std::memcmp(acc1.data(), acc2.data(), acc1.size() * 8) == 0);

                ref.axpy_f64(a, xd.data(), acc1.data(), n);
                b->axpy_f64(a, xd.data(), acc2.data(), n);
                CHECK(std::memcmp(acc1.data(), acc2.data(), acc1.size() * 8) == 0);

                ref.axpy_x2_f32(a, xf.data(), acc1.data(), n);
                b->axpy_x2_f32(a, xf.data(), acc2.data(), n);
                CHECK(std::memcmp(acc1.data(), acc2.data(), acc1.size() * 8) == 0);

                ref.axpy_x2_f64(a, xd.data(), acc1.data(), n);
                b->axpy_x2_f64(a, xd.data(), acc2.data(), n);
                CHECK(std::memcmp(acc1.data(), acc2.data(), acc1.size() * 8) == 0);

                ref.axpy_y2_f32(a, xf.data(), acc1.data(), n);
                b->axpy_y2_f32(a, xf.data(), acc2.data(), n);
                CHECK(std::memcmp(acc1.data(), acc2.data(), acc1.size() * 8) == 0);

                ref.axpy_y2_f64(a, xd.data(), acc1.data(), n);
                b->axpy_y2_f64(a, xd.data(), acc2.data(), n);
                CHECK(std::memcmp(acc1.data(), acc2.data(), acc1.size() * 8) == 0);
            }

            // reductions
            CHECK(ref.dot_f32(xf.data(), yf.data(), n) == b->dot_f32(xf.data(), yf.data(), n));
            CHECK(ref.dot_f64(xd.data(), yd.data(), n) == b->dot_f64(xd.data(), yd.data(), n));
            CHECK(ref.dot_x2_f32(xf.data(), yf.data(), n) ==
                  b->dot_x2_f32(xf.data(), yf.data(), n));
            CHECK(ref.dot_x2_f64(xd.data(), yd.data(), n) ==
                  b->dot_x2_f64(xd.data(), yd.data(), n));
            CHECK(ref.sum_f32(xf.data(), n) == b->sum_f32(xf.data(), n));
            CHECK(ref.sum_f64(xd.data(), n) == b->sum_f64(xd.data(), n));
            CHECK(ref.sumsq_shifted_f32(xf.data(), 0.25, n) ==
                  b->sumsq_shifted_f32(xf.data(), 0.25, n));
            CHECK(ref.sumsq_shifted_f64(xd.data(), 0.25, n) ==
                  b->sumsq_shifted_f64(xd.data(), 0.25, n));

            // elementwise maps
            {
                std::vector<float> o1(n), o2(n);
                std::vector<double> p1(n), p2(n);
                ref.relu_f32(xf.data(), o1.data(), n);
                b->relu_f32(xf.data(), o2.data(), n);
                CHECK(std::memcmp(o1.data(), o2.data(), n * 4) == 0);
                ref.abs_f32(xf.data(), o1.data(), n);
                b->abs_f32(xf.data(), o2.data(), n);
                CHECK(std::memcmp(o1.data(), o2.data(), n * 4) == 0);
                ref.relu_bwd_f32(xf.data(), yf.data(), o1.data(), n);
                b->relu_bwd_f32(xf.data(), yf.data(), o2.data(), n);
                CHECK(std::memcmp(o1.data(), o2.data(), n * 4) == 0);
                ref.abs_bwd_f32(xf.data(), yf.data(), o1.data(), n);
                b->abs_bwd_f32(xf.data(), yf.data(), o2.data(), n);
                CHECK(std::memcmp(o1.data(), o2.data(), n * 4) == 0);
                ref.affine_f32(xf.data(), o1.data(), 1.5f, -0.75f, n);
                b->affine_f32(xf.data(), o2.data(), 1.5f, -0.75f, n);
                CHECK(std::memcmp(o1.data(), o2.data(), n * 4) == 0);
                ref.lincomb2_f32(xf.data(), yf.data(), o1.data(), 0.5f, -1.25f, 0.1f, n);
                b->lincomb2_f32(xf.data(), yf.data(), o2.data(), 0.5f, -1.25f, 0.1f, n);
                CHECK(std::memcmp(o1.data(), o2.data(), n * 4) == 0);

                ref.relu_f64(xd.data(), p1.data(), n);
                b->relu_f64(xd.data(), p2.data(), n);
                CHECK(std::memcmp(p1.data(), p2.data(), n * 8) == 0);
                ref.abs_f64(xd.data(), p1.data(), n);
                b->abs_f64(xd.data(), p2.data(), n);
                CHECK(std::memcmp(p1.data(), p2.data(), n * 8) == 0);
                ref.relu_bwd_f64(xd.data(), yd.data(), p1.data(), n);
                b->relu_bwd_f64(xd.data(), yd.data(), p2.data(), n);
                CHECK(std::memcmp(p1.data(), p2.data(), n * 8) == 0);
                ref.abs_bwd_f64(xd.data(), yd.data(), p1.data(), n);
                b->abs_bwd_f64(xd.data(), yd.data(), p2.data(), n);
                CHECK(std::memcmp(p1.data(), p2.data(), n * 8) == 0);
                ref.affine_f64(xd.data(), p1.data(), 1.5, -0.75, n);
                b->affine_f64(xd.data(), p2.data(), 1.5, -0.75, n);
                CHECK(std::memcmp(p1.data(), p2.data(), n * 8) == 0);
                ref.lincomb2_f64(xd.data(), yd.data(), p1.data(), 0.5, -1.25, 0.1, n);
                b->lincomb2_f64(xd.data(), yd.data(), p2.data(), 0.5, -1.25, 0.1, n);
                CHECK(std::memcmp(p1.data(), p2.data(), n * 8) == 0);

                ref.cast_f64_f32(xd.data(), o1.data(), n);
                b->cast_f64_f32(xd.data(), o2.data(), n);
                CHECK(std::memcmp(o1.data(), o2.data(), n * 4) == 0);
            }

            // SGD update
            {
                auto p1 = random_f32(n, seed + 5), p2 = p1;
                auto v1 = random_f32(n, seed + 6), v2 = v1;
                ref.sgd_f32(p1.data(), v1.data(), xf.data(), 0.01f, 0.9f, 5e-4f, n);
                b->sgd_f32(p2.data(), v2.data(), xf.data(), 0.01f, 0.9f, 5e-4f, n);
                CHECK(std::memcmp(p1.data(), p2.data(), n * 4) == 0);
                CHECK(std::memcmp(v1.data(), v2.data(), n * 4) == 0);

                auto q1 = random_f64(n, seed + 7), q2 = q1;
                auto w1 = random_f64(n, seed + 8), w2 = w1;
                ref.sgd_f64(q1.data(), w1.data(), xd.data(), 0.01, 0.9, 5e-4, n);
                b->sgd_f64(q2.data(), w2.data(), xd.data(), 0.01, 0.9, 5e-4, n);
                CHECK(std::memcmp(q1.data(), q2.data(), n * 8) == 0);
                CHECK(std::memcmp(w1.data(), w2.data(), n * 8) == 0);
            }
        }
    }
}

TEST_CASE("reduction values agree with a plain summation oracle") {
    const auto x = random_f64(101, 7);
    const auto y = random_f64(101, 8);
    double expect = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) expect += x[i] * y[i];
    const double got = kernels::active().dot_f64(x.data(), y.data(), x.size());
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("row-blocked primitives equal per-row loops bit for bit") {
    const auto& ref = kernels::scalar_backend();
    for (const auto* b : kernels::available_backends()) {
        INFO("backend: ", b->name);
        const std::size_t rows = 5, n = 13;
        const auto xf = random_f32(4 * rows * n + 8, 301);
        const auto xd = random_f64(4 * rows * n + 8, 302);
        const auto gf = random_f32(2 * rows * n + 8, 303);
        const auto gd = random_f64(2 * rows * n + 8, 304);
        const struct {
            std::size_t xrs, xis, yrs, yis;
        } layouts[] = {{n, 1, n, 1}, {2 * n, 2, n, 1}, {n, 1, 2 * n, 2}, {3 * n, 3, n, 1}};
        for (const auto& lay : layouts) {
            auto acc1 = random_f64(4 * rows * n + 8, 305);
            auto acc2 = acc1;
            b->axpy2d_f32(0.9, xf.data(), lay.xrs, lay.xis, acc1.data(), lay.yrs, lay.yis, rows, n);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < n; ++i)
                    acc2[r * lay.yrs + i * lay.yis] = std::fma(
                        0.9, static_cast<double>(xf[r * lay.xrs + i * lay.xis]),
                        acc2[r * lay.yrs + i * lay.yis]);
            CHECK(std::memcmp(acc1.data(), acc2.data(), acc1.size() * 8) == 0);

            auto acd1 = random_f64(4 * rows * n + 8, 306);
            auto acd2 = acd1;
            b->axpy2d_f64(0.9, xd.data(), lay.xrs, lay.xis, acd1.data(), lay.yrs, lay.yis, rows, n);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < n; ++i)
                    acd2[r * lay.yrs + i * lay.yis] = std::fma(
                        0.9, xd[r * lay.xrs + i * lay.xis], acd2[r * lay.yrs + i * lay.yis]);
            CHECK(std::memcmp(acd1.data(), acd2.data(), acd1.size() * 8) == 0);

            // dot2d sums per-row dots in row order, matching the 1-D tree
            double expect_f = 0.0, expect_d = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                if (lay.xis == 1) {
                    expect_f += ref.dot_f32(xf.data() + r * lay.xrs, gf.data() + r * n, n);
                    expect_d += ref.dot_f64(xd.data() + r * lay.xrs, gd.data() + r * n, n);
                } else if (lay.xis == 2) {
                    expect_f += ref.dot_x2_f32(xf.data() + r * lay.xrs, gf.data() + r * n, n);
                    expect_d += ref.dot_x2_f64(xd.data() + r * lay.xrs, gd.data() + r * n, n);
                } else {
                    expect_f += kernels::dot_xs_f32(xf.data() + r * lay.xrs, lay.xis,
                                                    gf.data() + r * n, n);
                    expect_d += kernels::dot_xs_f64(xd.data() + r * lay.xrs, lay.xis,
                                                    gd.data() + r * n, n);
                }
            }
            CHECK(b->dot2d_f32(xf.data(), lay.xrs, lay.xis, gf.data(), n, rows, n) == expect_f);
            CHECK(b->dot2d_f64(xd.data(), lay.xrs, lay.xis, gd.data(), n, rows, n) == expect_d);
        }
    }
}

TEST_CASE("generic-stride helpers match their fixed-stride counterparts") {
    const auto x = random_f64(60, 11);
    const auto g = random_f64(30, 12);
    auto acc1 = random_f64(30, 13);
    auto acc2 = acc1;
    kernels::active().axpy_x2_f64(0.7, x.data(), acc1.data(), 30);
    kernels::axpy_xs_f64(0.7, x.data(), 2, acc2.data(), 30);
    CHECK(std::memcmp(acc1.data(), acc2.data(), 30 * 8) == 0);

    auto accy1 = random_f64(60, 14);
    auto accy2 = accy1;
    kernels::active().axpy_y2_f64(0.7, g.data(), accy1.data(), 30);
    kernels::axpy_ys_f64(0.7, g.data(), accy2.data(), 2, 30);
    CHECK(std::memcmp(accy1.data(), accy2.data(), 60 * 8) == 0);

    CHECK(kernels::active().dot_x2_f64(x.data(), g.data(), 30) ==
          kernels::dot_xs_f64(x.data(), 2, g.data(), 30));
}
