#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oforest/core.hpp"

using namespace oforest;

TEST_CASE("downsample averages blocks") {
    SECTION("constant block") {
        auto out = downsample({4, 4, 4, 4}, 2, 2, 2);
        REQUIRE(out == std::vector<double>{4.0});
    }
    SECTION("hand arithmetic") {
        auto out = downsample({0, 2, 4, 6}, 2, 2, 2);
        REQUIRE(out == std::vector<double>{3.0});
    }
    SECTION("block=1 is the identity") {
        auto out = downsample({1, 2, 3, 4}, 2, 2, 1);
        REQUIRE(out == std::vector<double>{1, 2, 3, 4});
    }
    SECTION("divisibility enforced") {
        REQUIRE_THROWS_AS(downsample({1, 2, 3, 4, 5, 6}, 2, 3, 2), std::invalid_argument);
    }
}

TEST_CASE("downsample is linear") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> A(16), B(16), C(16);
    for (int i = 0; i < 16; ++i) {
        A[i] = u(rng);
        B[i] = u(rng);
    }
    const double a = 2.5, b = -0.75;
    for (int i = 0; i < 16; ++i) C[i] = a * A[i] + b * B[i];
    auto dA = downsample(A, 4, 4, 2);
    auto dB = downsample(B, 4, 4, 2);
    auto dC = downsample(C, 4, 4, 2);
    for (size_t i = 0; i < dC.size(); ++i)
        REQUIRE(dC[i] == Catch::Approx(a * dA[i] + b * dB[i]).margin(1e-12));
}

TEST_CASE("extend_sample fills the extensions") {
    SECTION("zeros") {
        Sample s = extend_sample({0, 0}, 5);
        REQUIRE(s.ext == std::vector<double>{0, 0, 0, 0});
    }
    SECTION("componentwise arithmetic") {
        Sample s = extend_sample({2, 3}, 1);
        REQUIRE(s.ext == std::vector<double>{4, 9, 2, 3});
    }
    SECTION("negative output") {
        Sample s = extend_sample({1}, -2);
        REQUIRE(s.ext == std::vector<double>{1, -2});
    }
    SECTION("ext matches direct recomputation bitwise") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int k = 0; k < 50; ++k) {
            std::vector<double> x{u(rng), u(rng), u(rng)};
            const double y = u(rng);
            Sample s = extend_sample(x, y);
            for (size_t i = 0; i < x.size(); ++i) {
                REQUIRE(s.ext[i] == x[i] * x[i]);
                REQUIRE(s.ext[3 + i] == x[i] * y);
            }
        }
    }
}

TEST_CASE("recenter shifts x and recomputes ext") {
    SECTION("self-centering") {
        auto out = recenter({extend_sample({5, 5}, 1)}, {5, 5});
        REQUIRE(out[0].x == std::vector<double>{0, 0});
        REQUIRE(out[0].y == 1);
    }
    SECTION("componentwise subtraction") {
        auto out = recenter({extend_sample({3, 1}, 0)}, {1, 1});
        REQUIRE(out[0].x == std::vector<double>{2, 0});
    }
    SECTION("round trip with exactly representable origin") {
        std::vector<Sample> samples{extend_sample({1.5, -2.25}, 3.0),
                                    extend_sample({0.5, 4.0}, -1.0)};
        auto shifted = recenter(samples, {0.25, -0.5});
        auto back = recenter(shifted, {-0.25, 0.5});
        for (size_t i = 0; i < samples.size(); ++i) {
            REQUIRE(back[i].x == samples[i].x);
            REQUIRE(back[i].y == samples[i].y);
        }
    }
    SECTION("pairwise differences preserved exactly") {
        std::vector<Sample> samples{extend_sample({1.0, 2.0}, 0), extend_sample({3.5, -1.0}, 0)};
        auto shifted = recenter(samples, {0.7, 0.3});
        for (int i = 0; i < 2; ++i)
            REQUIRE(shifted[1].x[i] - shifted[0].x[i] ==
                    samples[1].x[i] - samples[0].x[i]);
    }
    SECTION("length mismatch throws") {
        REQUIRE_THROWS_AS(recenter({extend_sample({1, 2}, 0)}, {1.0}), std::invalid_argument);
    }
}

TEST_CASE("sample_function is deterministic and in-space") {
    ImageSpace space(2, 2, 1.0);
    TargetFunction f = make_target("constant", space);
    auto a = sample_function(f, 3, space, 42);
    auto b = sample_function(f, 3, space, 42);
    REQUIRE(a.size() == 3);
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].x == b[i].x);
        REQUIRE(a[i].y == b[i].y);
        REQUIRE(space.contains(a[i].x));
    }
}

TEST_CASE("constant function gives constant outputs") {
    ImageSpace space(1, 2, 1.0);
    TargetFunction f = make_target("constant", space);
    for (const Sample& s : sample_function(f, 20, space, 9)) REQUIRE(s.y == 1.0);
}

TEST_CASE("uniform sampling of x1 has mean near w/2") {
    ImageSpace space(1, 1, 1.0);
    TargetFunction f;
    f.eval = [](const std::vector<double>& x) { return x[0]; };
    auto samples = sample_function(f, 10000, space, 11);
    double mean = 0.0;
    for (const Sample& s : samples) mean += s.y;
    mean /= samples.size();
    REQUIRE(std::abs(mean - 0.5) < 0.02);
}

TEST_CASE("image space validation") {
    REQUIRE_THROWS_AS(ImageSpace(2, 2, std::vector<double>{1, 1, 1}), std::invalid_argument);
    REQUIRE_THROWS_AS(ImageSpace(1, 2, std::vector<double>{1, 0}), std::invalid_argument);
}
