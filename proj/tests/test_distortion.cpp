#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oforest/distortion.hpp"
#include "oforest/serialize.hpp"

using namespace oforest;

TEST_CASE("permutation_from_transform") {
    SECTION("identity") {
        Permutation p = permutation_from_transform(3, 2, "identity");
        for (int j = 0; j < 6; ++j) REQUIRE(p.map[j] == j);
    }
    SECTION("rot90 on a 2x2 grid, by hand") {
        Permutation p = permutation_from_transform(2, 2, "rot90");
        REQUIRE(p.map == std::vector<int>{2, 0, 3, 1});
    }
    SECTION("rot90 twice equals rot180") {
        Permutation r90 = permutation_from_transform(4, 4, "rot90");
        Permutation r180 = permutation_from_transform(4, 4, "rot180");
        Permutation twice = compose(r90, r90);
        REQUIRE(twice.map == r180.map);
    }
    SECTION("rot270 is the inverse of rot90") {
        Permutation r90 = permutation_from_transform(3, 3, "rot90");
        Permutation r270 = permutation_from_transform(3, 3, "rot270");
        REQUIRE(compose(r90, r270).map == permutation_from_transform(3, 3, "identity").map);
    }
    SECTION("translations wrap cyclically and compose") {
        Permutation a = permutation_from_transform(3, 4, "translate(1,0)");
        Permutation b = permutation_from_transform(3, 4, "translate(2,3)");
        Permutation ab = compose(a, b);
        Permutation direct = permutation_from_transform(3, 4, "translate(3,3)");
        REQUIRE(ab.map == direct.map);
    }
    SECTION("every map is a bijection") {
        for (const char* tag : {"identity", "rot90", "rot180", "rot270", "translate(1,2)",
                                "translate(-1,3)"}) {
            Permutation p = permutation_from_transform(4, 4, tag);
            std::vector<int> seen(16, 0);
            for (int v : p.map) seen[v]++;
            for (int c : seen) REQUIRE(c == 1);
        }
    }
    SECTION("90-degree rotations need a square grid") {
        REQUIRE_THROWS_AS(permutation_from_transform(2, 3, "rot90"), std::invalid_argument);
        REQUIRE_THROWS_AS(permutation_from_transform(2, 3, "rot270"), std::invalid_argument);
        REQUIRE_NOTHROW(permutation_from_transform(2, 3, "rot180"));
    }
    SECTION("unsupported transform rejected") {
        REQUIRE_THROWS_AS(permutation_from_transform(2, 2, "zoom"), std::invalid_argument);
    }
}

TEST_CASE("permute_image") {
    Permutation p = permutation_from_transform(2, 2, "rot90");
    SECTION("worked example") {
        REQUIRE(permute_image({1, 2, 3, 4}, p) == std::vector<double>{3, 1, 4, 2});
    }
    SECTION("inverse round trip") {
        std::vector<double> x{0.1, -2.0, 3.5, 7.0};
        REQUIRE(permute_image(permute_image(x, p), p.inverse()) == x);
    }
    SECTION("length mismatch") {
        REQUIRE_THROWS_AS(permute_image({1, 2, 3}, p), std::invalid_argument);
    }
}

namespace {

Forest train_grid_forest(int side, int t_count, std::uint64_t seed) {
    ImageSpace space(side, side, 1.0);
    TargetFunction f = make_target("sin_product", space);
    auto samples = sample_function(f, 6000, space, seed);
    BuildParams params;
    params.epsilon = 0.08;
    ForestParams fp;
    fp.t_count = t_count;
    fp.mode = ForestMode::shifted;
    fp.delta = 0.05;
    fp.seed = seed;
    return build_forest(samples, space, params, fp);
}

}  // namespace

TEST_CASE("permute_forest") {
    Forest forest = train_grid_forest(2, 2, 3);
    SECTION("identity leaves the serialization byte-identical") {
        Permutation id = permutation_from_transform(2, 2, "identity");
        REQUIRE(serialize_forest(permute_forest(forest, id)) == serialize_forest(forest));
    }
    SECTION("round trip restores the forest exactly") {
        Permutation p = permutation_from_transform(2, 2, "rot90");
        Forest back = permute_forest(permute_forest(forest, p), p.inverse());
        REQUIRE(serialize_forest(back) == serialize_forest(forest));
    }
    SECTION("topology preserved") {
        Permutation p = permutation_from_transform(2, 2, "rot180");
        Forest out = permute_forest(forest, p);
        for (size_t t = 0; t < forest.trees.size(); ++t) {
            REQUIRE(count_leaves(*out.trees[t].root) == count_leaves(*forest.trees[t].root));
            REQUIRE(tree_depth(*out.trees[t].root) == tree_depth(*forest.trees[t].root));
        }
    }
    SECTION("dimension mismatch") {
        Permutation p = permutation_from_transform(3, 3, "rot90");
        REQUIRE_THROWS_AS(permute_forest(forest, p), std::invalid_argument);
    }
}

TEST_CASE("equivariance: permuted forest on permuted images matches the original") {
    Forest forest = train_grid_forest(3, 2, 11);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const char* tag : {"rot90", "rot180", "rot270", "translate(1,2)", "translate(2,0)"}) {
        Permutation p = permutation_from_transform(3, 3, tag);
        Forest permuted = permute_forest(forest, p);
        for (int k = 0; k < 500; ++k) {
            std::vector<double> x(9);
            for (double& v : x) v = u(rng);
            const double orig = evaluate_forest(forest, x);
            const double perm = evaluate_forest(permuted, permute_image(x, p));
            REQUIRE(perm == Catch::Approx(orig).margin(1e-12));
        }
    }
}

TEST_CASE("equivariance holds for both combiners and the hard path") {
    Forest forest = train_grid_forest(2, 3, 21);
    Permutation p = permutation_from_transform(2, 2, "rot180");
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto comb : {WeightCombiner::min, WeightCombiner::product}) {
        Forest variant = forest.clone();
        variant.weight_spec.combiner = comb;
        Forest permuted = permute_forest(variant, p);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> x(4);
            for (double& v : x) v = u(rng);
            REQUIRE(evaluate_forest(permuted, permute_image(x, p)) ==
                    Catch::Approx(evaluate_forest(variant, x)).margin(1e-12));
            REQUIRE(evaluate_hard(permuted.trees.front(), permute_image(x, p)) ==
                    Catch::Approx(evaluate_hard(variant.trees.front(), x)).margin(1e-12));
        }
    }
}
