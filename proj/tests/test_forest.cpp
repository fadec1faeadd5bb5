#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oforest/core.hpp"
#include "oforest/forest.hpp"
#include "oforest/probe.hpp"

using namespace oforest;

TEST_CASE("weight_cubic") {
    REQUIRE(weight_cubic(0.0) == 0.0);
    REQUIRE(weight_cubic(1.0) == 1.0);
    REQUIRE(weight_cubic(5.0) == 1.0);
    REQUIRE(weight_cubic(0.5) == Catch::Approx(0.5).margin(1e-15));
    SECTION("monotone nondecreasing on [0,1]") {
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double w = weight_cubic(i / 1000.0);
            REQUIRE(w >= prev);
            prev = w;
        }
    }
    SECTION("flat derivative at both ends") {
        const double h = 1e-4;
        REQUIRE(std::abs((weight_cubic(h) - weight_cubic(0.0)) / h) < 1e-3);
        REQUIRE(std::abs((weight_cubic(1.0) - weight_cubic(1.0 - h)) / h) < 1e-3);
    }
}

namespace {

Forest train_small_forest(const std::string& fn, int t_count, ForestMode mode, double delta,
                          double epsilon, std::uint64_t seed = 5, int n = 4000) {
    ImageSpace space(1, 2, 1.0);
    TargetFunction f = make_target(fn, space);
    auto samples = sample_function(f, n, space, seed);
    BuildParams params;
    params.epsilon = epsilon;
    ForestParams fp;
    fp.t_count = t_count;
    fp.mode = mode;
    fp.delta = delta;
    fp.seed = seed;
    return build_forest(samples, space, params, fp);
}

}  // namespace

TEST_CASE("weighted tree evaluation") {
    Forest forest = train_small_forest("sin_product", 1, ForestMode::shifted, 0.0, 0.05);
    const ModelTree& tree = forest.trees.front();
    REQUIRE_FALSE(tree.root->is_leaf);

    SECTION("a point on the root hyperplane gets weight zero") {
        // the root anchor lies on its own hyperplane
        std::vector<double> x = tree.root->hp.anchor;
        for (size_t i = 0; i < x.size(); ++i) x[i] += tree.offset[i];
        for (auto comb : {WeightCombiner::min, WeightCombiner::product}) {
            WeightSpec spec;
            spec.combiner = comb;
            REQUIRE(evaluate_tree_weighted(tree, x, spec).weight == 0.0);
        }
    }
    SECTION("weight stays in [0, 1] and equals the hard value when saturated") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        WeightSpec spec;
        for (int k = 0; k < 500; ++k) {
            std::vector<double> x{u(rng), u(rng)};
            const WeightedValue wv = evaluate_tree_weighted(tree, x, spec);
            REQUIRE(wv.weight >= 0.0);
            REQUIRE(wv.weight <= 1.0);
            if (wv.weight == 1.0) REQUIRE(wv.value == evaluate_hard(tree, x));
        }
    }
}

TEST_CASE("weight saturates past the block reach") {
    // one internal node with reach 0.5; |S| beyond that clips the weight to 1
    ModelTree t;
    t.offset = {0.0, 0.0};
    auto leaf = [](double value) {
        auto n = std::make_unique<TreeNode>();
        n->is_leaf = true;
        n->model.alpha = {0.0, 0.0};
        n->model.centroid = {0.0, 0.0};
        n->model.mean_y = value;
        return n;
    };
    t.root = std::make_unique<TreeNode>();
    t.root->is_leaf = false;
    t.root->hp.alpha = {1.0, 0.0};
    t.root->hp.anchor = {0.0, 0.0};
    t.root->hp.grid_rows = 1;
    t.root->hp.grid_cols = 2;
    t.root->weight_scale = 0.5;
    t.root->neg = leaf(-1.0);
    t.root->pos = leaf(1.0);

    WeightSpec spec;
    const WeightedValue deep = evaluate_tree_weighted(t, {0.9, 0.3}, spec);
    REQUIRE(deep.weight == 1.0);
    REQUIRE(deep.value == evaluate_hard(t, {0.9, 0.3}));
    const WeightedValue near = evaluate_tree_weighted(t, {0.1, 0.3}, spec);
    REQUIRE(near.weight < 1.0);
    REQUIRE(near.weight == Catch::Approx(weight_cubic(0.2)).margin(1e-15));
}

TEST_CASE("single-leaf tree has weight one") {
    Forest forest = train_small_forest("linear", 1, ForestMode::shifted, 0.0, 0.5);
    REQUIRE(forest.trees.front().root->is_leaf);
    WeightSpec spec;
    const WeightedValue wv = evaluate_tree_weighted(forest.trees.front(), {0.3, 0.4}, spec);
    REQUIRE(wv.weight == 1.0);
}

TEST_CASE("evaluate_forest weighted-average arithmetic") {
    // two synthetic single-leaf trees with hand-set values and a direct check
    // of the weighted mean
    auto make_const_tree = [](double value) {
        ModelTree t;
        t.offset = {0.0};
        t.root = std::make_unique<TreeNode>();
        t.root->is_leaf = true;
        t.root->model.alpha = {0.0};
        t.root->model.centroid = {0.0};
        t.root->model.mean_y = value;
        return t;
    };
    Forest f;
    f.grid_rows = 1;
    f.grid_cols = 1;
    f.axis_max = {1.0};
    f.mu = 1e-6;
    f.helper_constant = 10.0;
    f.trees.push_back(make_const_tree(1.0));
    f.trees.push_back(make_const_tree(3.0));
    // both single-leaf trees carry weight 1
    REQUIRE(evaluate_forest(f, {0.5}) == Catch::Approx(2.0).margin(1e-15));
}

TEST_CASE("helper tree activates when all weights vanish") {
    Forest forest = train_small_forest("sin_product", 3, ForestMode::shifted, 0.0, 0.05);
    const ModelTree& t0 = forest.trees.front();
    std::vector<double> x = t0.root->hp.anchor;
    for (size_t i = 0; i < x.size(); ++i) x[i] += t0.offset[i];
    // delta = 0: every tree shares the root hyperplane, product weight 0
    REQUIRE(evaluate_forest(forest, x) == forest.helper_constant);
}

TEST_CASE("forest output is a convex combination of tree values and helper") {
    Forest forest = train_small_forest("sin_product", 3, ForestMode::shifted, 0.03, 0.05);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        std::vector<double> x{u(rng), u(rng)};
        double lo = forest.helper_constant, hi = forest.helper_constant;
        for (const ModelTree& t : forest.trees) {
            const double v = evaluate_tree_weighted(t, x, forest.weight_spec).value;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double out = evaluate_forest(forest, x);
        REQUIRE(std::isfinite(out));
        REQUIRE(out >= lo - 1e-12);
        REQUIRE(out <= hi + 1e-12);
    }
}

TEST_CASE("shifted forest with one tree behaves as the tree") {
    Forest forest = train_small_forest("sin_product", 1, ForestMode::shifted, 0.1, 0.05);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x{u(rng), u(rng)};
        const WeightedValue wv =
            evaluate_tree_weighted(forest.trees.front(), x, forest.weight_spec);
        if (wv.weight > forest.mu) {
            const double expect = wv.value;  // single tree, helper off
            REQUIRE(evaluate_forest(forest, x) == Catch::Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("zero-delta shifted trees agree with tree 0 where weight clears mu") {
    Forest forest = train_small_forest("sin_product", 3, ForestMode::shifted, 0.0, 0.05);
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x{u(rng), u(rng)};
        const WeightedValue wv =
            evaluate_tree_weighted(forest.trees.front(), x, forest.weight_spec);
        if (wv.weight > forest.mu)
            REQUIRE(evaluate_forest(forest, x) == Catch::Approx(wv.value).margin(1e-9));
    }
}

TEST_CASE("retrained forest on linear data gives near-identical slopes") {
    ImageSpace space(1, 2, 1.0);
    TargetFunction f = make_target("linear", space);
    // bootstrap resampling perturbs the per-axis slopes by O(n^-1/2)
    auto samples = sample_function(f, 20000, space, 20);
    BuildParams params;
    params.epsilon = 0.05;
    ForestParams fp;
    fp.t_count = 4;
    fp.mode = ForestMode::retrained;
    fp.seed = 20;
    Forest forest = build_forest(samples, space, params, fp);
    REQUIRE(forest.trees.size() == 4);
    for (const ModelTree& t : forest.trees) {
        REQUIRE(t.root->is_leaf);
        for (int i = 0; i < 2; ++i)
            REQUIRE(t.root->model.alpha[i] ==
                    Catch::Approx(forest.trees.front().root->model.alpha[i]).margin(0.05));
    }
}

TEST_CASE("build_forest validates its inputs") {
    ImageSpace space(1, 1, 1.0);
    auto samples = sample_function(make_target("linear", space), 10, space, 1);
    BuildParams params;
    ForestParams fp;
    fp.t_count = 0;
    REQUIRE_THROWS_AS(build_forest(samples, space, params, fp), std::invalid_argument);
    fp.t_count = 1;
    fp.mu = 0.0;
    REQUIRE_THROWS_AS(build_forest(samples, space, params, fp), std::invalid_argument);
}

TEST_CASE("forest output stays finite everywhere") {
    Forest forest = train_small_forest("abs_ridge", 3, ForestMode::shifted, 0.05, 0.02);
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20000; ++k) {
        std::vector<double> x{u(rng), u(rng)};
        REQUIRE(std::isfinite(evaluate_forest(forest, x)));
    }
}

TEST_CASE("smoothness probe: smooth forest vs hard tree") {
    Forest forest = train_small_forest("sin_product", 3, ForestMode::shifted, 0.04, 0.04,
                                       /*seed=*/7, /*n=*/8000);
    const ImageSpace space = forest.space();
    ProbeReport smooth = probe_smoothness(forest, space, 50, 123);
    REQUIRE(smooth.crossings > 0);
    REQUIRE(smooth.max_jump <= 1e-6);

    ProbeReport hard = probe_hard_tree(forest.trees.front(), space, 50, 123);
    REQUIRE(hard.crossings > 0);
    REQUIRE(hard.max_jump > 1e-3);
}
