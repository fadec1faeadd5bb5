#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "oforest/tree.hpp"

namespace oforest {

enum class WeightKind { abs, cubic, block_scaled };
enum class WeightCombiner { min, product };
enum class WeightScale { unit, block_reach };

// Per-node smoothing of the leaf functions: W of the (optionally
// block-normalized) |S|, combined along the root-to-leaf path.
struct WeightSpec {
    WeightKind kind = WeightKind::cubic;
    WeightCombiner combiner = WeightCombiner::product;
    WeightScale scale = WeightScale::block_reach;
};

// W(s) = 3 s^2 - 2 s^3 for s < 1, saturating at 1; C1 on [0, inf).
inline double weight_cubic(double s) {
    if (s >= 1.0) return 1.0;
    return 3.0 * s * s - 2.0 * s * s * s;
}

struct WeightedValue {
    double value = 0.0;
    double weight = 0.0;
};

namespace detail {

inline double node_weight(double abs_s, double scale_node, const WeightSpec& spec) {
    double s = abs_s;
    if (spec.kind == WeightKind::block_scaled || spec.scale == WeightScale::block_reach)
        s = abs_s / scale_node;
    if (spec.kind == WeightKind::abs) return s;
    return weight_cubic(s);
}

}  // namespace detail

// Descends by the sign of S; the leaf value is paired with the combined
// weight of every hyperplane met on the way. A single-leaf tree has
// weight 1.
inline WeightedValue evaluate_tree_weighted(const TreeNode& node, const std::vector<double>& x,
                                            const WeightSpec& spec) {
    const TreeNode* cur = &node;
    double w = 1.0;
    bool first = true;
    while (!cur->is_leaf) {
        const double s = cur->hp.signed_eval(x);
        const double wn = detail::node_weight(std::abs(s), cur->weight_scale, spec);
        if (first) {
            w = wn;
            first = false;
        } else if (spec.combiner == WeightCombiner::min) {
            w = std::min(w, wn);
        } else {
            w *= wn;
        }
        cur = (s >= 0.0) ? cur->pos.get() : cur->neg.get();
    }
    return {cur->model.evaluate(x), w};
}

inline WeightedValue evaluate_tree_weighted(const ModelTree& tree, const std::vector<double>& x,
                                            const WeightSpec& spec) {
    if (tree.offset.empty()) return evaluate_tree_weighted(*tree.root, x, spec);
    std::vector<double> xx(x.size());
    for (size_t i = 0; i < x.size(); ++i) xx[i] = x[i] - tree.offset[i];
    return evaluate_tree_weighted(*tree.root, xx, spec);
}

enum class ForestMode { retrained, shifted };

struct Forest {
    std::vector<ModelTree> trees;
    ForestMode mode = ForestMode::retrained;
    double shift_delta = 0.0;
    double helper_constant = 0.0;  // mean training output
    double mu = 1e-6;
    WeightSpec weight_spec;
    int grid_rows = 1;
    int grid_cols = 1;
    std::vector<double> axis_max;  // the training domain [0,w_i]^d

    int dims() const { return grid_rows * grid_cols; }
    ImageSpace space() const { return ImageSpace(grid_rows, grid_cols, axis_max); }

    Forest clone() const {
        Forest f;
        f.mode = mode;
        f.shift_delta = shift_delta;
        f.helper_constant = helper_constant;
        f.mu = mu;
        f.weight_spec = weight_spec;
        f.grid_rows = grid_rows;
        f.grid_cols = grid_cols;
        f.axis_max = axis_max;
        f.trees.reserve(trees.size());
        for (const ModelTree& t : trees) f.trees.push_back(t.clone());
        return f;
    }
};

// Weighted average of the trees' leaf values, with the constant helper tree
// taking up the slack max(0, mu - sum of weights) so the denominator never
// drops below mu.
inline double evaluate_forest(const Forest& forest, const std::vector<double>& x) {
    double w_total = 0.0;
    double acc = 0.0;
    for (const ModelTree& t : forest.trees) {
        const WeightedValue wv = evaluate_tree_weighted(t, x, forest.weight_spec);
        w_total += wv.weight;
        acc += wv.weight * wv.value;
    }
    if (w_total == 0.0) return forest.helper_constant;
    const double w_helper = std::max(0.0, forest.mu - w_total);
    return (acc + w_helper * forest.helper_constant) / (w_total + w_helper);
}

namespace detail {

// Refits every leaf model of a shifted copy on the training samples that
// land in that leaf under the tree's offset. Leaves that catch fewer than
// two samples keep the original model.
inline void refit_leaves(ModelTree& tree, const std::vector<Sample>& samples,
                         const ImageSpace& space) {
    std::vector<Sample> shifted = recenter(samples, tree.offset);
    std::vector<TreeNode*> leaves;
    std::vector<std::vector<int>> routed;
    std::unordered_map<TreeNode*, size_t> leaf_index;
    for (size_t s = 0; s < shifted.size(); ++s) {
        TreeNode* cur = tree.root.get();
        while (!cur->is_leaf)
            cur = (cur->hp.signed_eval(shifted[s].x) >= 0.0) ? cur->pos.get() : cur->neg.get();
        auto [it, inserted] = leaf_index.try_emplace(cur, leaves.size());
        if (inserted) {
            leaves.push_back(cur);
            routed.emplace_back();
        }
        routed[it->second].push_back(static_cast<int>(s));
    }
    for (size_t l = 0; l < leaves.size(); ++l) {
        if (routed[l].size() < 2) continue;
        BlockSums sums(space.dims());
        for (int idx : routed[l]) accumulate(sums, shifted[idx]);
        LeafModel m = fit(sums, space.axis_max);
        m.rms = rms_error(m, shifted, routed[l]);
        LeafModel flat;
        flat.alpha.assign(space.dims(), 0.0);
        flat.centroid.resize(space.dims());
        for (int i = 0; i < space.dims(); ++i) flat.centroid[i] = sums.sum_x[i] / sums.n;
        flat.mean_y = sums.sum_y / sums.n;
        flat.rms = rms_error(flat, shifted, routed[l]);
        leaves[l]->model = flat.rms < m.rms ? std::move(flat) : std::move(m);
    }
}

}  // namespace detail

struct ForestParams {
    int t_count = 3;
    ForestMode mode = ForestMode::retrained;
    double delta = 0.0;   // per-step shift, shifted mode
    double mu = 1e-6;
    WeightSpec weight_spec;
    std::uint64_t seed = 1;
    int threads = 1;
};

inline Forest build_forest(const std::vector<Sample>& samples, const ImageSpace& space,
                           const BuildParams& params, const ForestParams& fparams,
                           std::vector<SplitRecord>* split_log = nullptr) {
    if (fparams.t_count < 1)
        throw std::invalid_argument("build_forest: t_count must be >= 1");
    if (!(fparams.mu > 0.0))
        throw std::invalid_argument("build_forest: mu must be > 0");
    Forest forest;
    forest.mode = fparams.mode;
    forest.shift_delta = fparams.delta;
    forest.mu = fparams.mu;
    forest.weight_spec = fparams.weight_spec;
    forest.grid_rows = space.rows;
    forest.grid_cols = space.cols;
    forest.axis_max = space.axis_max;
    double y_sum = 0.0;
    for (const Sample& s : samples) y_sum += s.y;
    forest.helper_constant = y_sum / static_cast<double>(samples.size());

    if (fparams.mode == ForestMode::shifted) {
        forest.trees.push_back(build_tree(samples, space, params, split_log));
        for (int t = 1; t < fparams.t_count; ++t) {
            ModelTree copy = forest.trees.front().clone();
            for (double& o : copy.offset) o += t * fparams.delta;
            detail::refit_leaves(copy, samples, space);
            forest.trees.push_back(std::move(copy));
        }
        return forest;
    }

    // retrained mode: bootstrap subsample per tree, distinct seeds
    auto build_one = [&](int t) {
        std::mt19937_64 rng(fparams.seed + static_cast<std::uint64_t>(t));
        std::uniform_int_distribution<size_t> pick(0, samples.size() - 1);
        std::vector<Sample> boot;
        boot.reserve(samples.size());
        for (size_t i = 0; i < samples.size(); ++i) boot.push_back(samples[pick(rng)]);
        return build_tree(boot, space, params, t == 0 ? split_log : nullptr);
    };
    if (fparams.threads > 1) {
        std::vector<std::future<ModelTree>> futs;
        for (int t = 0; t < fparams.t_count; ++t)
            futs.push_back(std::async(std::launch::async, build_one, t));
        for (auto& f : futs) forest.trees.push_back(f.get());
    } else {
        for (int t = 0; t < fparams.t_count; ++t) forest.trees.push_back(build_one(t));
    }
    return forest;
}

}  // namespace oforest
