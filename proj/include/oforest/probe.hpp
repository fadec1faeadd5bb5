#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "oforest/forest.hpp"

namespace oforest {

struct ProbeReport {
    int crossings = 0;
    double max_jump = 0.0;            // |F(x+dn) - F(x-dn)| at the jump step
    double max_deriv_mismatch = 0.0;  // |d+ - d-| / max(1, |d+|, |d-|) at the deriv step
    double jump_step = 1e-7;
    double deriv_step = 1e-5;
};

namespace detail {

inline void collect_internal(const TreeNode& node, std::vector<const TreeNode*>& out) {
    if (node.is_leaf) return;
    out.push_back(&node);
    collect_internal(*node.neg, out);
    collect_internal(*node.pos, out);
}

// Normalized |S| of every internal node on the path of x through the tree.
inline void path_normalized_s(const TreeNode& root, const std::vector<double>& x,
                              std::vector<double>& out) {
    const TreeNode* cur = &root;
    while (!cur->is_leaf) {
        const double s = cur->hp.signed_eval(x);
        out.push_back(std::abs(s) / cur->weight_scale);
        cur = (s >= 0.0) ? cur->pos.get() : cur->neg.get();
    }
}

}  // namespace detail

// Samples points on single hyperplane crossings and measures the forest
// output's jump and one-sided difference quotients across each. Crossings
// where another hyperplane (same tree or another tree's low weight) also
// vanishes nearby are skipped, so each probe isolates one boundary.
inline ProbeReport probe_smoothness(const Forest& forest, const ImageSpace& space,
                                    int target_crossings, std::uint64_t seed,
                                    double min_other_weight = 1e-3) {
    ProbeReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int d = space.dims();

    struct Site {
        const TreeNode* node;
        const ModelTree* tree;
    };
    std::vector<Site> sites;
    for (const ModelTree& t : forest.trees) {
        std::vector<const TreeNode*> nodes;
        detail::collect_internal(*t.root, nodes);
        for (const TreeNode* n : nodes) sites.push_back({n, &t});
    }
    if (sites.empty()) return rep;

    const int max_attempts = target_crossings * 200;
    for (int attempt = 0; attempt < max_attempts && rep.crossings < target_crossings;
         ++attempt) {
        const Site& site = sites[static_cast<size_t>(unit(rng) * sites.size()) % sites.size()];
        std::vector<double> x(d);
        for (int i = 0; i < d; ++i) x[i] = unit(rng) * space.axis_max[i];

        // project x onto the hyperplane (in the tree's shifted frame)
        std::vector<double> xt(d);
        for (int i = 0; i < d; ++i)
            xt[i] = x[i] - (site.tree->offset.empty() ? 0.0 : site.tree->offset[i]);
        const double s = site.node->hp.signed_eval(xt);
        double norm2 = 0.0;
        for (double a : site.node->hp.alpha) norm2 += a * a;
        if (norm2 == 0.0) continue;
        bool inside = true;
        std::vector<double> star(d);
        for (int i = 0; i < d; ++i) {
            star[i] = x[i] - s * site.node->hp.alpha[i] / norm2;
            const double margin = 0.01 * space.axis_max[i];
            if (star[i] < margin || star[i] > space.axis_max[i] - margin) inside = false;
        }
        if (!inside) continue;

        // isolate: no other hyperplane near zero at the probe point
        {
            std::vector<double> star_t(d);
            for (int i = 0; i < d; ++i)
                star_t[i] = star[i] - (site.tree->offset.empty() ? 0.0 : site.tree->offset[i]);
            std::vector<double> path_s;
            detail::path_normalized_s(*site.tree->root, star_t, path_s);
            int near_zero = 0;
            for (double v : path_s)
                if (v < 0.02) ++near_zero;
            if (near_zero != 1) continue;
        }
        {
            bool ok = true;
            for (const ModelTree& t : forest.trees) {
                if (&t == site.tree) continue;
                if (evaluate_tree_weighted(t, star, forest.weight_spec).weight <
                    min_other_weight) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
        }

        const double inv_norm = 1.0 / std::sqrt(norm2);
        auto at = [&](double step) {
            std::vector<double> p(d);
            for (int i = 0; i < d; ++i)
                p[i] = star[i] + step * site.node->hp.alpha[i] * inv_norm;
            return evaluate_forest(forest, p);
        };

        const double jump = std::abs(at(rep.jump_step) - at(-rep.jump_step));
        const double f0 = at(0.0);
        const double h = rep.deriv_step;
        const double dp = (at(h) - f0) / h;
        const double dm = (f0 - at(-h)) / h;
        const double mismatch = std::abs(dp - dm) / std::max({1.0, std::abs(dp), std::abs(dm)});

        rep.max_jump = std::max(rep.max_jump, jump);
        rep.max_deriv_mismatch = std::max(rep.max_deriv_mismatch, mismatch);
        ++rep.crossings;
    }
    return rep;
}

// Same crossing sampler against the hard (unweighted) evaluation of a
// single tree; reports the largest output jump across a boundary.
inline ProbeReport probe_hard_tree(const ModelTree& tree, const ImageSpace& space,
                                   int target_crossings, std::uint64_t seed) {
    ProbeReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int d = space.dims();
    std::vector<const TreeNode*> sites;
    detail::collect_internal(*tree.root, sites);
    if (sites.empty()) return rep;

    const int max_attempts = target_crossings * 200;
    for (int attempt = 0; attempt < max_attempts && rep.crossings < target_crossings;
         ++attempt) {
        const TreeNode* node = sites[static_cast<size_t>(unit(rng) * sites.size()) % sites.size()];
        std::vector<double> x(d);
        for (int i = 0; i < d; ++i) x[i] = unit(rng) * space.axis_max[i];
        std::vector<double> xt(d);
        for (int i = 0; i < d; ++i)
            xt[i] = x[i] - (tree.offset.empty() ? 0.0 : tree.offset[i]);
        const double s = node->hp.signed_eval(xt);
        double norm2 = 0.0;
        for (double a : node->hp.alpha) norm2 += a * a;
        if (norm2 == 0.0) continue;
        bool inside = true;
        std::vector<double> star(d);
        for (int i = 0; i < d; ++i) {
            star[i] = x[i] - s * node->hp.alpha[i] / norm2;
            const double margin = 0.01 * space.axis_max[i];
            if (star[i] < margin || star[i] > space.axis_max[i] - margin) inside = false;
        }
        if (!inside) continue;
        const double inv_norm = 1.0 / std::sqrt(norm2);
        auto at = [&](double step) {
            std::vector<double> p(d);
            for (int i = 0; i < d; ++i) p[i] = star[i] + step * node->hp.alpha[i] * inv_norm;
            return evaluate_hard(tree, p);
        };
        const double jump = std::abs(at(rep.jump_step) - at(-rep.jump_step));
        rep.max_jump = std::max(rep.max_jump, jump);
        ++rep.crossings;
    }
    return rep;
}

}  // namespace oforest
