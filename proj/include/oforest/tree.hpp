#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "oforest/core.hpp"
#include "oforest/fitting.hpp"

namespace oforest {

// Axis-parallel bounding hyper-rectangle of a block. Axes outside `active`
// are ignored by all geometry.
struct BoundingHR {
    std::vector<double> mid;
    std::vector<double> half;
    std::vector<std::uint8_t> active;  // mask, 1 = retained

    int dims() const { return static_cast<int>(mid.size()); }

    static BoundingHR from_intervals(const std::vector<double>& lo,
                                     const std::vector<double>& hi) {
        BoundingHR hr;
        const size_t d = lo.size();
        hr.mid.resize(d);
        hr.half.resize(d);
        hr.active.assign(d, 1);
        for (size_t i = 0; i < d; ++i) {
            hr.mid[i] = 0.5 * (lo[i] + hi[i]);
            hr.half[i] = 0.5 * (hi[i] - lo[i]);
        }
        return hr;
    }
};

// Affine separator S(x) = sum_i alpha_i (x_i - anchor_i) through the block
// midpoint; its coefficients sit on the pixel grid.
struct Hyperplane {
    std::vector<double> alpha;
    std::vector<double> anchor;
    int grid_rows = 1;
    int grid_cols = 1;

    double signed_eval(const std::vector<double>& x) const {
        double s = 0.0;
        for (size_t i = 0; i < alpha.size(); ++i)
            s += alpha[i] * (x[i] - anchor[i]);
        return s;
    }
};

// 2-D convolution kernel applied to the hyperplane coefficient grid.
struct Kernel {
    int rows = 1;
    int cols = 1;
    std::vector<double> w{1.0};

    // Center 1/2, the eight neighbors 1/16 each; sums to 1.
    static Kernel default3x3() {
        Kernel k;
        k.rows = k.cols = 3;
        k.w = {1.0 / 16, 1.0 / 16, 1.0 / 16, 1.0 / 16, 0.5,
               1.0 / 16, 1.0 / 16, 1.0 / 16, 1.0 / 16};
        return k;
    }
    static Kernel identity() { return Kernel{}; }
};

struct BuildParams {
    double epsilon = 0.1;               // RMS target
    double tau = 0.5;                   // tilt parameter, in (0,1)
    double importance_drop_fraction = 0.01;  // drop axis when |a_i| h_i < this * epsilon
    int n_max = 0;                      // cap on nonzero HP coefficients; 0 = unlimited
    Kernel kernel = Kernel::default3x3();
    int min_samples = 8;
    int max_depth = 32;
    bool recenter_to_midpoint = true;   // fit in coordinates centered on the root HR
    bool tighten_hr = true;             // intersect child HRs with the samples' bbox

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("BuildParams: epsilon must be > 0");
        if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("BuildParams: tau in (0,1)");
        if (min_samples < 2) throw std::invalid_argument("BuildParams: min_samples >= 2");
        if (max_depth < 0) throw std::invalid_argument("BuildParams: max_depth >= 0");
        if (kernel.rows % 2 == 0 || kernel.cols % 2 == 0)
            throw std::invalid_argument("BuildParams: kernel dimensions must be odd");
    }
};

struct TreeNode {
    bool is_leaf = true;
    // leaf
    LeafModel model;
    BoundingHR hr;
    // internal
    Hyperplane hp;
    double weight_scale = 1.0;  // sum of |alpha_i| h_i over the block's HR
    std::unique_ptr<TreeNode> neg;
    std::unique_ptr<TreeNode> pos;

    std::unique_ptr<TreeNode> clone() const {
        auto n = std::make_unique<TreeNode>();
        n->is_leaf = is_leaf;
        n->model = model;
        n->hr = hr;
        n->hp = hp;
        n->weight_scale = weight_scale;
        if (neg) n->neg = neg->clone();
        if (pos) n->pos = pos->clone();
        return n;
    }
};

// A tree plus the translation applied to inputs before descending. The
// offset carries both the root-midpoint recentering and, for shifted forest
// members, the per-tree shift.
struct ModelTree {
    std::vector<double> offset;
    std::unique_ptr<TreeNode> root;

    ModelTree clone() const {
        ModelTree t;
        t.offset = offset;
        if (root) t.root = root->clone();
        return t;
    }
};

inline std::vector<double> importance(const std::vector<double>& alpha, const BoundingHR& hr) {
    if (alpha.size() != hr.mid.size())
        throw std::invalid_argument("importance: dimension mismatch");
    std::vector<double> imp(alpha.size(), 0.0);
    for (size_t i = 0; i < alpha.size(); ++i)
        if (hr.active[i]) imp[i] = std::abs(alpha[i]) * hr.half[i];
    return imp;
}

// Upper bound on the output change attributable to axis i across the block.
inline std::vector<double> beta_bounds(const std::vector<double>& alpha, const BoundingHR& hr) {
    std::vector<double> b = importance(alpha, hr);
    for (double& v : b) v *= 2.0;
    return b;
}

// Zeroes coefficients of negligible importance and removes those axes from
// the child blocks; enforces the hardware cap n_max by zeroing the
// lowest-importance survivors (those axes stay active). The top-importance
// coefficient always survives.
inline std::pair<Hyperplane, std::vector<std::uint8_t>> prune_variables(
    const Hyperplane& hp, const BoundingHR& hr, const BuildParams& params) {
    Hyperplane out = hp;
    std::vector<std::uint8_t> active = hr.active;
    std::vector<double> imp = importance(hp.alpha, hr);
    const size_t d = imp.size();

    size_t top = 0;
    for (size_t i = 1; i < d; ++i)
        if (imp[i] > imp[top]) top = i;

    const double threshold = params.importance_drop_fraction * params.epsilon;
    for (size_t i = 0; i < d; ++i) {
        if (i == top) continue;
        if (out.alpha[i] != 0.0 && imp[i] < threshold) {
            out.alpha[i] = 0.0;
            active[i] = 0;
        }
    }

    if (params.n_max > 0) {
        std::vector<size_t> nonzero;
        for (size_t i = 0; i < d; ++i)
            if (out.alpha[i] != 0.0) nonzero.push_back(i);
        if (nonzero.size() > static_cast<size_t>(params.n_max)) {
            std::sort(nonzero.begin(), nonzero.end(), [&](size_t a, size_t b) {
                if (imp[a] != imp[b]) return imp[a] < imp[b];
                return a < b;  // deterministic tie-break
            });
            size_t excess = nonzero.size() - static_cast<size_t>(params.n_max);
            for (size_t j = 0; j < nonzero.size() && excess > 0; ++j) {
                if (nonzero[j] == top) continue;
                out.alpha[nonzero[j]] = 0.0;
                --excess;
            }
        }
    }
    return {std::move(out), std::move(active)};
}

// Spreads each coefficient to its grid neighbors; zero padding at the
// edges. The anchor is untouched, so S(anchor) stays 0.
inline Hyperplane convolve_hp(const Hyperplane& hp, const Kernel& k) {
    if (k.rows % 2 == 0 || k.cols % 2 == 0)
        throw std::invalid_argument("convolve_hp: kernel dimensions must be odd");
    if (hp.alpha.size() != static_cast<size_t>(hp.grid_rows) * hp.grid_cols)
        throw std::invalid_argument("convolve_hp: alpha length != grid size");
    Hyperplane out = hp;
    const int cr = k.rows / 2;
    const int cc = k.cols / 2;
    for (int r = 0; r < hp.grid_rows; ++r)
        for (int c = 0; c < hp.grid_cols; ++c) {
            double acc = 0.0;
            for (int kr = 0; kr < k.rows; ++kr)
                for (int kc = 0; kc < k.cols; ++kc) {
                    const int sr = r + kr - cr;
                    const int sc = c + kc - cc;
                    if (sr < 0 || sr >= hp.grid_rows || sc < 0 || sc >= hp.grid_cols) continue;
                    acc += k.w[kr * k.cols + kc] * hp.alpha[flat_index(sr, sc, hp.grid_cols)];
                }
            out.alpha[flat_index(r, c, hp.grid_cols)] = acc;
        }
    return out;
}

// Picks the split axis k = argmax importance (ties to the lowest index) and
// restores the tilt constraint tau |a_k| h_k >= sum_{i != k} |a_i| h_i by
// uniformly scaling the right-hand side when violated.
inline std::pair<Hyperplane, int> enforce_tilt(const Hyperplane& hp, const BoundingHR& hr,
                                               double tau) {
    std::vector<double> imp = importance(hp.alpha, hr);
    int k = -1;
    double best = -1.0;
    for (size_t i = 0; i < imp.size(); ++i)
        if (hr.active[i] && hp.alpha[i] != 0.0 && imp[i] > best) {
            best = imp[i];
            k = static_cast<int>(i);
        }
    if (k < 0)
        throw std::invalid_argument("enforce_tilt: no nonzero coefficient on an active axis");

    double rhs = 0.0;
    for (size_t i = 0; i < imp.size(); ++i)
        if (static_cast<int>(i) != k) rhs += imp[i];
    const double lhs = tau * imp[k];
    if (lhs >= rhs || rhs == 0.0) return {hp, k};

    const double lambda = lhs / rhs;
    Hyperplane out = hp;
    for (size_t i = 0; i < out.alpha.size(); ++i)
        if (static_cast<int>(i) != k) out.alpha[i] *= lambda;
    return {std::move(out), k};
}

struct SplitRecord {
    int axis = -1;
    bool fallback = false;  // axis-parallel median cut, not a midpoint cut
    std::vector<double> parent_half;
    std::vector<double> neg_half;
    std::vector<double> pos_half;
};

namespace detail {

// Child HR on the split axis: the conservative hull of each side of a
// midpoint cut with reach r = sum_{i != k} |a_i| h_i / |a_k|.
inline void child_intervals_on_axis(const BoundingHR& hr, const Hyperplane& hp, int k,
                                    double& neg_lo, double& neg_hi, double& pos_lo,
                                    double& pos_hi) {
    const double m = hr.mid[k];
    const double h = hr.half[k];
    const double a = hp.anchor[k];  // equals m except for the median fallback
    double reach = 0.0;
    for (size_t i = 0; i < hp.alpha.size(); ++i)
        if (static_cast<int>(i) != k && hr.active[i])
            reach += std::abs(hp.alpha[i]) * hr.half[i];
    double r = reach / std::abs(hp.alpha[k]);
    const double cut_lo = std::max(a - r, m - h);
    const double cut_hi = std::min(a + r, m + h);
    if (hp.alpha[k] > 0.0) {
        pos_lo = cut_lo; pos_hi = m + h;
        neg_lo = m - h; neg_hi = cut_hi;
    } else {
        pos_lo = m - h; pos_hi = cut_hi;
        neg_lo = cut_lo; neg_hi = m + h;
    }
}

inline BoundingHR tighten(const BoundingHR& hr, const std::vector<Sample>& samples,
                          const std::vector<int>& indices) {
    BoundingHR out = hr;
    const int d = hr.dims();
    for (int i = 0; i < d; ++i) {
        if (!hr.active[i]) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int idx : indices) {
            lo = std::min(lo, samples[idx].x[i]);
            hi = std::max(hi, samples[idx].x[i]);
        }
        // intersect the bbox with the hull interval
        lo = std::max(lo, hr.mid[i] - hr.half[i]);
        hi = std::min(hi, hr.mid[i] + hr.half[i]);
        if (lo <= hi) {
            out.mid[i] = 0.5 * (lo + hi);
            out.half[i] = 0.5 * (hi - lo);
        }
    }
    return out;
}

}  // namespace detail

struct SplitResult {
    std::vector<int> neg_indices;
    std::vector<int> pos_indices;
    BoundingHR neg_hr;
    BoundingHR pos_hr;
};

// Routes samples by the sign of S (S >= 0 goes to pos) and derives the
// children's bounding HRs. Throws when every sample lands on one side.
inline SplitResult split_block(const std::vector<Sample>& samples,
                               const std::vector<int>& indices, const BoundingHR& hr,
                               const Hyperplane& hp, int k, bool tighten = true) {
    SplitResult res;
    for (int idx : indices) {
        if (hp.signed_eval(samples[idx].x) >= 0.0)
            res.pos_indices.push_back(idx);
        else
            res.neg_indices.push_back(idx);
    }
    if (res.neg_indices.empty() || res.pos_indices.empty())
        throw std::runtime_error("split_block: all samples on one side");

    double nlo, nhi, plo, phi;
    detail::child_intervals_on_axis(hr, hp, k, nlo, nhi, plo, phi);
    res.neg_hr = hr;
    res.neg_hr.mid[k] = 0.5 * (nlo + nhi);
    res.neg_hr.half[k] = 0.5 * (nhi - nlo);
    res.pos_hr = hr;
    res.pos_hr.mid[k] = 0.5 * (plo + phi);
    res.pos_hr.half[k] = 0.5 * (phi - plo);
    if (tighten) {
        res.neg_hr = detail::tighten(res.neg_hr, samples, res.neg_indices);
        res.pos_hr = detail::tighten(res.pos_hr, samples, res.pos_indices);
    }
    return res;
}

inline double evaluate_hard(const TreeNode& node, const std::vector<double>& x) {
    const TreeNode* cur = &node;
    while (!cur->is_leaf)
        cur = (cur->hp.signed_eval(x) >= 0.0) ? cur->pos.get() : cur->neg.get();
    return cur->model.evaluate(x);
}

inline double evaluate_hard(const ModelTree& tree, const std::vector<double>& x) {
    if (tree.offset.empty()) return evaluate_hard(*tree.root, x);
    std::vector<double> xx(x.size());
    for (size_t i = 0; i < x.size(); ++i) xx[i] = x[i] - tree.offset[i];
    return evaluate_hard(*tree.root, xx);
}

namespace detail {

// Axis-parallel median cut used when the fitted direction is degenerate or
// routes everything to one side. Tries axes by decreasing half-width until
// one separates the samples.
inline bool median_fallback(const std::vector<Sample>& samples, const std::vector<int>& indices,
                            const BoundingHR& hr, int preferred_axis, Hyperplane& hp_out,
                            int& k_out) {
    const int d = hr.dims();
    std::vector<int> order;
    for (int i = 0; i < d; ++i)
        if (hr.active[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (hr.half[a] != hr.half[b]) return hr.half[a] > hr.half[b];
        return a < b;
    });
    if (preferred_axis >= 0 && hr.active[preferred_axis]) {
        order.erase(std::remove(order.begin(), order.end(), preferred_axis), order.end());
        order.insert(order.begin(), preferred_axis);
    }
    for (int axis : order) {
        std::vector<double> vals;
        vals.reserve(indices.size());
        for (int idx : indices) vals.push_back(samples[idx].x[axis]);
        std::sort(vals.begin(), vals.end());
        const double cut = vals[vals.size() / 2];
        if (cut <= vals.front() || cut > vals.back()) continue;  // does not separate
        Hyperplane hp;
        hp.alpha.assign(d, 0.0);
        hp.alpha[axis] = 1.0;
        hp.anchor = hr.mid;
        hp.anchor[axis] = cut;
        hp_out = std::move(hp);
        k_out = axis;
        return true;
    }
    return false;
}

struct Builder {
    const std::vector<Sample>& samples;
    const ImageSpace& space;
    const BuildParams& params;
    std::vector<SplitRecord>* split_log = nullptr;

    std::unique_ptr<TreeNode> make_leaf(LeafModel model, const BoundingHR& hr) const {
        auto node = std::make_unique<TreeNode>();
        node->is_leaf = true;
        node->model = std::move(model);
        node->hr = hr;
        return node;
    }

    void log_split(int k, bool fb, const BoundingHR& parent, const BoundingHR& neg,
                   const BoundingHR& pos) const {
        if (!split_log) return;
        SplitRecord rec;
        rec.axis = k;
        rec.fallback = fb;
        rec.parent_half = parent.half;
        rec.neg_half = neg.half;
        rec.pos_half = pos.half;
        split_log->push_back(std::move(rec));
    }

    // Sample mean as a zero-slope model; the per-axis fit can overshoot badly
    // on a handful of samples, so leaves keep whichever model has lower RMS.
    LeafModel constant_model(const BlockSums& sums) const {
        LeafModel m;
        m.alpha.assign(sums.dims(), 0.0);
        m.centroid.resize(sums.dims());
        for (int i = 0; i < sums.dims(); ++i) m.centroid[i] = sums.sum_x[i] / sums.n;
        m.mean_y = sums.sum_y / sums.n;
        return m;
    }

    // Axis whose median cut buys the largest SSE drop of a 1-D linear fit
    // along that axis (whole-block fit minus summed per-child fits). The gain
    // isolates what the cut itself captures — curvature along the axis —
    // which the block's linear fit cannot see.
    int best_variance_axis(const std::vector<int>& indices, const BoundingHR& hr) const {
        int best = -1;
        double best_gain = -std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, double>> pts(indices.size());
        const auto fit_sse = [&](size_t lo, size_t hi) {
            const double cnt = static_cast<double>(hi - lo);
            double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
            for (size_t j = lo; j < hi; ++j) {
                const auto [x, y] = pts[j];
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                syy += y * y;
            }
            const double varx = sxx - sx * sx / cnt;
            const double covxy = sxy - sx * sy / cnt;
            double s = syy - sy * sy / cnt;
            if (varx > 0.0) s -= covxy * covxy / varx;
            return std::max(s, 0.0);
        };
        for (int axis = 0; axis < hr.dims(); ++axis) {
            if (!hr.active[axis] || hr.half[axis] <= 0.0) continue;
            for (size_t j = 0; j < indices.size(); ++j)
                pts[j] = {samples[indices[j]].x[axis], samples[indices[j]].y};
            std::sort(pts.begin(), pts.end());
            const size_t m = pts.size() / 2;
            if (pts[m].first <= pts.front().first) continue;  // cut would not separate
            const double gain = fit_sse(0, pts.size()) - fit_sse(0, m) - fit_sse(m, pts.size());
            if (gain > best_gain) {
                best_gain = gain;
                best = axis;
            }
        }
        return best;
    }

    // Summed squared residual of the children's coordinate-wise fits.
    double split_sse(const SplitResult& s) const {
        double total = 0.0;
        for (const std::vector<int>* side : {&s.neg_indices, &s.pos_indices}) {
            BlockSums bs(static_cast<int>(space.dims()));
            for (int idx : *side) accumulate(bs, samples[idx]);
            if (bs.n < 2) continue;
            LeafModel m = fit(bs, space.axis_max);
            const double r = rms_error(m, samples, *side);
            total += r * r * static_cast<double>(side->size());
        }
        return total;
    }

    std::unique_ptr<TreeNode> build(const std::vector<int>& indices, const BlockSums& sums,
                                    const BoundingHR& hr, int depth,
                                    double parent_rms = std::numeric_limits<double>::infinity()) const {
        if (sums.n < 2) {
            LeafModel constant = constant_model(sums);
            constant.rms = 0.0;
            return make_leaf(std::move(constant), hr);
        }
        LeafModel model = fit(sums, space.axis_max);
        model.rms = rms_error(model, samples, indices);
        LeafModel flat = constant_model(sums);
        flat.rms = rms_error(flat, samples, indices);
        const LeafModel& best = flat.rms < model.rms ? flat : model;
        if (best.rms <= params.epsilon || depth >= params.max_depth ||
            indices.size() < 2 * static_cast<size_t>(params.min_samples))
            return make_leaf(LeafModel(best), hr);

        Hyperplane hp;
        hp.alpha = model.alpha;
        hp.anchor = hr.mid;
        hp.grid_rows = space.rows;
        hp.grid_cols = space.cols;
        for (int i = 0; i < hr.dims(); ++i)
            if (!hr.active[i]) hp.alpha[i] = 0.0;

        hp = convolve_hp(hp, params.kernel);
        for (int i = 0; i < hr.dims(); ++i)
            if (!hr.active[i]) hp.alpha[i] = 0.0;  // convolution may bleed into pruned axes

        bool fallback = false;
        int k = -1;
        std::vector<std::uint8_t> child_active = hr.active;
        bool degenerate = true;
        for (int i = 0; i < hr.dims(); ++i)
            if (hr.active[i] && hp.alpha[i] != 0.0 && hr.half[i] > 0.0) degenerate = false;
        // When the fit explains little of the block variance the hyperplane
        // direction is sampling noise (flat gradient, e.g. a bowl center or a
        // ridge line) and its conservative-hull shrink is weak, and the same
        // holds when cuts have stalled (under 1% RMS improvement). Both cases
        // fall back to the axis-parallel cut with the best scan score.
        int preferred = -1;
        if (model.rms > 0.99 * parent_rms || model.rms > 0.9 * flat.rms) {
            preferred = best_variance_axis(indices, hr);
            degenerate = true;
        }
        if (!degenerate) {
            auto pruned = prune_variables(hp, hr, params);
            hp = std::move(pruned.first);
            child_active = std::move(pruned.second);
            BoundingHR masked = hr;
            masked.active = child_active;
            auto tilted = enforce_tilt(hp, masked, params.tau);
            hp = std::move(tilted.first);
            k = tilted.second;
        }
        // near a flat spot of f the fitted direction keeps cutting the same
        // steep axis and the block turns pencil-shaped while the residual
        // curvature lives elsewhere; divert to the best variance-scan cut
        if (!degenerate) {
            double widest = 0.0;
            for (int i = 0; i < hr.dims(); ++i)
                if (child_active[i]) widest = std::max(widest, hr.half[i]);
            if (hr.half[k] < 0.5 * widest && preferred < 0) {
                preferred = best_variance_axis(indices, hr);
                degenerate = preferred >= 0;
            }
        }

        SplitResult split;
        bool have_split = false;
        if (!degenerate) {
            try {
                split = split_block(samples, indices, hr, hp, k, params.tighten_hr);
                // a lopsided cut would starve a child; use the median cut instead
                const size_t floor = static_cast<size_t>(params.min_samples);
                have_split = split.neg_indices.size() >= floor &&
                             split.pos_indices.size() >= floor;
            } catch (const std::runtime_error&) {
                // all samples on one side; fall through to the median cut
            }
        }
        // The tilt-constrained hull shrinks the cut axis by at most (1+tau)/2,
        // which is weak in high dimension; adopt the scan cut whenever it
        // leaves the children with a lower summed fit SSE than the oblique one.
        if (have_split) {
            Hyperplane scan_hp;
            int scan_k = -1;
            const int scan_axis = best_variance_axis(indices, hr);
            if (scan_axis >= 0 &&
                median_fallback(samples, indices, hr, scan_axis, scan_hp, scan_k)) {
                scan_hp.grid_rows = space.rows;
                scan_hp.grid_cols = space.cols;
                SplitResult scan = split_block(samples, indices, hr, scan_hp, scan_k,
                                               params.tighten_hr);
                if (split_sse(scan) < split_sse(split)) {
                    hp = std::move(scan_hp);
                    k = scan_k;
                    fallback = true;
                    split = std::move(scan);
                }
            }
        }
        if (!have_split) {
            Hyperplane fb_hp;
            int fb_k = -1;
            if (!median_fallback(samples, indices, hr, preferred >= 0 ? preferred : k, fb_hp,
                                 fb_k))
                return make_leaf(LeafModel(best), hr);  // no axis separates the samples
            fb_hp.grid_rows = space.rows;
            fb_hp.grid_cols = space.cols;
            hp = std::move(fb_hp);
            k = fb_k;
            fallback = true;
            split = split_block(samples, indices, hr, hp, k, params.tighten_hr);
        }
        split.neg_hr.active = child_active;
        split.pos_hr.active = child_active;
        log_split(k, fallback, hr, split.neg_hr, split.pos_hr);

        // accumulate the smaller child, get the sibling by subtraction
        const bool neg_smaller = split.neg_indices.size() <= split.pos_indices.size();
        const std::vector<int>& small = neg_smaller ? split.neg_indices : split.pos_indices;
        BlockSums small_sums(sums.dims());
        for (int idx : small) accumulate(small_sums, samples[idx]);
        BlockSums other_sums = subtract(sums, small_sums);

        auto node = std::make_unique<TreeNode>();
        node->is_leaf = false;
        node->hr = hr;
        node->hp = std::move(hp);
        {
            double scale = 0.0;
            for (int i = 0; i < hr.dims(); ++i)
                if (hr.active[i]) scale += std::abs(node->hp.alpha[i]) * hr.half[i];
            node->weight_scale = scale > 0.0 ? scale : 1.0;
        }
        node->neg = build(split.neg_indices, neg_smaller ? small_sums : other_sums,
                          split.neg_hr, depth + 1, model.rms);
        node->pos = build(split.pos_indices, neg_smaller ? other_sums : small_sums,
                          split.pos_hr, depth + 1, model.rms);
        return node;
    }
};

}  // namespace detail

// Builds one oblique model tree over the whole sample set.
inline ModelTree build_tree(const std::vector<Sample>& samples, const ImageSpace& space,
                            const BuildParams& params,
                            std::vector<SplitRecord>* split_log = nullptr) {
    params.validate();
    if (samples.size() < static_cast<size_t>(params.min_samples))
        throw std::invalid_argument("build_tree: not enough samples");
    const int d = space.dims();

    ModelTree tree;
    tree.offset.assign(d, 0.0);
    std::vector<double> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = 0.0;
        hi[i] = space.axis_max[i];
    }
    const std::vector<Sample>* work = &samples;
    std::vector<Sample> recentered;
    if (params.recenter_to_midpoint) {
        for (int i = 0; i < d; ++i) tree.offset[i] = 0.5 * space.axis_max[i];
        recentered = recenter(samples, tree.offset);
        work = &recentered;
        for (int i = 0; i < d; ++i) {
            lo[i] -= tree.offset[i];
            hi[i] -= tree.offset[i];
        }
    }
    BoundingHR root_hr = BoundingHR::from_intervals(lo, hi);

    std::vector<int> indices(work->size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    BlockSums sums(d);
    for (const Sample& s : *work) accumulate(sums, s);

    detail::Builder builder{*work, space, params, split_log};
    tree.root = builder.build(indices, sums, root_hr, 0);
    return tree;
}

inline int count_leaves(const TreeNode& node) {
    if (node.is_leaf) return 1;
    return count_leaves(*node.neg) + count_leaves(*node.pos);
}

inline int tree_depth(const TreeNode& node) {
    if (node.is_leaf) return 0;
    return 1 + std::max(tree_depth(*node.neg), tree_depth(*node.pos));
}

}  // namespace oforest
