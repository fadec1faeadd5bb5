#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "oforest/forest.hpp"

namespace oforest {

// A grid-to-grid pixel permutation. map[j] is the source pixel feeding
// target pixel j.
struct Permutation {
    std::vector<int> map;
    std::string descriptor = "identity";

    int dims() const { return static_cast<int>(map.size()); }

    Permutation inverse() const {
        Permutation inv;
        inv.map.resize(map.size());
        inv.descriptor = "inverse(" + descriptor + ")";
        for (size_t j = 0; j < map.size(); ++j) inv.map[map[j]] = static_cast<int>(j);
        return inv;
    }
};

// first then second: applying `compose(p, q)` equals applying p, then q.
inline Permutation compose(const Permutation& first, const Permutation& second) {
    if (first.map.size() != second.map.size())
        throw std::invalid_argument("compose: dimension mismatch");
    Permutation out;
    out.map.resize(first.map.size());
    out.descriptor = second.descriptor + "*" + first.descriptor;
    for (size_t j = 0; j < out.map.size(); ++j) out.map[j] = first.map[second.map[j]];
    return out;
}

// Supported transforms: identity, clockwise rotations by multiples of 90
// degrees (90/270 require a square grid), cyclic translations.
inline Permutation permutation_from_transform(int rows, int cols, const std::string& tag) {
    Permutation p;
    p.descriptor = tag;
    const int d = rows * cols;
    p.map.resize(d);
    auto mod = [](int a, int m) { return ((a % m) + m) % m; };
    if (tag == "identity") {
        for (int j = 0; j < d; ++j) p.map[j] = j;
    } else if (tag == "rot90") {
        if (rows != cols) throw std::invalid_argument("rot90 requires a square grid");
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                p.map[flat_index(r, c, cols)] = flat_index(rows - 1 - c, r, cols);
    } else if (tag == "rot180") {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                p.map[flat_index(r, c, cols)] = flat_index(rows - 1 - r, cols - 1 - c, cols);
    } else if (tag == "rot270") {
        if (rows != cols) throw std::invalid_argument("rot270 requires a square grid");
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                p.map[flat_index(r, c, cols)] = flat_index(c, cols - 1 - r, cols);
    } else if (tag.rfind("translate(", 0) == 0 && tag.back() == ')') {
        const std::string body = tag.substr(10, tag.size() - 11);
        const size_t comma = body.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("translate requires (dr,dc)");
        const int dr = std::stoi(body.substr(0, comma));
        const int dc = std::stoi(body.substr(comma + 1));
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                p.map[flat_index(r, c, cols)] =
                    flat_index(mod(r - dr, rows), mod(c - dc, cols), cols);
    } else {
        throw std::invalid_argument("unsupported transform: " + tag);
    }
    return p;
}

inline std::vector<double> permute_image(const std::vector<double>& x, const Permutation& p) {
    if (x.size() != p.map.size())
        throw std::invalid_argument("permute_image: length mismatch");
    std::vector<double> out(x.size());
    for (size_t j = 0; j < x.size(); ++j) out[j] = x[p.map[j]];
    return out;
}

namespace detail {

template <typename T>
inline void permute_in_place(std::vector<T>& v, const Permutation& p) {
    if (v.empty()) return;
    if (v.size() != p.map.size())
        throw std::invalid_argument("permute_forest: dimension mismatch");
    std::vector<T> out(v.size());
    for (size_t j = 0; j < v.size(); ++j) out[j] = v[p.map[j]];
    v = std::move(out);
}

inline void permute_node(TreeNode& node, const Permutation& p) {
    permute_in_place(node.hr.mid, p);
    permute_in_place(node.hr.half, p);
    permute_in_place(node.hr.active, p);
    if (node.is_leaf) {
        permute_in_place(node.model.alpha, p);
        permute_in_place(node.model.centroid, p);
        return;
    }
    permute_in_place(node.hp.alpha, p);
    permute_in_place(node.hp.anchor, p);
    permute_node(*node.neg, p);
    permute_node(*node.pos, p);
}

}  // namespace detail

// Reindexes every coefficient vector of the forest so that it responds to
// permuted images exactly as the original does to the originals.
inline Forest permute_forest(const Forest& forest, const Permutation& p) {
    if (forest.dims() != p.dims())
        throw std::invalid_argument("permute_forest: dimension mismatch");
    Forest out = forest.clone();
    detail::permute_in_place(out.axis_max, p);
    for (ModelTree& t : out.trees) {
        detail::permute_in_place(t.offset, p);
        detail::permute_node(*t.root, p);
    }
    return out;
}

}  // namespace oforest
