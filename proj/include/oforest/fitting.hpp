#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "oforest/core.hpp"

namespace oforest {

// Incremental sufficient statistics of a block. Accumulation over disjoint
// ranges may run concurrently and be merged field-wise; the sibling of a
// split can be obtained from the parent by subtraction.
struct BlockSums {
    std::size_t n = 0;
    std::vector<double> sum_x;
    double sum_y = 0.0;
    std::vector<double> sum_x2;
    std::vector<double> sum_xy;

    BlockSums() = default;
    explicit BlockSums(int d)
        : sum_x(d, 0.0), sum_x2(d, 0.0), sum_xy(d, 0.0) {}

    int dims() const { return static_cast<int>(sum_x.size()); }
};

inline void accumulate(BlockSums& sums, const Sample& s) {
    const size_t d = sums.sum_x.size();
    if (s.x.size() != d)
        throw std::invalid_argument("accumulate: sample dimension mismatch");
    ++sums.n;
    sums.sum_y += s.y;
    if (s.has_ext()) {
        for (size_t i = 0; i < d; ++i) {
            sums.sum_x[i] += s.x[i];
            sums.sum_x2[i] += s.ext[i];
            sums.sum_xy[i] += s.ext[d + i];
        }
    } else {
        for (size_t i = 0; i < d; ++i) {
            sums.sum_x[i] += s.x[i];
            sums.sum_x2[i] += s.x[i] * s.x[i];
            sums.sum_xy[i] += s.x[i] * s.y;
        }
    }
}

inline BlockSums subtract(const BlockSums& parent, const BlockSums& child) {
    if (child.n > parent.n)
        throw std::invalid_argument("subtract: child has more samples than parent");
    if (child.dims() != parent.dims())
        throw std::invalid_argument("subtract: dimension mismatch");
    BlockSums out(parent.dims());
    out.n = parent.n - child.n;
    out.sum_y = parent.sum_y - child.sum_y;
    for (int i = 0; i < parent.dims(); ++i) {
        out.sum_x[i] = parent.sum_x[i] - child.sum_x[i];
        out.sum_x2[i] = parent.sum_x2[i] - child.sum_x2[i];
        out.sum_xy[i] = parent.sum_xy[i] - child.sum_xy[i];
    }
    return out;
}

// Per-axis linear fit F(x) = sum_i alpha_i (x_i - c_i) + Y.
struct LeafModel {
    std::vector<double> alpha;
    std::vector<double> centroid;
    double mean_y = 0.0;
    double rms = -1.0;  // training RMS on the block; < 0 until scored

    double evaluate(const std::vector<double>& x) const {
        double y = mean_y;
        for (size_t i = 0; i < alpha.size(); ++i)
            y += alpha[i] * (x[i] - centroid[i]);
        return y;
    }
};

// Coordinate-wise least squares from the block sums. An axis whose centered
// second moment falls below 1e-12 * axis_scale_i^2 carries no signal and
// gets a zero coefficient.
inline LeafModel fit(const BlockSums& sums, const std::vector<double>& axis_scale) {
    if (sums.n < 2)
        throw std::invalid_argument("fit: need at least 2 samples");
    const int d = sums.dims();
    if (axis_scale.size() != static_cast<size_t>(d))
        throw std::invalid_argument("fit: axis_scale dimension mismatch");
    const double inv_n = 1.0 / static_cast<double>(sums.n);
    LeafModel m;
    m.alpha.resize(d);
    m.centroid.resize(d);
    m.mean_y = sums.sum_y * inv_n;
    for (int i = 0; i < d; ++i) {
        const double c = sums.sum_x[i] * inv_n;
        m.centroid[i] = c;
        const double denom = sums.sum_x2[i] * inv_n - c * c;
        const double tol = 1e-12 * axis_scale[i] * axis_scale[i];
        if (denom <= tol) {
            m.alpha[i] = 0.0;
        } else {
            m.alpha[i] = (sums.sum_xy[i] * inv_n - c * m.mean_y) / denom;
        }
    }
    return m;
}

inline double rms_error(const LeafModel& model, const std::vector<Sample>& samples,
                        const std::vector<int>& indices) {
    if (indices.empty())
        throw std::invalid_argument("rms_error: empty block");
    double acc = 0.0;
    for (int idx : indices) {
        const double r = model.evaluate(samples[idx].x) - samples[idx].y;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(indices.size()));
}

inline double rms_error(const LeafModel& model, const std::vector<Sample>& samples) {
    if (samples.empty())
        throw std::invalid_argument("rms_error: empty block");
    double acc = 0.0;
    for (const Sample& s : samples) {
        const double r = model.evaluate(s.x) - s.y;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace oforest
