#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace oforest {

// Row-major flattening: grid cell (r, c) -> index r * cols + c.
inline int flat_index(int r, int c, int cols) { return r * cols + c; }

// The domain of the regression: the hyper-rectangle [0,w_1] x ... x [0,w_d]
// of pixel-intensity vectors, laid out on a rows x cols grid.
struct ImageSpace {
    int rows = 1;
    int cols = 1;
    std::vector<double> axis_max;  // w_i > 0 per pixel

    ImageSpace() = default;
    ImageSpace(int rows_, int cols_, double w)
        : rows(rows_), cols(cols_), axis_max(static_cast<size_t>(rows_) * cols_, w) {
        validate();
    }
    ImageSpace(int rows_, int cols_, std::vector<double> w)
        : rows(rows_), cols(cols_), axis_max(std::move(w)) {
        validate();
    }

    int dims() const { return rows * cols; }

    void validate() const {
        if (rows < 1 || cols < 1)
            throw std::invalid_argument("ImageSpace: grid shape must be positive");
        if (axis_max.size() != static_cast<size_t>(rows) * cols)
            throw std::invalid_argument("ImageSpace: axis_max length != rows*cols");
        for (double w : axis_max)
            if (!(w > 0.0))
                throw std::invalid_argument("ImageSpace: every axis_max must be > 0");
    }

    bool contains(const std::vector<double>& x) const {
        if (x.size() != axis_max.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i] < 0.0 || x[i] > axis_max[i]) return false;
        return true;
    }
};

// One training point. `ext` holds the precomputed extensions
// (x_1^2 .. x_d^2, x_1*y .. x_d*y); blocks reference samples by index and
// read these instead of redoing the multiplications.
struct Sample {
    std::vector<double> x;
    double y = 0.0;
    std::vector<double> ext;

    bool has_ext() const { return !ext.empty(); }
};

inline Sample extend_sample(std::vector<double> x, double y) {
    Sample s;
    s.ext.resize(2 * x.size());
    const size_t d = x.size();
    for (size_t i = 0; i < d; ++i) {
        s.ext[i] = x[i] * x[i];
        s.ext[d + i] = x[i] * y;
    }
    s.x = std::move(x);
    s.y = y;
    return s;
}

// Block-average down-sampling. `image` is row-major rows x cols; both
// dimensions must be divisible by `block`.
inline std::vector<double> downsample(const std::vector<double>& image, int rows, int cols,
                                      int block) {
    if (block < 1) throw std::invalid_argument("downsample: block must be positive");
    if (image.size() != static_cast<size_t>(rows) * cols)
        throw std::invalid_argument("downsample: image size != rows*cols");
    if (rows % block != 0 || cols % block != 0)
        throw std::invalid_argument("downsample: rows and cols must be divisible by block");
    const int out_rows = rows / block;
    const int out_cols = cols / block;
    std::vector<double> out(static_cast<size_t>(out_rows) * out_cols, 0.0);
    const double inv = 1.0 / (static_cast<double>(block) * block);
    for (int r = 0; r < out_rows; ++r)
        for (int c = 0; c < out_cols; ++c) {
            double acc = 0.0;
            for (int dr = 0; dr < block; ++dr)
                for (int dc = 0; dc < block; ++dc)
                    acc += image[flat_index(r * block + dr, c * block + dc, cols)];
            out[flat_index(r, c, out_cols)] = acc * inv;
        }
    return out;
}

// Shifts every sample to x - origin and recomputes the extensions.
inline std::vector<Sample> recenter(const std::vector<Sample>& samples,
                                    const std::vector<double>& origin) {
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        if (s.x.size() != origin.size())
            throw std::invalid_argument("recenter: origin length mismatch");
        std::vector<double> x(s.x.size());
        for (size_t i = 0; i < x.size(); ++i) x[i] = s.x[i] - origin[i];
        out.push_back(extend_sample(std::move(x), s.y));
    }
    return out;
}

// A smooth target function plus an additive uniform noise amplitude.
struct TargetFunction {
    std::function<double(const std::vector<double>&)> eval;
    double noise_amplitude = 0.0;  // noise drawn uniformly from [-a, a]
    std::string name = "custom";
};

// Uniform sampling of the image space; deterministic per seed.
inline std::vector<Sample> sample_function(const TargetFunction& f, int n, const ImageSpace& space,
                                           std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_function: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int d = space.dims();
    std::vector<Sample> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        std::vector<double> x(d);
        for (int i = 0; i < d; ++i) x[i] = unit(rng) * space.axis_max[i];
        double y = f.eval(x);
        if (f.noise_amplitude > 0.0)
            y += (2.0 * unit(rng) - 1.0) * f.noise_amplitude;
        out.push_back(extend_sample(std::move(x), y));
    }
    return out;
}

// Synthetic function registry: covers trivially-fit, single-split and
// deep-tree regimes.
inline TargetFunction make_target(const std::string& name, const ImageSpace& space,
                                  double noise = 0.0) {
    TargetFunction f;
    f.name = name;
    f.noise_amplitude = noise;
    const std::vector<double> w = space.axis_max;
    const int d = space.dims();
    if (name == "constant") {
        f.eval = [](const std::vector<double>&) { return 1.0; };
    } else if (name == "linear") {
        f.eval = [d](const std::vector<double>& x) {
            double y = 1.0;
            for (int i = 0; i < d; ++i) y += (1.0 + i) * x[i] / d;
            return y;
        };
    } else if (name == "abs_ridge") {
        f.eval = [w](const std::vector<double>& x) { return std::abs(x[0] - 0.5 * w[0]); };
    } else if (name == "sin_product") {
        if (d >= 2) {
            f.eval = [w](const std::vector<double>& x) {
                return std::sin(M_PI * x[0] / w[0]) * std::cos(M_PI * x[1] / w[1]);
            };
        } else {
            f.eval = [w](const std::vector<double>& x) { return std::sin(M_PI * x[0] / w[0]); };
        }
    } else if (name == "quad_bowl") {
        f.eval = [w, d](const std::vector<double>& x) {
            double y = 0.0;
            for (int i = 0; i < d; ++i) {
                const double t = x[i] - 0.5 * w[i];
                y += t * t;
            }
            return y;
        };
    } else {
        throw std::invalid_argument("unknown target function: " + name);
    }
    return f;
}

}  // namespace oforest
