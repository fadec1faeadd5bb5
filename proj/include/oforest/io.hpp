#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oforest/core.hpp"

namespace oforest {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV sample format: header x0,...,x{d-1},y then one row per sample.
inline void write_csv(std::ostream& os, const std::vector<Sample>& samples) {
    if (samples.empty()) throw std::invalid_argument("write_csv: no samples");
    const size_t d = samples.front().x.size();
    for (size_t i = 0; i < d; ++i) os << 'x' << i << ',';
    os << "y\n";
    os.precision(17);
    for (const Sample& s : samples) {
        for (double v : s.x) os << v << ',';
        os << s.y << '\n';
    }
}

inline void write_csv(const std::string& path, const std::vector<Sample>& samples) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    write_csv(f, samples);
}

inline std::vector<Sample> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("read_csv: empty input");
    size_t d = 0;
    {
        std::stringstream hs(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(hs, col, ',')) cols.push_back(col);
        if (cols.empty() || cols.back() != "y")
            throw IoError("read_csv: header must end with y");
        d = cols.size() - 1;
    }
    std::vector<Sample> samples;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != d + 1)
            throw IoError("read_csv: wrong column count at line " + std::to_string(lineno));
        const double y = vals.back();
        vals.pop_back();
        samples.push_back(extend_sample(std::move(vals), y));
    }
    if (samples.empty()) throw IoError("read_csv: no sample rows");
    return samples;
}

inline std::vector<Sample> read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    return read_csv(f);
}

// Synthetic data spec: function name, grid shape, axis bounds, noise, seed,
// sample count.
struct SyntheticSpec {
    std::string function = "linear";
    int rows = 1;
    int cols = 1;
    std::vector<double> axis_max;  // scalar broadcast if size 1 != d
    double noise = 0.0;
    std::uint64_t seed = 1;
    int n = 1000;

    ImageSpace space() const {
        const int d = rows * cols;
        if (axis_max.empty()) return ImageSpace(rows, cols, 1.0);
        if (axis_max.size() == 1) return ImageSpace(rows, cols, axis_max[0]);
        if (axis_max.size() != static_cast<size_t>(d))
            throw std::invalid_argument("synthetic spec: axis_max length != rows*cols");
        return ImageSpace(rows, cols, axis_max);
    }
};

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.function = j.value("function", s.function);
    s.rows = j.value("rows", s.rows);
    s.cols = j.value("cols", s.cols);
    if (j.contains("axis_max")) {
        if (j.at("axis_max").is_number())
            s.axis_max = {j.at("axis_max").get<double>()};
        else
            s.axis_max = j.at("axis_max").get<std::vector<double>>();
    }
    s.noise = j.value("noise", s.noise);
    s.seed = j.value("seed", s.seed);
    s.n = j.value("n", s.n);
    return s;
}

inline std::vector<Sample> generate_synthetic(const SyntheticSpec& spec, ImageSpace& space_out) {
    space_out = spec.space();
    TargetFunction f = make_target(spec.function, space_out, spec.noise);
    return sample_function(f, spec.n, space_out, spec.seed);
}

}  // namespace oforest
