#pragma once

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oforest/distortion.hpp"
#include "oforest/forest.hpp"
#include "oforest/io.hpp"
#include "oforest/probe.hpp"
#include "oforest/serialize.hpp"
#include "oforest/tree.hpp"

namespace oforest {

// Line-oriented key=value report, machine-diffable; optionally mirrored to
// a JSON file.
struct Report {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value) {
        entries.emplace_back(key, value);
    }
    void add(const std::string& key, double value) {
        std::ostringstream os;
        os.precision(17);
        os << value;
        add(key, os.str());
    }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }
    void add(const std::string& key, size_t value) { add(key, std::to_string(value)); }

    void print(std::ostream& os) const {
        for (const auto& [k, v] : entries) os << k << '=' << v << '\n';
    }
    void write_json(const std::string& path) const {
        nlohmann::json j;
        for (const auto& [k, v] : entries) j[k] = v;
        std::ofstream f(path);
        if (!f) throw IoError("cannot write report: " + path);
        f << j.dump(2) << '\n';
    }
};

struct RunConfig {
    std::string command;
    // data source: exactly one of csv_path / synthetic
    std::string csv_path;
    bool has_synthetic = false;
    SyntheticSpec synthetic;
    // space for CSV data
    bool has_space = false;
    int space_rows = 1, space_cols = 1;
    std::vector<double> space_axis_max;

    BuildParams build;
    ForestParams forest;

    std::string forest_in;
    std::string out_path;
    std::string report_path;
    std::string transform;
    int probe_crossings = 200;
    int bench_evals = 200000;
    std::uint64_t seed = 1;
    int threads = 1;
};

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.command = j.value("command", "");
    if (j.contains("data")) {
        const auto& d = j.at("data");
        if (d.contains("csv")) c.csv_path = d.at("csv").get<std::string>();
        if (d.contains("synthetic")) {
            c.has_synthetic = true;
            c.synthetic = synthetic_spec_from_json(d.at("synthetic"));
        }
    }
    if (j.contains("space")) {
        const auto& s = j.at("space");
        c.has_space = true;
        c.space_rows = s.value("rows", 1);
        c.space_cols = s.value("cols", 1);
        if (s.contains("axis_max")) {
            if (s.at("axis_max").is_number())
                c.space_axis_max = {s.at("axis_max").get<double>()};
            else
                c.space_axis_max = s.at("axis_max").get<std::vector<double>>();
        }
    }
    if (j.contains("build")) {
        const auto& b = j.at("build");
        c.build.epsilon = b.value("epsilon", c.build.epsilon);
        c.build.tau = b.value("tau", c.build.tau);
        c.build.importance_drop_fraction =
            b.value("importance_drop_fraction", c.build.importance_drop_fraction);
        c.build.n_max = b.value("n_max", c.build.n_max);
        c.build.min_samples = b.value("min_samples", c.build.min_samples);
        c.build.max_depth = b.value("max_depth", c.build.max_depth);
        c.build.recenter_to_midpoint = b.value("recenter", c.build.recenter_to_midpoint);
        c.build.tighten_hr = b.value("tighten", c.build.tighten_hr);
        const std::string kernel = b.value("kernel", std::string("default"));
        if (kernel == "default")
            c.build.kernel = Kernel::default3x3();
        else if (kernel == "identity" || kernel == "none")
            c.build.kernel = Kernel::identity();
        else
            throw std::invalid_argument("unknown kernel: " + kernel);
    }
    if (j.contains("forest")) {
        const auto& f = j.at("forest");
        c.forest.t_count = f.value("t_count", c.forest.t_count);
        if (f.contains("mode")) c.forest.mode = forest_mode_from_string(f.at("mode"));
        c.forest.delta = f.value("delta", c.forest.delta);
        c.forest.mu = f.value("mu", c.forest.mu);
        if (f.contains("weight")) {
            const auto& w = f.at("weight");
            if (w.contains("kind"))
                c.forest.weight_spec.kind = weight_kind_from_string(w.at("kind"));
            if (w.contains("combiner"))
                c.forest.weight_spec.combiner = combiner_from_string(w.at("combiner"));
            if (w.contains("scale"))
                c.forest.weight_spec.scale = weight_scale_from_string(w.at("scale"));
        }
    }
    c.forest_in = j.value("forest_in", "");
    c.out_path = j.value("out", "");
    c.report_path = j.value("report", "");
    c.transform = j.value("transform", "");
    if (j.contains("probe")) c.probe_crossings = j.at("probe").value("crossings", 200);
    if (j.contains("bench")) c.bench_evals = j.at("bench").value("evals", 200000);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    return c;
}

inline RunConfig config_from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    nlohmann::json j;
    f >> j;
    return config_from_json(j);
}

namespace detail {

inline std::vector<Sample> load_data(const RunConfig& c, ImageSpace& space_out) {
    if (c.has_synthetic && !c.csv_path.empty())
        throw std::invalid_argument("config: give either csv or synthetic data, not both");
    if (c.has_synthetic) return generate_synthetic(c.synthetic, space_out);
    if (c.csv_path.empty())
        throw std::invalid_argument("config: no data source");
    std::vector<Sample> samples = read_csv_file(c.csv_path);
    const int d = static_cast<int>(samples.front().x.size());
    if (c.has_space) {
        std::vector<double> w = c.space_axis_max;
        if (w.size() == 1) w.assign(d, w[0]);
        space_out = ImageSpace(c.space_rows, c.space_cols, w);
        if (space_out.dims() != d)
            throw std::invalid_argument("config: space shape does not match CSV columns");
    } else {
        // default: one row, per-axis bound from the data
        std::vector<double> w(d, 0.0);
        for (const Sample& s : samples)
            for (int i = 0; i < d; ++i) w[i] = std::max(w[i], s.x[i]);
        for (double& v : w)
            if (v <= 0.0) v = 1.0;
        space_out = ImageSpace(1, d, w);
    }
    return samples;
}

inline Forest load_forest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open forest: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return deserialize_forest(ss.str());
}

inline void collect_leaves(const TreeNode& node, std::vector<const TreeNode*>& out) {
    if (node.is_leaf) {
        out.push_back(&node);
        return;
    }
    collect_leaves(*node.neg, out);
    collect_leaves(*node.pos, out);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write: " + path);
    f << text;
}

}  // namespace detail

inline Report cmd_train(RunConfig config) {
    config.build.validate();
    config.forest.seed = config.seed;
    config.forest.threads = config.threads;
    if (config.out_path.empty())
        throw std::invalid_argument("train: output path required");
    ImageSpace space;
    std::vector<Sample> samples = detail::load_data(config, space);
    Forest forest = build_forest(samples, space, config.build, config.forest);

    Report rep;
    rep.add("command", std::string("train"));
    rep.add("samples", samples.size());
    rep.add("trees", static_cast<int>(forest.trees.size()));
    bool all_attained = true;
    for (size_t t = 0; t < forest.trees.size(); ++t) {
        std::vector<const TreeNode*> leaves;
        detail::collect_leaves(*forest.trees[t].root, leaves);
        double worst = 0.0;
        for (const TreeNode* l : leaves) worst = std::max(worst, l->model.rms);
        const std::string p = "tree" + std::to_string(t);
        rep.add(p + ".leaves", static_cast<int>(leaves.size()));
        rep.add(p + ".depth", tree_depth(*forest.trees[t].root));
        rep.add(p + ".max_leaf_rms", worst);
        // shifted copies reuse tree 0's structure with refit leaves, so the
        // builder's epsilon guarantee covers only the trees it grew itself
        const bool built = forest.mode == ForestMode::retrained || t == 0;
        if (built && worst > config.build.epsilon) all_attained = false;
    }
    double sq = 0.0;
    for (const Sample& s : samples) {
        const double r = evaluate_hard(forest.trees.front(), s.x) - s.y;
        sq += r * r;
    }
    rep.add("train_rms_hard", std::sqrt(sq / samples.size()));
    rep.add("epsilon", config.build.epsilon);
    rep.add("epsilon_attained", std::string(all_attained ? "true" : "false"));
    detail::write_text(config.out_path, serialize_forest(forest) + "\n");
    rep.add("forest_file", config.out_path);
    if (!config.report_path.empty()) rep.write_json(config.report_path);
    return rep;
}

inline Report cmd_eval(RunConfig config) {
    if (config.forest_in.empty())
        throw std::invalid_argument("eval: forest_in required");
    Forest forest = detail::load_forest(config.forest_in);
    ImageSpace space;
    std::vector<Sample> samples = detail::load_data(config, space);
    if (static_cast<size_t>(forest.dims()) != samples.front().x.size())
        throw std::invalid_argument("eval: forest and data dimension mismatch");

    double sq_smooth = 0.0, sq_hard = 0.0, max_abs = 0.0;
    size_t helper_active = 0;
    for (const Sample& s : samples) {
        double w_total = 0.0;
        double acc = 0.0;
        for (const ModelTree& t : forest.trees) {
            const WeightedValue wv = evaluate_tree_weighted(t, s.x, forest.weight_spec);
            w_total += wv.weight;
            acc += wv.weight * wv.value;
        }
        if (w_total < forest.mu) ++helper_active;
        const double w_helper = std::max(0.0, forest.mu - w_total);
        const double smooth = (w_total + w_helper) > 0.0
                                  ? (acc + w_helper * forest.helper_constant) / (w_total + w_helper)
                                  : forest.helper_constant;
        const double hard = evaluate_hard(forest.trees.front(), s.x);
        sq_smooth += (smooth - s.y) * (smooth - s.y);
        sq_hard += (hard - s.y) * (hard - s.y);
        max_abs = std::max(max_abs, std::abs(smooth - s.y));
    }
    const double n = static_cast<double>(samples.size());
    Report rep;
    rep.add("command", std::string("eval"));
    rep.add("samples", samples.size());
    rep.add("rms", std::sqrt(sq_smooth / n));
    rep.add("rms_hard", std::sqrt(sq_hard / n));
    rep.add("max_abs_err", max_abs);
    rep.add("helper_fraction", static_cast<double>(helper_active) / n);
    if (!config.report_path.empty()) rep.write_json(config.report_path);
    return rep;
}

inline Report cmd_distort(RunConfig config) {
    if (config.forest_in.empty() || config.transform.empty() || config.out_path.empty())
        throw std::invalid_argument("distort: forest_in, transform and out required");
    Forest forest = detail::load_forest(config.forest_in);
    Permutation p =
        permutation_from_transform(forest.grid_rows, forest.grid_cols, config.transform);
    Forest permuted = permute_forest(forest, p);
    detail::write_text(config.out_path, serialize_forest(permuted) + "\n");
    Report rep;
    rep.add("command", std::string("distort"));
    rep.add("transform", config.transform);
    rep.add("forest_file", config.out_path);
    if (!config.report_path.empty()) rep.write_json(config.report_path);
    return rep;
}

inline Report cmd_probe(RunConfig config) {
    if (config.forest_in.empty())
        throw std::invalid_argument("probe: forest_in required");
    Forest forest = detail::load_forest(config.forest_in);
    const ImageSpace space = forest.space();
    ProbeReport pr = probe_smoothness(forest, space, config.probe_crossings, config.seed);
    Report rep;
    rep.add("command", std::string("probe"));
    rep.add("crossings", pr.crossings);
    if (pr.crossings == 0) {
        rep.add("note", std::string("no crossings sampled"));
    } else {
        rep.add("max_jump", pr.max_jump);
        rep.add("max_deriv_mismatch", pr.max_deriv_mismatch);
        rep.add("jump_step", pr.jump_step);
        rep.add("deriv_step", pr.deriv_step);
    }
    if (!config.report_path.empty()) rep.write_json(config.report_path);
    return rep;
}

// Convolves every hyperplane of the forest in place; topology and
// evaluation cost are untouched, only the stored coefficients change.
inline void convolve_forest(Forest& forest, const Kernel& k) {
    struct Walk {
        const Kernel& k;
        void operator()(TreeNode& n) const {
            if (n.is_leaf) return;
            n.hp = convolve_hp(n.hp, k);
            (*this)(*n.neg);
            (*this)(*n.pos);
        }
    } walk{k};
    for (ModelTree& t : forest.trees) walk(*t.root);
}

inline Report cmd_bench(RunConfig config) {
    if (config.forest_in.empty())
        throw std::invalid_argument("bench: forest_in required");
    Forest plain = detail::load_forest(config.forest_in);
    Forest convolved = plain.clone();
    convolve_forest(convolved, Kernel::default3x3());
    const ImageSpace space = plain.space();
    const int d = space.dims();

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n_inputs = 512;
    std::vector<std::vector<double>> inputs(n_inputs, std::vector<double>(d));
    for (auto& x : inputs)
        for (int i = 0; i < d; ++i) x[i] = unit(rng) * space.axis_max[i];

    auto time_forest = [&](const Forest& f, int evals) {
        double sink = 0.0;
        const auto t0 = std::chrono::steady_clock::now();
        for (int e = 0; e < evals; ++e) sink += evaluate_forest(f, inputs[e % n_inputs]);
        const auto t1 = std::chrono::steady_clock::now();
        asm volatile("" : : "g"(&sink) : "memory");
        return std::chrono::duration<double>(t1 - t0).count();
    };

    Report rep;
    rep.add("command", std::string("bench"));
    rep.add("evals", config.bench_evals);
    if (config.bench_evals <= 0) {
        rep.add("note", std::string("no evaluations requested"));
        if (!config.report_path.empty()) rep.write_json(config.report_path);
        return rep;
    }
    // interleaved repeats, best-of to shed scheduler noise
    const int rounds = 5;
    const int per_round = std::max(1, config.bench_evals / rounds);
    double best_plain = 1e300, best_conv = 1e300;
    time_forest(plain, per_round);  // warm up
    time_forest(convolved, per_round);
    for (int r = 0; r < rounds; ++r) {
        best_plain = std::min(best_plain, time_forest(plain, per_round));
        best_conv = std::min(best_conv, time_forest(convolved, per_round));
    }
    const double ns_plain = best_plain / per_round * 1e9;
    const double ns_conv = best_conv / per_round * 1e9;
    rep.add("ns_per_eval_plain", ns_plain);
    rep.add("ns_per_eval_convolved", ns_conv);
    rep.add("latency_ratio", ns_conv / ns_plain);
    if (!config.report_path.empty()) rep.write_json(config.report_path);
    return rep;
}

inline Report run_command(const RunConfig& config) {
    if (config.command == "train") return cmd_train(config);
    if (config.command == "eval") return cmd_eval(config);
    if (config.command == "distort") return cmd_distort(config);
    if (config.command == "probe") return cmd_probe(config);
    if (config.command == "bench") return cmd_bench(config);
    throw std::invalid_argument("unknown command: " + config.command);
}

}  // namespace oforest
