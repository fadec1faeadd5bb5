#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "oforest/forest.hpp"

namespace oforest {

inline constexpr int kFormatVersion = 1;

inline std::string to_string(WeightKind k) {
    switch (k) {
        case WeightKind::abs: return "abs";
        case WeightKind::cubic: return "cubic";
        case WeightKind::block_scaled: return "block_scaled";
    }
    throw std::logic_error("bad WeightKind");
}

inline std::string to_string(WeightCombiner c) {
    return c == WeightCombiner::min ? "min" : "product";
}

inline std::string to_string(WeightScale s) {
    return s == WeightScale::unit ? "unit" : "block_reach";
}

inline std::string to_string(ForestMode m) {
    return m == ForestMode::retrained ? "retrained" : "shifted";
}

inline WeightKind weight_kind_from_string(const std::string& s) {
    if (s == "abs") return WeightKind::abs;
    if (s == "cubic") return WeightKind::cubic;
    if (s == "block_scaled") return WeightKind::block_scaled;
    throw std::invalid_argument("unknown weight kind: " + s);
}

inline WeightCombiner combiner_from_string(const std::string& s) {
    if (s == "min") return WeightCombiner::min;
    if (s == "product") return WeightCombiner::product;
    throw std::invalid_argument("unknown weight combiner: " + s);
}

inline WeightScale weight_scale_from_string(const std::string& s) {
    if (s == "unit") return WeightScale::unit;
    if (s == "block_reach") return WeightScale::block_reach;
    throw std::invalid_argument("unknown weight scale: " + s);
}

inline ForestMode forest_mode_from_string(const std::string& s) {
    if (s == "retrained") return ForestMode::retrained;
    if (s == "shifted") return ForestMode::shifted;
    throw std::invalid_argument("unknown forest mode: " + s);
}

namespace detail {

inline nlohmann::json hr_to_json(const BoundingHR& hr) {
    return {{"mid", hr.mid}, {"half", hr.half}, {"active", hr.active}};
}

inline BoundingHR hr_from_json(const nlohmann::json& j) {
    BoundingHR hr;
    hr.mid = j.at("mid").get<std::vector<double>>();
    hr.half = j.at("half").get<std::vector<double>>();
    hr.active = j.at("active").get<std::vector<std::uint8_t>>();
    return hr;
}

inline nlohmann::json node_to_json(const TreeNode& node) {
    if (node.is_leaf) {
        return {{"leaf",
                 {{"alpha", node.model.alpha},
                  {"centroid", node.model.centroid},
                  {"mean_y", node.model.mean_y},
                  {"rms", node.model.rms}}},
                {"hr", hr_to_json(node.hr)}};
    }
    return {{"hp",
             {{"alpha", node.hp.alpha},
              {"anchor", node.hp.anchor},
              {"grid", {node.hp.grid_rows, node.hp.grid_cols}}}},
            {"scale", node.weight_scale},
            {"hr", hr_to_json(node.hr)},
            {"neg", node_to_json(*node.neg)},
            {"pos", node_to_json(*node.pos)}};
}

inline std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& j) {
    auto node = std::make_unique<TreeNode>();
    node->hr = hr_from_json(j.at("hr"));
    if (j.contains("leaf")) {
        const auto& l = j.at("leaf");
        node->is_leaf = true;
        node->model.alpha = l.at("alpha").get<std::vector<double>>();
        node->model.centroid = l.at("centroid").get<std::vector<double>>();
        node->model.mean_y = l.at("mean_y").get<double>();
        node->model.rms = l.at("rms").get<double>();
        return node;
    }
    node->is_leaf = false;
    const auto& h = j.at("hp");
    node->hp.alpha = h.at("alpha").get<std::vector<double>>();
    node->hp.anchor = h.at("anchor").get<std::vector<double>>();
    node->hp.grid_rows = h.at("grid").at(0).get<int>();
    node->hp.grid_cols = h.at("grid").at(1).get<int>();
    node->weight_scale = j.at("scale").get<double>();
    node->neg = node_from_json(j.at("neg"));
    node->pos = node_from_json(j.at("pos"));
    return node;
}

}  // namespace detail

inline nlohmann::json forest_to_json(const Forest& forest) {
    nlohmann::json trees = nlohmann::json::array();
    for (const ModelTree& t : forest.trees)
        trees.push_back({{"offset", t.offset}, {"root", detail::node_to_json(*t.root)}});
    return {{"version", kFormatVersion},
            {"mode", to_string(forest.mode)},
            {"delta", forest.shift_delta},
            {"mu", forest.mu},
            {"helper_constant", forest.helper_constant},
            {"weight_spec",
             {{"kind", to_string(forest.weight_spec.kind)},
              {"combiner", to_string(forest.weight_spec.combiner)},
              {"scale", to_string(forest.weight_spec.scale)}}},
            {"grid", {forest.grid_rows, forest.grid_cols}},
            {"axis_max", forest.axis_max},
            {"trees", trees}};
}

inline Forest forest_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != kFormatVersion)
        throw std::invalid_argument("unsupported forest format version");
    Forest f;
    f.mode = forest_mode_from_string(j.at("mode").get<std::string>());
    f.shift_delta = j.at("delta").get<double>();
    f.mu = j.at("mu").get<double>();
    f.helper_constant = j.at("helper_constant").get<double>();
    const auto& ws = j.at("weight_spec");
    f.weight_spec.kind = weight_kind_from_string(ws.at("kind").get<std::string>());
    f.weight_spec.combiner = combiner_from_string(ws.at("combiner").get<std::string>());
    f.weight_spec.scale = weight_scale_from_string(ws.at("scale").get<std::string>());
    f.grid_rows = j.at("grid").at(0).get<int>();
    f.grid_cols = j.at("grid").at(1).get<int>();
    f.axis_max = j.at("axis_max").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) {
        ModelTree t;
        t.offset = tj.at("offset").get<std::vector<double>>();
        t.root = detail::node_from_json(tj.at("root"));
        f.trees.push_back(std::move(t));
    }
    if (f.trees.empty()) throw std::invalid_argument("forest must have at least one tree");
    return f;
}

inline std::string serialize_forest(const Forest& forest) {
    return forest_to_json(forest).dump();
}

inline Forest deserialize_forest(const std::string& text) {
    return forest_from_json(nlohmann::json::parse(text));
}

}  // namespace oforest
