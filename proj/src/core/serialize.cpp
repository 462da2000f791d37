#include <fstream>

#include "core/errors.hpp"
#include "core/maps.hpp"
#include "json.hpp"

// Model files: a small JSON header describing the architecture plus flat
// row-major weight arrays. Doubles survive a save/load cycle bit exactly.

namespace latcode {

namespace {

using nlohmann::json;

json act_to_json(const Activation& a) {
    json j;
    j["name"] = a.name();
    if (a.kind == Activation::Kind::LeakyRelu) j["leaky_slope"] = a.leaky_slope;
    return j;
}

Activation act_from_json(const json& j) {
    const std::string name = j.at("name").get<std::string>();
    const double slope = j.value("leaky_slope", 0.01);
    return Activation::parse(name, slope);
}

std::string budget_kind_name(BudgetKind k) {
    switch (k) {
        case BudgetKind::EntrywiseL1: return "entrywise_l1";
        case BudgetKind::Spectral: return "spectral";
        case BudgetKind::Filter12: return "filter_12";
    }
    return "entrywise_l1";
}

BudgetKind budget_kind_parse(const std::string& s) {
    if (s == "entrywise_l1") return BudgetKind::EntrywiseL1;
    if (s == "spectral") return BudgetKind::Spectral;
    if (s == "filter_12") return BudgetKind::Filter12;
    throw ValidationError("model: unknown budget kind: " + s);
}

}  // namespace

std::string map_to_json(const ReconMap& f) {
    json j;
    j["format"] = "latcode-model";
    j["version"] = 1;
    j["latent_dim"] = latent_dim(f);
    j["output_dim"] = output_dim(f);

    if (std::holds_alternative<LinearMap>(f)) {
        const auto& m = std::get<LinearMap>(f);
        j["kind"] = "linear";
        j["rows"] = m.A.rows;
        j["cols"] = m.A.cols;
        j["weights"] = m.A.a;
    } else if (std::holds_alternative<DenseNet>(f)) {
        const auto& m = std::get<DenseNet>(f);
        j["kind"] = "dense";
        json layers = json::array();
        for (const auto& l : m.layers) {
            json lj;
            lj["rows"] = l.A.rows;
            lj["cols"] = l.A.cols;
            lj["activation"] = act_to_json(l.act);
            lj["budget_kind"] = budget_kind_name(l.budget_kind);
            lj["budget"] = l.budget;
            lj["weights"] = l.A.a;
            layers.push_back(std::move(lj));
        }
        j["layers"] = std::move(layers);
    } else {
        const auto& m = std::get<ConvNet>(f);
        j["kind"] = "conv";
        j["input_shape"] = m.input_shape;
        json layers = json::array();
        for (const auto& l : m.layers) {
            json lj;
            if (l.is_pool) {
                lj["type"] = "pool";
                lj["window"] = l.window;
            } else {
                lj["type"] = "conv";
                lj["filter_shape"] = l.filters[0].shape;
                lj["strides"] = l.strides;
                lj["activation"] = act_to_json(l.act);
                lj["budget"] = l.budget;
                json filters = json::array();
                for (const auto& flt : l.filters) filters.push_back(flt.a);
                lj["filters"] = std::move(filters);
            }
            layers.push_back(std::move(lj));
        }
        j["layers"] = std::move(layers);
    }
    return j.dump(2);
}

ReconMap map_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model: JSON parse failed: ") + e.what());
    }
    try {
        if (j.value("format", "") != "latcode-model")
            throw ValidationError("model: missing or wrong format tag");
        const std::string kind = j.at("kind").get<std::string>();
        ReconMap f;
        if (kind == "linear") {
            LinearMap m;
            m.A = Mat(j.at("rows").get<int>(), j.at("cols").get<int>(),
                      j.at("weights").get<std::vector<double>>());
            f = std::move(m);
        } else if (kind == "dense") {
            DenseNet m;
            for (const auto& lj : j.at("layers")) {
                DenseLayer l;
                l.A = Mat(lj.at("rows").get<int>(), lj.at("cols").get<int>(),
                          lj.at("weights").get<std::vector<double>>());
                l.act = act_from_json(lj.at("activation"));
                l.budget_kind = budget_kind_parse(lj.at("budget_kind").get<std::string>());
                l.budget = lj.at("budget").get<double>();
                m.layers.push_back(std::move(l));
            }
            f = std::move(m);
        } else if (kind == "conv") {
            ConvNet m;
            m.input_shape = j.at("input_shape").get<std::vector<int>>();
            for (const auto& lj : j.at("layers")) {
                ConvLayer l;
                if (lj.at("type").get<std::string>() == "pool") {
                    l.is_pool = true;
                    l.window = lj.at("window").get<std::vector<int>>();
                } else {
                    const auto fshape = lj.at("filter_shape").get<std::vector<int>>();
                    for (const auto& fj : lj.at("filters")) {
                        Tensor t(fshape);
                        auto w = fj.get<std::vector<double>>();
                        if (w.size() != t.a.size())
                            throw ValidationError("model: filter weight count mismatch");
                        t.a = std::move(w);
                        l.filters.push_back(std::move(t));
                    }
                    l.strides = lj.at("strides").get<std::vector<double>>();
                    l.act = act_from_json(lj.at("activation"));
                    l.budget = lj.at("budget").get<double>();
                }
                m.layers.push_back(std::move(l));
            }
            f = std::move(m);
        } else {
            throw ValidationError("model: unknown kind: " + kind);
        }
        validate(f);
        return f;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model: malformed document: ") + e.what());
    }
}

ReconMap map_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return map_from_json(text);
}

void map_save(const ReconMap& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path);
    out << map_to_json(f) << "\n";
}

}  // namespace latcode
