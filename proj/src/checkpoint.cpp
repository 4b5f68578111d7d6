#include "checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace selprop {

using nlohmann::json;

namespace {

json tensor_json(const Tensor& t) {
    return {{"rows", t.rows()}, {"cols", t.cols()}, {"values", t.values()}};
}

Tensor tensor_from(const json& j, const std::string& what) {
    Tensor t(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != t.size()) throw Error("checkpoint: " + what + " has " + std::to_string(values.size()) +
                                               " values for shape " + t.shape_string());
    std::copy(values.begin(), values.end(), t.values().begin());
    return t;
}

void restore(Parameter& p, const json& j) {
    if (j.at("name").get<std::string>() != p.name)
        throw Error("checkpoint: expected parameter " + p.name + ", found " + j.at("name").get<std::string>());
    auto check = [&](const Tensor& t, const char* field) {
        if (t.rows() != p.value.rows() || t.cols() != p.value.cols())
            throw ShapeError("checkpoint: " + p.name + "." + field + " " + t.shape_string() + " vs model " +
                             p.value.shape_string());
        return t;
    };
    p.value = check(tensor_from(j.at("value"), p.name), "value");
    p.adam_m = check(tensor_from(j.at("adam_m"), p.name), "adam_m");
    p.adam_v = check(tensor_from(j.at("adam_v"), p.name), "adam_v");
    p.step_count = j.at("step_count").get<std::int64_t>();
    p.zero_grad();
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelState& state, const CheckpointInfo& info) {
    json j;
    j["format"] = "selprop-checkpoint";
    j["version"] = 1;
    j["config_hash"] = info.config_hash;
    j["seed"] = info.seed;
    j["d"] = state.params.d;
    j["d_e"] = state.params.d_e;
    j["d_h"] = state.params.d_h;
    j["time_scale"] = {{"mode", to_string(state.time_scale.mode)}, {"scale", state.time_scale.scale}};
    j["cursor"] = state.cursor;
    json params = json::array();
    for (const Parameter* p : state.params.all())
        params.push_back({{"name", p->name},
                          {"value", tensor_json(p->value)},
                          {"adam_m", tensor_json(p->adam_m)},
                          {"adam_v", tensor_json(p->adam_v)},
                          {"step_count", p->step_count}});
    j["params"] = std::move(params);
    j["embeddings"] = tensor_json(state.table.x);
    j["last_update"] = state.table.last_update;

    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint " + path);
    out << j.dump() << '\n';
    if (!out) throw Error("failed writing checkpoint " + path);
}

ModelState load_checkpoint(const std::string& path, const DatasetBundle& bundle, CheckpointInfo* info) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.value("format", "") != "selprop-checkpoint") throw Error("checkpoint " + path + ": unknown format");
        const auto d = j.at("d").get<std::size_t>();
        const auto d_e = j.at("d_e").get<std::size_t>();
        const auto d_h = j.at("d_h").get<std::size_t>();
        if (d_e != bundle.d_e)
            throw Error("checkpoint: edge feature dim " + std::to_string(d_e) + " vs dataset " +
                        std::to_string(bundle.d_e));

        ModelState s;
        s.params = ModelParams(d, d_e, d_h, 0);
        const auto& params = j.at("params");
        auto all = s.params.all();
        if (params.size() != all.size()) throw Error("checkpoint: wrong parameter count");
        for (std::size_t i = 0; i < all.size(); ++i) restore(*all[i], params[i]);

        s.table.x = tensor_from(j.at("embeddings"), "embeddings");
        s.table.last_update = j.at("last_update").get<std::vector<double>>();
        if (s.table.x.rows() != bundle.n_nodes || s.table.x.cols() != d ||
            s.table.last_update.size() != bundle.n_nodes)
            throw Error("checkpoint: table " + s.table.x.shape_string() + " does not fit a dataset of " +
                        std::to_string(bundle.n_nodes) + " nodes");
        s.time_scale.mode = parse_time_scale_mode(j.at("time_scale").at("mode").get<std::string>());
        s.time_scale.scale = j.at("time_scale").at("scale").get<double>();

        s.cursor = j.at("cursor").get<std::size_t>();
        if (s.cursor > bundle.events.size()) throw Error("checkpoint: cursor past the end of the dataset");
        s.adj = TemporalAdjacency(bundle.n_nodes);
        for (std::size_t i = 0; i < s.cursor; ++i) s.adj.insert_event(bundle.events[i]);

        if (info) {
            info->config_hash = j.at("config_hash").get<std::string>();
            info->seed = j.at("seed").get<std::uint64_t>();
        }
        return s;
    } catch (const json::exception& e) {
        throw Error("checkpoint " + path + ": " + e.what());
    }
}

}  // namespace selprop
