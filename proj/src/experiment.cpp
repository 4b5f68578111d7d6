#include "experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "checkpoint.hpp"
#include "json.hpp"

namespace selprop {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Kind { size, u64, real, boolean, text, real_list, size_list };

struct Key {
    const char* name;
    Kind kind;
    bool hashed;
    std::function<void(ExperimentConfig&, const json&)> set;
    std::function<json(const ExperimentConfig&)> get;
};

std::size_t as_size(const json& v, const std::string& key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw Error("config: " + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

double as_real(const json& v, const std::string& key) {
    if (!v.is_number()) throw Error("config: " + key + " must be a number");
    return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw Error("config: " + key + " must be true or false");
    return v.get<bool>();
}

std::string as_text(const json& v, const std::string& key) {
    if (!v.is_string()) throw Error("config: " + key + " must be a string");
    return v.get<std::string>();
}

#define SIZE_KEY(NAME, FIELD) \
    Key{NAME, Kind::size, true, [](ExperimentConfig& c, const json& v) { c.FIELD = as_size(v, NAME); }, \
        [](const ExperimentConfig& c) { return json(c.FIELD); }}
#define REAL_KEY(NAME, FIELD) \
    Key{NAME, Kind::real, true, [](ExperimentConfig& c, const json& v) { c.FIELD = as_real(v, NAME); }, \
        [](const ExperimentConfig& c) { return json(c.FIELD); }}
#define BOOL_KEY(NAME, FIELD) \
    Key{NAME, Kind::boolean, true, [](ExperimentConfig& c, const json& v) { c.FIELD = as_bool(v, NAME); }, \
        [](const ExperimentConfig& c) { return json(c.FIELD); }}
#define TEXT_KEY(NAME, FIELD, HASHED) \
    Key{NAME, Kind::text, HASHED, [](ExperimentConfig& c, const json& v) { c.FIELD = as_text(v, NAME); }, \
        [](const ExperimentConfig& c) { return json(c.FIELD); }}
#define ENUM_KEY(NAME, FIELD, PARSE) \
    Key{NAME, Kind::text, true, [](ExperimentConfig& c, const json& v) { c.FIELD = PARSE(as_text(v, NAME)); }, \
        [](const ExperimentConfig& c) { return json(to_string(c.FIELD)); }}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = {
        SIZE_KEY("d", train.d),
        SIZE_KEY("d_h", train.d_h),
        SIZE_KEY("k", train.k),
        REAL_KEY("lr", train.lr),
        REAL_KEY("policy_lr", train.policy_lr),
        REAL_KEY("dropout", train.dropout),
        SIZE_KEY("patience", train.patience),
        SIZE_KEY("max_epochs", train.max_epochs),
        Key{"seed", Kind::u64, true,
            [](ExperimentConfig& c, const json& v) { c.train.seed = as_size(v, "seed"); },
            [](const ExperimentConfig& c) { return json(c.train.seed); }},
        ENUM_KEY("time_scale", train.time_scale, parse_time_scale_mode),
        REAL_KEY("time_scale_value", train.time_scale_value),
        ENUM_KEY("strategy", train.strategy, parse_selection_strategy),
        BOOL_KEY("ablate_agg_time", train.ablate_agg_time),
        BOOL_KEY("ablate_prop_time", train.ablate_prop_time),
        ENUM_KEY("negative_scope", train.negative_scope, parse_negative_scope),
        BOOL_KEY("persist_embeddings", train.persist_embeddings),
        REAL_KEY("train_noise_sigma2", train.train_noise_sigma2),
        REAL_KEY("grad_clip", train.grad_clip),
        TEXT_KEY("dataset", dataset, true),
        ENUM_KEY("format", format, parse_dataset_format),
        TEXT_KEY("node_features", node_features, true),
        ENUM_KEY("mode", mode, parse_eval_mode),
        Key{"noise_sigma2", Kind::real_list, true,
            [](ExperimentConfig& c, const json& v) {
                if (!v.is_array()) throw Error("config: noise_sigma2 must be a list of numbers");
                c.noise_grid.clear();
                for (const auto& x : v) c.noise_grid.push_back(as_real(x, "noise_sigma2"));
            },
            [](const ExperimentConfig& c) { return json(c.noise_grid); }},
        Key{"k_list", Kind::size_list, true,
            [](ExperimentConfig& c, const json& v) {
                if (!v.is_array()) throw Error("config: k_list must be a list of integers");
                c.k_grid.clear();
                for (const auto& x : v) c.k_grid.push_back(as_size(x, "k_list"));
            },
            [](const ExperimentConfig& c) { return json(c.k_grid); }},
        TEXT_KEY("checkpoint", checkpoint, false),
        TEXT_KEY("out", out, false),
        SIZE_KEY("n_communities", synthetic.n_communities),
        SIZE_KEY("nodes_per_community", synthetic.nodes_per_community),
        SIZE_KEY("n_events", synthetic.n_events),
        REAL_KEY("p_intra", synthetic.p_intra),
        REAL_KEY("noisy_fraction", synthetic.noisy_fraction),
        REAL_KEY("stale_fraction", synthetic.stale_fraction),
        REAL_KEY("stale_horizon", synthetic.stale_horizon),
        REAL_KEY("activity_spread", synthetic.activity_spread),
    };
    return keys;
}

#undef SIZE_KEY
#undef REAL_KEY
#undef BOOL_KEY
#undef TEXT_KEY
#undef ENUM_KEY

const Key& find_key(const std::string& name) {
    for (const auto& k : registry())
        if (name == k.name) return k;
    std::string valid;
    for (const auto& k : registry()) valid += (valid.empty() ? "" : ", ") + std::string(k.name);
    throw Error("unknown config key '" + name + "'; valid keys: " + valid);
}

json scalar_from_text(Kind kind, const std::string& key, const std::string& text) {
    auto fail = [&]() -> json { throw Error("config: cannot parse '" + text + "' for " + key); };
    switch (kind) {
        case Kind::size:
        case Kind::u64: {
            if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) return fail();
            try {
                return json(static_cast<std::uint64_t>(std::stoull(text)));
            } catch (const std::exception&) {
                return fail();
            }
        }
        case Kind::real: {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(text, &used);
            } catch (const std::exception&) {
                return fail();
            }
            if (used != text.size()) return fail();
            return json(v);
        }
        case Kind::boolean:
            if (text == "true" || text == "1") return json(true);
            if (text == "false" || text == "0") return json(false);
            return fail();
        default: return json(text);
    }
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
    ensure_dir(cfg.out);
    return (fs::path(cfg.out) / file).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("failed writing " + path);
}

std::string dataset_name(const ExperimentConfig& cfg) { return fs::path(cfg.dataset).filename().string(); }

}  // namespace

void ExperimentConfig::validate() const {
    train.validate();
    for (double s : noise_grid)
        if (!(s >= 0.0)) throw Error("config: noise_sigma2 values must be non-negative");
    synthetic.validate();
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& k : registry()) v.emplace_back(k.name);
        return v;
    }();
    return names;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const Key& k = find_key(key);
    json v;
    if (k.kind == Kind::real_list || k.kind == Kind::size_list) {
        v = json::array();
        std::stringstream ss(value);
        std::string item;
        const Kind inner = k.kind == Kind::real_list ? Kind::real : Kind::size;
        while (std::getline(ss, item, ','))
            if (!item.empty()) v.push_back(scalar_from_text(inner, key, item));
    } else {
        v = scalar_from_text(k.kind, key, value);
    }
    k.set(cfg, v);
}

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error("config: expected a flat JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) find_key(it.key()).set(base, it.value());
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), std::move(base));
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j = json::object();
    for (const auto& k : registry()) j[k.name] = k.get(cfg);
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
    json j = json::object();
    for (const auto& k : registry())
        if (k.hashed) j[k.name] = k.get(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return hex64(h);
}

DatasetBundle load_experiment_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset.empty()) throw Error("missing dataset path (set `dataset` in the config or --dataset)");
    DatasetBundle b = load_dataset(cfg.dataset, cfg.format);
    b.name = dataset_name(cfg);
    if (!cfg.node_features.empty()) b.raw_node_features = load_node_features(cfg.node_features, b.n_nodes);
    return b;
}

TrainOutcome cmd_train(const ExperimentConfig& cfg) {
    cfg.validate();
    const DatasetBundle bundle = load_experiment_dataset(cfg);
    const std::string hash = config_hash(cfg);
    TrainOutcome out;
    out.fit = fit(bundle, cfg.train);

    std::string csv = "epoch,mean_loss,mean_reward,val_metric,config_hash\n";
    for (const auto& r : out.fit.history)
        csv += std::to_string(r.epoch) + "," + num(r.mean_loss) + "," + num(r.mean_reward) + "," +
               num(r.val_metric) + "," + hash + "\n";
    out.history_path = out_path(cfg, "history.csv");
    write_text(out.history_path, csv);
    out.checkpoint_path = out_path(cfg, "checkpoint.json");
    save_checkpoint(out.checkpoint_path, out.fit.best, {hash, cfg.train.seed});
    return out;
}

MetricsReport test_metrics(const DatasetBundle& bundle, ModelState state, const ExperimentConfig& cfg,
                           double noise_sigma2, std::vector<ActionLogRow>* log) {
    if (state.cursor > bundle.val_end) throw Error("state has already consumed part of the test slice");
    if (state.cursor < bundle.val_end) {
        StreamSettings warm;
        warm.compute_mrr = false;
        warm.negative_stream = 4;
        evaluate_stream(state, bundle, state.cursor, bundle.val_end, cfg.train, warm);
    }
    StreamSettings s;
    s.mode = cfg.mode;
    s.noise_sigma2 = noise_sigma2;
    s.action_log = log;
    return evaluate_stream(state, bundle, bundle.val_end, bundle.events.size(), cfg.train, s);
}

std::string metrics_json(const MetricsReport& m, const ExperimentConfig& cfg, const std::string& dataset) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j = {{"dataset", dataset},        {"mode", to_string(m.mode)}, {"seed", cfg.train.seed},
              {"mrr", opt(m.mrr)},         {"ap", opt(m.ap)},           {"auc", opt(m.auc)},
              {"n_edges", m.n_edges},      {"config_hash", config_hash(cfg)}};
    return j.dump(2) + "\n";
}

namespace {

ModelState trained_state(const DatasetBundle& bundle, const ExperimentConfig& cfg) {
    if (!cfg.checkpoint.empty()) {
        CheckpointInfo info;
        ModelState s = load_checkpoint(cfg.checkpoint, bundle, &info);
        return s;
    }
    return fit(bundle, cfg.train).best;
}

}  // namespace

EvaluateOutcome cmd_evaluate(const ExperimentConfig& cfg) {
    cfg.validate();
    const DatasetBundle bundle = load_experiment_dataset(cfg);
    EvaluateOutcome out;
    out.metrics = test_metrics(bundle, trained_state(bundle, cfg), cfg);
    out.metrics_path = out_path(cfg, "metrics.json");
    write_text(out.metrics_path, metrics_json(out.metrics, cfg, bundle.name));
    return out;
}

std::vector<std::pair<std::string, ExperimentConfig>> ablation_variants(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, ExperimentConfig>> v;
    ExperimentConfig c = cfg;
    c.train.strategy = SelectionStrategy::learned;
    c.train.ablate_agg_time = c.train.ablate_prop_time = false;
    v.emplace_back("full", c);
    ExperimentConfig agg = c;
    agg.train.ablate_agg_time = true;
    v.emplace_back("agg-w.o.-time", agg);
    ExperimentConfig pro = c;
    pro.train.ablate_prop_time = true;
    v.emplace_back("pro-w.o.-time", pro);
    ExperimentConfig all = c;
    all.train.strategy = SelectionStrategy::all;
    v.emplace_back("select-all", all);
    ExperimentConfig none = c;
    none.train.k = 0;
    v.emplace_back("select-none", none);
    ExperimentConfig random = c;
    random.train.strategy = SelectionStrategy::random;
    v.emplace_back("select-random", random);
    return v;
}

std::vector<VariantRow> cmd_ablate(const ExperimentConfig& cfg) {
    cfg.validate();
    const DatasetBundle bundle = load_experiment_dataset(cfg);
    std::vector<VariantRow> rows;
    std::string csv = "variant,mrr,ap,auc,n_edges,config_hash\n";
    for (const auto& [name, vc] : ablation_variants(cfg)) {
        VariantRow r{name, test_metrics(bundle, fit(bundle, vc.train).best, vc), config_hash(vc)};
        csv += name + "," + opt_num(r.metrics.mrr) + "," + opt_num(r.metrics.ap) + "," + opt_num(r.metrics.auc) +
               "," + std::to_string(r.metrics.n_edges) + "," + r.config_hash + "\n";
        rows.push_back(std::move(r));
    }
    write_text(out_path(cfg, "ablation.csv"), csv);
    return rows;
}

double metric_decrement(double m0, double m) { return m0 == 0.0 ? 0.0 : (m0 - m) / m0; }

std::vector<NoiseRow> noise_grid(const DatasetBundle& bundle, const ModelState& state, const ExperimentConfig& cfg,
                                 std::vector<ActionLogRow>* log) {
    const MetricsReport base = test_metrics(bundle, state, cfg, 0.0);
    std::vector<NoiseRow> rows;
    for (double s2 : cfg.noise_grid) {
        NoiseRow r;
        r.sigma2 = s2;
        r.metrics = test_metrics(bundle, state, cfg, s2, log);
        r.dec_mrr = metric_decrement(base.mrr.value_or(0.0), r.metrics.mrr.value_or(0.0));
        r.dec_ap = metric_decrement(base.ap.value_or(0.0), r.metrics.ap.value_or(0.0));
        r.dec_auc = metric_decrement(base.auc.value_or(0.0), r.metrics.auc.value_or(0.0));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<NoiseRow> cmd_noise(const ExperimentConfig& cfg) {
    cfg.validate();
    const DatasetBundle bundle = load_experiment_dataset(cfg);
    const std::string hash = config_hash(cfg);
    const ModelState state = trained_state(bundle, cfg);
    std::vector<ActionLogRow> log;
    auto rows = noise_grid(bundle, state, cfg, &log);

    std::string csv =
        "noise_sigma2,mrr,ap,auc,dec_mrr,dec_ap,dec_auc,update_rate,neighbor_update_rate,n_edges,config_hash\n";
    for (const auto& r : rows)
        csv += num(r.sigma2) + "," + opt_num(r.metrics.mrr) + "," + opt_num(r.metrics.ap) + "," +
               opt_num(r.metrics.auc) + "," + num(r.dec_mrr) + "," + num(r.dec_ap) + "," + num(r.dec_auc) + "," +
               num(r.metrics.update_rate) + "," + num(r.metrics.neighbor_update_rate) + "," +
               std::to_string(r.metrics.n_edges) + "," + hash + "\n";
    write_text(out_path(cfg, "noise.csv"), csv);

    std::ofstream actions(out_path(cfg, "actions.csv"), std::ios::binary);
    if (!actions) throw Error("cannot write action log");
    actions << "event_index,node_id,pi,action,noise_sigma2,config_hash\n";
    for (const auto& a : log)
        actions << a.event_index << ',' << a.node << ',' << num(a.pi) << ',' << a.action << ','
                << num(a.noise_sigma2) << ',' << hash << '\n';
    return rows;
}

std::vector<SweepRow> cmd_sweep_k(const ExperimentConfig& cfg) {
    cfg.validate();
    const DatasetBundle bundle = load_experiment_dataset(cfg);
    std::vector<SweepRow> rows;
    std::string csv = "k,mrr,ap,auc,n_edges,best_epoch,config_hash\n";
    for (std::size_t k : cfg.k_grid) {
        ExperimentConfig kc = cfg;
        kc.train.k = k;
        auto f = fit(bundle, kc.train);
        SweepRow r{k, test_metrics(bundle, f.best, kc), f.best_epoch};
        csv += std::to_string(k) + "," + opt_num(r.metrics.mrr) + "," + opt_num(r.metrics.ap) + "," +
               opt_num(r.metrics.auc) + "," + std::to_string(r.metrics.n_edges) + "," +
               std::to_string(r.best_epoch) + "," + config_hash(kc) + "\n";
        rows.push_back(std::move(r));
    }
    write_text(out_path(cfg, "sweep_k.csv"), csv);
    return rows;
}

SynthOutcome cmd_synth(const ExperimentConfig& cfg) {
    const SyntheticData data = generate_synthetic(cfg.synthetic, cfg.train.seed);
    SynthOutcome out;
    out.n_nodes = data.n_nodes;
    out.n_events = data.events.size();
    std::ostringstream edges;
    write_edge_list(data.events, edges);
    out.data_path = out_path(cfg, "synthetic.txt");
    write_text(out.data_path, edges.str());

    const auto& s = cfg.synthetic;
    std::vector<int> noisy(data.noisy.begin(), data.noisy.end());
    json meta = {{"seed", cfg.train.seed},
                 {"n_communities", s.n_communities},
                 {"nodes_per_community", s.nodes_per_community},
                 {"n_events", s.n_events},
                 {"p_intra", s.p_intra},
                 {"noisy_fraction", s.noisy_fraction},
                 {"stale_fraction", s.stale_fraction},
                 {"stale_horizon", s.stale_horizon},
                 {"activity_spread", s.activity_spread},
                 {"n_nodes", data.n_nodes},
                 {"community_before", data.community_before},
                 {"community_after", data.community_after},
                 {"noisy", noisy}};
    out.meta_path = out_path(cfg, "synthetic_meta.json");
    write_text(out.meta_path, meta.dump(2) + "\n");
    return out;
}

bool GradcheckReport::passed() const {
    for (const auto& e : entries)
        if (!e.passed) return false;
    return !entries.empty();
}

GradcheckReport run_gradcheck(const GradcheckOptions& opt) {
    if (opt.max_dim == 0) throw Error("gradcheck: max_dim must be positive");
    const std::vector<std::string> names{"W_g", "a", "W_p", "W_u", "W_2", "W_1", "table_reads"};
    if (!opt.corrupt.empty() && std::find(names.begin(), names.end(), opt.corrupt) == names.end())
        throw Error("gradcheck: unknown corruption target '" + opt.corrupt + "'");
    std::vector<double> worst(names.size(), 0.0);
    auto slot = [&](const std::string& n) {
        return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
    };
    auto corrupt = [&](const std::string& n, std::span<double> g) {
        if (opt.corrupt != n) return;
        for (auto& v : g) v = 1.5 * v + 1e-3;
    };

    SeededRng rng(opt.seed);
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
        const std::size_t d = 1 + rng.index(opt.max_dim);
        const std::size_t d_e = rng.index(std::min<std::size_t>(3, opt.max_dim + 1));
        const std::size_t d_h = 1 + rng.index(opt.max_dim);
        ModelParams p(d, d_e, d_h, rng.next_u64());
        for (Parameter* q : p.all())
            for (auto& v : q->value.values()) v = rng.uniform(-0.8, 0.8);

        // a short random history, then the event under test
        const std::size_t n_nodes = 6;
        TemporalAdjacency adj(n_nodes);
        double t = 0.0;
        const std::size_t history = 3 + rng.index(6);
        for (std::size_t i = 0; i < history; ++i) {
            t += rng.uniform(0.1, 2.0);
            const auto s = static_cast<NodeId>(rng.index(n_nodes));
            const auto o = static_cast<NodeId>((s + 1 + rng.index(n_nodes - 1)) % n_nodes);
            adj.insert_event({s, o, t, {}});
        }
        const auto src = static_cast<NodeId>(rng.index(n_nodes));
        const auto dst = static_cast<NodeId>((src + 1 + rng.index(n_nodes - 1)) % n_nodes);
        Vector edge(d_e);
        for (auto& v : edge) v = rng.uniform(-1.0, 1.0);
        const InteractionEvent e{src, dst, t + rng.uniform(0.1, 2.0), edge};
        const Neighborhood nb = gather_neighborhood(adj, e, 1 + rng.index(8));

        std::vector<Vector> rows(nb.size(), Vector(d));
        for (auto& r : rows)
            for (auto& v : r) v = rng.uniform(-1.0, 1.0);
        Vector x_neg(d);
        for (auto& v : x_neg) v = rng.uniform(-1.0, 1.0);
        const EventOptions eo{TimeScale{TimeScale::Mode::fixed, rng.uniform(0.5, 3.0)}, rng.bernoulli(0.25),
                              rng.bernoulli(0.25)};
        const DropoutMasks masks = trial % 2 ? draw_dropout(0.3, nb.size(), p.d_m(), rng) : DropoutMasks{};
        ActionSet actions;
        for (std::size_t i = 0; i < nb.size(); ++i) {
            actions.actions.push_back(trial % 3 == 0 || rng.bernoulli(0.6) ? 1 : 0);
            actions.probs.push_back(0.5);
        }

        // link loss through aggregation, propagation and the updater
        const EventEncoding enc = encode_event(p, rows, nb, edge, eo, masks);
        const UpdatedRows upd = apply_updates(actions, enc.h, rows, rows, p.updater);
        const LinkLoss loss = link_loss(upd.rows[nb.src_pos], upd.rows[nb.dst_pos], x_neg);
        for (Parameter* q : p.all()) q->zero_grad();
        std::vector<Vector> g_rows(rows.size(), Vector(d, 0.0));
        event_backward(p, rows, nb, enc, masks, actions, upd, loss, &g_rows);
        auto f = [&] { return event_loss(p, rows, nb, edge, eo, masks, actions, x_neg); };
        for (Parameter* q : p.supervised()) {
            corrupt(q->name, q->grad.values());
            auto& w = worst[slot(q->name)];
            w = std::max(w, finite_difference_check(f, *q));
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            corrupt("table_reads", g_rows[i]);
            auto& w = worst[slot("table_reads")];
            w = std::max(w, finite_difference_check(f, rows[i], g_rows[i]));
        }

        // policy log-probabilities on each node's state
        for (std::size_t i = 0; i < enc.states.size(); ++i) {
            const bool a = rng.bernoulli(0.5);
            const Vector& s = enc.states[i];
            const PolicyEval ev = policy_forward(p.policy, s);
            p.policy.w_1.zero_grad();
            p.policy.w_2.zero_grad();
            policy_backward(p.policy, s, ev, (a ? 1.0 : 0.0) - ev.prob);
            auto lp = [&] { return action_log_prob(policy_forward(p.policy, s), a); };
            for (Parameter* q : p.policy_params()) {
                corrupt(q->name, q->grad.values());
                auto& w = worst[slot(q->name)];
                w = std::max(w, finite_difference_check(lp, *q));
            }
        }
    }

    GradcheckReport report;
    report.trials = opt.trials;
    for (std::size_t i = 0; i < names.size(); ++i)
        report.entries.push_back({names[i], worst[i], worst[i] < opt.tolerance});
    return report;
}

GradcheckReport cmd_gradcheck(const ExperimentConfig& cfg, const GradcheckOptions& opt) {
    GradcheckReport r = run_gradcheck(opt);
    std::string csv = "name,max_rel_error,passed,config_hash\n";
    const std::string hash = config_hash(cfg);
    for (const auto& e : r.entries)
        csv += e.name + "," + num(e.max_rel_error) + "," + (e.passed ? "1" : "0") + "," + hash + "\n";
    write_text(out_path(cfg, "gradcheck.csv"), csv);
    return r;
}

}  // namespace selprop
