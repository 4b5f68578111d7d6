#include "selprop/selprop.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "checkpoint.hpp"
#include "experiment.hpp"

struct selprop_config {
    selprop::ExperimentConfig cfg;
};

struct selprop_dataset {
    selprop::DatasetBundle bundle;
};

struct selprop_model {
    const selprop::DatasetBundle* bundle = nullptr;
    selprop::ModelState state;
};

namespace {

thread_local std::string last_error;

selprop_status fail(selprop_status s, std::string msg) {
    last_error = std::move(msg);
    return s;
}

template <class F>
selprop_status guarded(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const selprop::ParseError& e) {
        return fail(SELPROP_ERR_PARSE, e.what());
    } catch (const selprop::OrderError& e) {
        return fail(SELPROP_ERR_ORDER, e.what());
    } catch (const selprop::ShapeError& e) {
        return fail(SELPROP_ERR_SHAPE, e.what());
    } catch (const selprop::NumericError& e) {
        return fail(SELPROP_ERR_NUMERIC, e.what());
    } catch (const selprop::Error& e) {
        return fail(SELPROP_ERR_RUNTIME, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SELPROP_ERR_OUT_OF_MEMORY, "out of memory");
    } catch (const std::exception& e) {
        return fail(SELPROP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SELPROP_ERR_INTERNAL, "unknown error");
    }
}

#define REQUIRE_ARG(cond, what) \
    if (!(cond)) return fail(SELPROP_ERR_INVALID_ARGUMENT, what)

struct Reporter {
    selprop_report_fn fn;
    void* user;
    void operator()(const std::string& line) const {
        if (fn) fn(line.c_str(), user);
    }
};

std::string fmt(const std::optional<double>& v) {
    if (!v) return "n/a";
    std::ostringstream ss;
    ss.precision(6);
    ss << std::fixed << *v;
    return ss.str();
}

std::string metric_line(const selprop::MetricsReport& m) {
    return "mrr=" + fmt(m.mrr) + " ap=" + fmt(m.ap) + " auc=" + fmt(m.auc) + " n_edges=" + std::to_string(m.n_edges);
}

void fill(selprop_metrics* out, const selprop::MetricsReport& m) {
    if (!out) return;
    *out = {};
    out->has_mrr = m.mrr.has_value();
    out->has_ap = m.ap.has_value();
    out->has_auc = m.auc.has_value();
    out->mrr = m.mrr.value_or(0.0);
    out->ap = m.ap.value_or(0.0);
    out->auc = m.auc.value_or(0.0);
    out->n_edges = m.n_edges;
    out->update_rate = m.update_rate;
    out->neighbor_update_rate = m.neighbor_update_rate;
}

}  // namespace

extern "C" {

const char* selprop_version(void) { return "0.1.0"; }

const char* selprop_last_error(void) { return last_error.c_str(); }

const char* selprop_status_string(selprop_status status) {
    switch (status) {
        case SELPROP_OK: return "ok";
        case SELPROP_ERR_INVALID_ARGUMENT: return "invalid argument";
        case SELPROP_ERR_RUNTIME: return "runtime error";
        case SELPROP_ERR_PARSE: return "parse error";
        case SELPROP_ERR_ORDER: return "event order error";
        case SELPROP_ERR_SHAPE: return "shape error";
        case SELPROP_ERR_NUMERIC: return "numeric error";
        case SELPROP_ERR_CHECK_FAILED: return "check failed";
        case SELPROP_ERR_OUT_OF_MEMORY: return "out of memory";
        case SELPROP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

selprop_status selprop_config_create(selprop_config** out) {
    REQUIRE_ARG(out, "config_create: null output");
    return guarded([&] {
        *out = new selprop_config{};
        return SELPROP_OK;
    });
}

void selprop_config_destroy(selprop_config* cfg) { delete cfg; }

selprop_status selprop_config_load_json(selprop_config* cfg, const char* path) {
    REQUIRE_ARG(cfg && path, "config_load_json: null argument");
    return guarded([&] {
        cfg->cfg = selprop::load_config(path, cfg->cfg);
        return SELPROP_OK;
    });
}

selprop_status selprop_config_parse_json(selprop_config* cfg, const char* text) {
    REQUIRE_ARG(cfg && text, "config_parse_json: null argument");
    return guarded([&] {
        cfg->cfg = selprop::config_from_json(text, cfg->cfg);
        return SELPROP_OK;
    });
}

selprop_status selprop_config_set(selprop_config* cfg, const char* key, const char* value) {
    REQUIRE_ARG(cfg && key && value, "config_set: null argument");
    return guarded([&] {
        selprop::set_config_value(cfg->cfg, key, value);
        return SELPROP_OK;
    });
}

selprop_status selprop_config_to_json(const selprop_config* cfg, char* buf, size_t cap, size_t* needed) {
    REQUIRE_ARG(cfg, "config_to_json: null config");
    return guarded([&] {
        const std::string text = selprop::config_to_json(cfg->cfg);
        if (needed) *needed = text.size() + 1;
        if (!buf) return SELPROP_OK;
        if (cap < text.size() + 1) return fail(SELPROP_ERR_INVALID_ARGUMENT, "config_to_json: buffer too small");
        std::memcpy(buf, text.c_str(), text.size() + 1);
        return SELPROP_OK;
    });
}

selprop_status selprop_config_hash(const selprop_config* cfg, char out[17]) {
    REQUIRE_ARG(cfg && out, "config_hash: null argument");
    return guarded([&] {
        const std::string h = selprop::config_hash(cfg->cfg);
        std::memcpy(out, h.c_str(), 17);
        return SELPROP_OK;
    });
}

size_t selprop_config_key_count(void) { return selprop::config_keys().size(); }

const char* selprop_config_key_name(size_t index) {
    const auto& keys = selprop::config_keys();
    return index < keys.size() ? keys[index].c_str() : nullptr;
}

selprop_status selprop_dataset_load(const char* path, const char* format, selprop_dataset** out) {
    REQUIRE_ARG(path && format && out, "dataset_load: null argument");
    return guarded([&] {
        auto ds = std::make_unique<selprop_dataset>();
        ds->bundle = selprop::load_dataset(path, selprop::parse_dataset_format(format));
        *out = ds.release();
        return SELPROP_OK;
    });
}

void selprop_dataset_destroy(selprop_dataset* ds) { delete ds; }

selprop_status selprop_dataset_info_get(const selprop_dataset* ds, selprop_dataset_info* info) {
    REQUIRE_ARG(ds && info, "dataset_info_get: null argument");
    const auto& b = ds->bundle;
    info->n_nodes = b.n_nodes;
    info->n_events = b.events.size();
    info->d_e = b.d_e;
    info->train_end = b.train_end;
    info->val_end = b.val_end;
    info->n_inductive = b.inductive_count();
    info->bipartite = b.bipartite ? 1 : 0;
    return SELPROP_OK;
}

selprop_status selprop_train(const selprop_config* cfg, selprop_report_fn report, void* user) {
    REQUIRE_ARG(cfg, "train: null config");
    return guarded([&] {
        const Reporter say{report, user};
        auto r = selprop::cmd_train(cfg->cfg);
        for (const auto& e : r.fit.history) {
            std::ostringstream ss;
            ss << "epoch " << e.epoch << " loss=" << e.mean_loss << " reward=" << e.mean_reward
               << " val_ap=" << e.val_metric << " update_rate=" << e.update_rate;
            say(ss.str());
        }
        say("best epoch " + std::to_string(r.fit.best_epoch));
        say("history: " + r.history_path);
        say("checkpoint: " + r.checkpoint_path);
        return SELPROP_OK;
    });
}

selprop_status selprop_evaluate(const selprop_config* cfg, selprop_metrics* out, selprop_report_fn report,
                                void* user) {
    REQUIRE_ARG(cfg, "evaluate: null config");
    return guarded([&] {
        const Reporter say{report, user};
        auto r = selprop::cmd_evaluate(cfg->cfg);
        fill(out, r.metrics);
        say(selprop::to_string(r.metrics.mode) + " " + metric_line(r.metrics));
        say("metrics: " + r.metrics_path);
        return SELPROP_OK;
    });
}

selprop_status selprop_ablate(const selprop_config* cfg, selprop_report_fn report, void* user) {
    REQUIRE_ARG(cfg, "ablate: null config");
    return guarded([&] {
        const Reporter say{report, user};
        for (const auto& row : selprop::cmd_ablate(cfg->cfg)) say(row.variant + " " + metric_line(row.metrics));
        return SELPROP_OK;
    });
}

selprop_status selprop_noise(const selprop_config* cfg, selprop_report_fn report, void* user) {
    REQUIRE_ARG(cfg, "noise: null config");
    return guarded([&] {
        const Reporter say{report, user};
        for (const auto& row : selprop::cmd_noise(cfg->cfg)) {
            std::ostringstream ss;
            ss << "sigma2=" << row.sigma2 << " " << metric_line(row.metrics) << " dec_mrr=" << row.dec_mrr
               << " dec_ap=" << row.dec_ap << " update_rate=" << row.metrics.update_rate;
            say(ss.str());
        }
        return SELPROP_OK;
    });
}

selprop_status selprop_sweep_k(const selprop_config* cfg, selprop_report_fn report, void* user) {
    REQUIRE_ARG(cfg, "sweep_k: null config");
    return guarded([&] {
        const Reporter say{report, user};
        for (const auto& row : selprop::cmd_sweep_k(cfg->cfg))
            say("k=" + std::to_string(row.k) + " " + metric_line(row.metrics));
        return SELPROP_OK;
    });
}

selprop_status selprop_synth(const selprop_config* cfg, selprop_report_fn report, void* user) {
    REQUIRE_ARG(cfg, "synth: null config");
    return guarded([&] {
        const Reporter say{report, user};
        auto r = selprop::cmd_synth(cfg->cfg);
        say("wrote " + std::to_string(r.n_events) + " events over " + std::to_string(r.n_nodes) + " nodes to " +
            r.data_path);
        say("meta: " + r.meta_path);
        return SELPROP_OK;
    });
}

selprop_status selprop_gradcheck(const selprop_config* cfg, const selprop_gradcheck_options* opt,
                                 selprop_report_fn report, void* user) {
    REQUIRE_ARG(cfg, "gradcheck: null config");
    return guarded([&] {
        const Reporter say{report, user};
        selprop::GradcheckOptions o;
        if (opt) {
            if (opt->trials) o.trials = opt->trials;
            o.seed = opt->seed;
            if (opt->corrupt) o.corrupt = opt->corrupt;
        }
        auto r = selprop::cmd_gradcheck(cfg->cfg, o);
        std::string failed;
        for (const auto& e : r.entries) {
            std::ostringstream ss;
            ss << (e.passed ? "PASS " : "FAIL ") << e.name << " max_rel_error=" << e.max_rel_error;
            say(ss.str());
            if (!e.passed) failed += (failed.empty() ? "" : ", ") + e.name;
        }
        if (!r.passed()) return fail(SELPROP_ERR_CHECK_FAILED, "gradient check failed for " + failed);
        return SELPROP_OK;
    });
}

selprop_status selprop_model_load(const selprop_dataset* ds, const char* checkpoint_path, selprop_model** out) {
    REQUIRE_ARG(ds && checkpoint_path && out, "model_load: null argument");
    return guarded([&] {
        auto m = std::make_unique<selprop_model>();
        m->bundle = &ds->bundle;
        m->state = selprop::load_checkpoint(checkpoint_path, ds->bundle);
        *out = m.release();
        return SELPROP_OK;
    });
}

void selprop_model_destroy(selprop_model* model) { delete model; }

selprop_status selprop_model_score(const selprop_model* model, uint32_t src, uint32_t dst, double* out) {
    REQUIRE_ARG(model && out, "model_score: null argument");
    const auto n = model->state.table.n_nodes();
    REQUIRE_ARG(src < n && dst < n, "model_score: node id out of range");
    return guarded([&] {
        *out = selprop::sigmoid(selprop::dot(model->state.table.row(src), model->state.table.row(dst)));
        return SELPROP_OK;
    });
}

selprop_status selprop_model_embedding(const selprop_model* model, uint32_t node, double* buf, size_t cap,
                                       size_t* dim) {
    REQUIRE_ARG(model, "model_embedding: null model");
    REQUIRE_ARG(node < model->state.table.n_nodes(), "model_embedding: node id out of range");
    const auto row = model->state.table.row(node);
    if (dim) *dim = row.size();
    if (!buf) return SELPROP_OK;
    REQUIRE_ARG(cap >= row.size(), "model_embedding: buffer too small");
    std::copy(row.begin(), row.end(), buf);
    return SELPROP_OK;
}

}  // extern "C"
