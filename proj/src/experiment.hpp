#pragma once

// Config-driven experiment commands shared by the C API and the CLI.

#include <cstdint>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "synthetic.hpp"
#include "trainer.hpp"

namespace selprop {

struct ExperimentConfig {
    TrainConfig train;
    std::string dataset;  // path
    DatasetFormat format = DatasetFormat::edge_list;
    std::string node_features;  // optional path
    EvalMode mode = EvalMode::transductive;
    std::vector<double> noise_grid{0.0, 0.01, 0.03, 0.1, 0.3};
    std::vector<std::size_t> k_grid{0, 50, 100, 200};
    std::string checkpoint;  // existing checkpoint for evaluate/noise; empty trains first
    std::string out = "out";
    SyntheticSpec synthetic;

    void validate() const;
};

/// Names accepted by set_config_value / config_from_json.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual form (lists are comma separated).
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat JSON object; unknown keys raise an error listing the valid ones.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
std::string config_to_json(const ExperimentConfig& cfg);

/// FNV-1a over the result-affecting fields (output locations excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

DatasetBundle load_experiment_dataset(const ExperimentConfig& cfg);

struct TrainOutcome {
    FitResult fit;
    std::string history_path;
    std::string checkpoint_path;
};

TrainOutcome cmd_train(const ExperimentConfig& cfg);

/// Test-slice metrics of a fitted (or checkpointed) state.
MetricsReport test_metrics(const DatasetBundle& bundle, ModelState state, const ExperimentConfig& cfg,
                           double noise_sigma2 = 0.0, std::vector<ActionLogRow>* log = nullptr);

std::string metrics_json(const MetricsReport& m, const ExperimentConfig& cfg, const std::string& dataset);

struct EvaluateOutcome {
    MetricsReport metrics;
    std::string metrics_path;
};

/// Uses cfg.checkpoint when set, otherwise trains first.
EvaluateOutcome cmd_evaluate(const ExperimentConfig& cfg);

struct VariantRow {
    std::string variant;
    MetricsReport metrics;
    std::string config_hash;
};

/// Variant configs in output order: full, agg-w.o.-time, pro-w.o.-time,
/// select-all, select-none (k = 0), select-random.
std::vector<std::pair<std::string, ExperimentConfig>> ablation_variants(const ExperimentConfig& cfg);
std::vector<VariantRow> cmd_ablate(const ExperimentConfig& cfg);

struct NoiseRow {
    double sigma2 = 0.0;
    MetricsReport metrics;
    double dec_mrr = 0.0;
    double dec_ap = 0.0;
    double dec_auc = 0.0;
};

/// Relative decrement (m0 - m) / m0; 0 when m0 is 0.
double metric_decrement(double m0, double m);

/// Noise grid over one trained state.
std::vector<NoiseRow> noise_grid(const DatasetBundle& bundle, const ModelState& state, const ExperimentConfig& cfg,
                                 std::vector<ActionLogRow>* log = nullptr);
std::vector<NoiseRow> cmd_noise(const ExperimentConfig& cfg);

struct SweepRow {
    std::size_t k = 0;
    MetricsReport metrics;
    std::size_t best_epoch = 0;
};

std::vector<SweepRow> cmd_sweep_k(const ExperimentConfig& cfg);

struct SynthOutcome {
    std::string data_path;
    std::string meta_path;
    std::size_t n_nodes = 0;
    std::size_t n_events = 0;
};

SynthOutcome cmd_synth(const ExperimentConfig& cfg);

struct GradcheckOptions {
    std::size_t trials = 50;
    std::uint64_t seed = 0;
    std::size_t max_dim = 6;
    double tolerance = 1e-4;
    std::string corrupt;  // parameter whose analytic gradient is deliberately perturbed
};

struct GradcheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    bool passed = false;
};

struct GradcheckReport {
    std::vector<GradcheckEntry> entries;  // one per parameter, then the table-read inputs
    std::size_t trials = 0;
    bool passed() const;
};

GradcheckReport run_gradcheck(const GradcheckOptions& opt);
GradcheckReport cmd_gradcheck(const ExperimentConfig& cfg, const GradcheckOptions& opt);

}  // namespace selprop
