// Command-line front end over the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "selprop/selprop.h"

namespace {

struct ConfigDeleter {
    void operator()(selprop_config* c) const { selprop_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<selprop_config, ConfigDeleter>;

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int report_failure(selprop_status s) {
    std::fprintf(stderr, "error: %s: %s\n", selprop_status_string(s), selprop_last_error());
    return s == SELPROP_ERR_CHECK_FAILED ? 3 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selprop: selective propagation for continuous-time dynamic graphs"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    app.add_option("--config", config_path, "flat JSON config file")->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_dir, "output directory");

    std::map<std::string, std::string> overrides;
    std::map<std::string, CLI::Option*> override_opts;
    for (size_t i = 0; i < selprop_config_key_count(); ++i) {
        const std::string key = selprop_config_key_name(i);
        if (key == "seed" || key == "out") continue;
        override_opts[key] = app.add_option("--" + key, overrides[key], "override config key " + key)
                                 ->group("Config overrides");
    }

    auto* train = app.add_subcommand("train", "fit a model and write history.csv and checkpoint.json");
    auto* evaluate = app.add_subcommand("evaluate", "test-slice metrics (uses --checkpoint or trains first)");
    auto* ablate = app.add_subcommand("ablate", "six-variant ablation table");
    auto* noise = app.add_subcommand("noise", "noise robustness grid with DEC and action log");
    auto* sweep = app.add_subcommand("sweep-k", "train and evaluate for each neighbor cap in k_list");
    auto* synth = app.add_subcommand("synth", "write a synthetic community-structured stream");
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every backward pass");
    std::size_t trials = 0;
    std::string corrupt;
    gradcheck->add_option("--trials", trials, "randomized instances (default 50)");
    gradcheck->add_option("--corrupt", corrupt, "perturb one parameter's analytic gradient (self-test)");

    CLI11_PARSE(app, argc, argv);

    selprop_config* raw = nullptr;
    if (auto s = selprop_config_create(&raw); s != SELPROP_OK) return report_failure(s);
    ConfigPtr cfg(raw);
    if (!config_path.empty())
        if (auto s = selprop_config_load_json(cfg.get(), config_path.c_str()); s != SELPROP_OK)
            return report_failure(s);
    for (const auto& [key, opt] : override_opts)
        if (opt->count())
            if (auto s = selprop_config_set(cfg.get(), key.c_str(), overrides[key].c_str()); s != SELPROP_OK)
                return report_failure(s);
    if (seed_opt->count())
        if (auto s = selprop_config_set(cfg.get(), "seed", std::to_string(seed).c_str()); s != SELPROP_OK)
            return report_failure(s);
    if (out_opt->count())
        if (auto s = selprop_config_set(cfg.get(), "out", out_dir.c_str()); s != SELPROP_OK)
            return report_failure(s);

    selprop_status s = SELPROP_OK;
    if (*train) {
        s = selprop_train(cfg.get(), print_line, nullptr);
    } else if (*evaluate) {
        selprop_metrics m;
        s = selprop_evaluate(cfg.get(), &m, print_line, nullptr);
    } else if (*ablate) {
        s = selprop_ablate(cfg.get(), print_line, nullptr);
    } else if (*noise) {
        s = selprop_noise(cfg.get(), print_line, nullptr);
    } else if (*sweep) {
        s = selprop_sweep_k(cfg.get(), print_line, nullptr);
    } else if (*synth) {
        s = selprop_synth(cfg.get(), print_line, nullptr);
    } else if (*gradcheck) {
        selprop_gradcheck_options opt{trials, seed, corrupt.empty() ? nullptr : corrupt.c_str()};
        s = selprop_gradcheck(cfg.get(), &opt, print_line, nullptr);
    }
    return s == SELPROP_OK ? 0 : report_failure(s);
}
