/* Exercises the shared library through its C header only. */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "selprop/selprop.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                \
        }                                                              \
    } while (0)

#define EXPECT_OK(call)                                                              \
    do {                                                                             \
        selprop_status s_ = (call);                                                  \
        if (s_ != SELPROP_OK) {                                                      \
            fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call,      \
                    selprop_status_string(s_), selprop_last_error());                \
            ++failures;                                                              \
        }                                                                            \
    } while (0)

static int lines = 0;

static void count_lines(const char* line, void* user) {
    (void)line;
    ++*(int*)user;
}

int main(int argc, char** argv) {
    const char* out = argc > 1 ? argv[1] : "capi_out";
    char path[4096];
    selprop_config* cfg = NULL;
    selprop_config* copy = NULL;
    selprop_dataset* ds = NULL;
    selprop_model* model = NULL;

    EXPECT(selprop_version() != NULL && strlen(selprop_version()) > 0);
    EXPECT(selprop_config_create(NULL) == SELPROP_ERR_INVALID_ARGUMENT);
    EXPECT(strlen(selprop_last_error()) > 0);

    EXPECT_OK(selprop_config_create(&cfg));
    EXPECT(selprop_config_key_count() > 0);
    EXPECT(selprop_config_key_name(selprop_config_key_count()) == NULL);
    EXPECT(selprop_config_set(cfg, "no_such_key", "1") != SELPROP_OK);
    EXPECT(strstr(selprop_last_error(), "valid keys") != NULL);
    EXPECT(selprop_config_set(cfg, "d", "minus one") != SELPROP_OK);

    EXPECT_OK(selprop_config_set(cfg, "out", out));
    EXPECT_OK(selprop_config_set(cfg, "n_events", "400"));
    EXPECT_OK(selprop_config_set(cfg, "nodes_per_community", "8"));
    EXPECT_OK(selprop_config_set(cfg, "d", "6"));
    EXPECT_OK(selprop_config_set(cfg, "d_h", "8"));
    EXPECT_OK(selprop_config_set(cfg, "k", "10"));
    EXPECT_OK(selprop_config_set(cfg, "max_epochs", "2"));
    EXPECT_OK(selprop_config_set(cfg, "lr", "0.001"));

    /* to_json reports the needed size, then round-trips with the same hash */
    size_t needed = 0;
    EXPECT(selprop_config_to_json(cfg, NULL, 0, &needed) == SELPROP_OK && needed > 2);
    char* text = malloc(needed);
    EXPECT_OK(selprop_config_to_json(cfg, text, needed, &needed));
    EXPECT_OK(selprop_config_create(&copy));
    EXPECT_OK(selprop_config_parse_json(copy, text));
    char h1[17], h2[17];
    EXPECT_OK(selprop_config_hash(cfg, h1));
    EXPECT_OK(selprop_config_hash(copy, h2));
    EXPECT(strcmp(h1, h2) == 0 && strlen(h1) == 16);
    free(text);
    selprop_config_destroy(copy);

    EXPECT(selprop_train(cfg, NULL, NULL) != SELPROP_OK); /* no dataset yet */

    lines = 0;
    EXPECT_OK(selprop_synth(cfg, count_lines, &lines));
    EXPECT(lines > 0);
    snprintf(path, sizeof path, "%s/synthetic.txt", out);
    EXPECT_OK(selprop_config_set(cfg, "dataset", path));

    EXPECT_OK(selprop_dataset_load(path, "edge_list", &ds));
    selprop_dataset_info info;
    EXPECT_OK(selprop_dataset_info_get(ds, &info));
    EXPECT(info.n_events == 400);
    EXPECT(info.train_end == 320 && info.val_end == 360);
    EXPECT(selprop_dataset_load(path, "parquet", NULL) == SELPROP_ERR_INVALID_ARGUMENT);

    EXPECT_OK(selprop_train(cfg, NULL, NULL));
    snprintf(path, sizeof path, "%s/checkpoint.json", out);
    EXPECT_OK(selprop_config_set(cfg, "checkpoint", path));

    selprop_metrics m;
    memset(&m, 0, sizeof m);
    EXPECT_OK(selprop_evaluate(cfg, &m, NULL, NULL));
    EXPECT(m.has_ap && m.has_auc && m.has_mrr);
    EXPECT(m.ap >= 0.0 && m.ap <= 1.0 && m.auc >= 0.0 && m.auc <= 1.0 && m.mrr > 0.0 && m.mrr <= 1.0);
    EXPECT(m.n_edges == 40);

    EXPECT_OK(selprop_model_load(ds, path, &model));
    double score = -1.0;
    EXPECT_OK(selprop_model_score(model, 0, 1, &score));
    EXPECT(score >= 0.0 && score <= 1.0);
    EXPECT(selprop_model_score(model, 0, (uint32_t)info.n_nodes, &score) != SELPROP_OK);
    double row[64];
    size_t dim = 0;
    EXPECT_OK(selprop_model_embedding(model, 0, row, 64, &dim));
    EXPECT(dim == 6);
    selprop_model_destroy(model);

    selprop_gradcheck_options opt;
    memset(&opt, 0, sizeof opt);
    opt.trials = 5;
    EXPECT_OK(selprop_gradcheck(cfg, &opt, NULL, NULL));
    opt.corrupt = "W_p";
    EXPECT(selprop_gradcheck(cfg, &opt, NULL, NULL) == SELPROP_ERR_CHECK_FAILED);
    EXPECT(strstr(selprop_last_error(), "W_p") != NULL);

    selprop_dataset_destroy(ds);
    selprop_config_destroy(cfg);
    selprop_config_destroy(NULL);

    if (failures) fprintf(stderr, "%d expectation(s) failed\n", failures);
    else printf("c api smoke test passed\n");
    return failures ? 1 : 0;
}
