/* bearing_stager.h - C API for the bearing degradation staging toolkit.
 *
 * The library segments a bearing's run-to-failure vibration record into
 * degradation stages (healthy, stage 1-3) and trains a classifier that
 * predicts the stage of a single two-channel snapshot.
 *
 * Conventions:
 *   - Objects are opaque handles created and destroyed by the library.
 *   - Functions return BSG_OK (0) on success or a bsg_status error code;
 *     bsg_last_error() describes the most recent failure on this thread.
 *   - Out-parameters are written only on success.
 */
#ifndef BEARING_STAGER_H
#define BEARING_STAGER_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bsg_status {
    BSG_OK = 0,
    BSG_ERR_INVALID_ARGUMENT = 1,
    BSG_ERR_IO = 2,
    BSG_ERR_PARSE = 3,
    BSG_ERR_VALIDATION = 4,
    BSG_ERR_SHAPE = 5,
    BSG_ERR_NUMERIC = 6,
    BSG_ERR_STATE = 7,
    BSG_ERR_CORRUPT_FILE = 8,
    BSG_ERR_WRONG_KIND = 9,
    BSG_ERR_CONFIG = 10,
    BSG_ERR_INTERNAL = 11
} bsg_status;

typedef struct bsg_config bsg_config;   /* pipeline configuration */
typedef struct bsg_run bsg_run;         /* one bearing's snapshot sequence */
typedef struct bsg_labels bsg_labels;   /* per-snapshot stage labels */
typedef struct bsg_model bsg_model;     /* trained classifier (or ae/pca) */

const char* bsg_version(void);

/* Message for the last error raised on the calling thread; empty string when
 * no error has occurred. The pointer stays valid until the next API call on
 * the same thread. */
const char* bsg_last_error(void);

/* ---- configuration ----------------------------------------------------- */

bsg_config* bsg_config_create(void);
void bsg_config_destroy(bsg_config* cfg);
bsg_status bsg_config_load_file(bsg_config* cfg, const char* path);
bsg_status bsg_config_set(bsg_config* cfg, const char* key, const char* value);
/* Copies the value for `key` into buf (NUL-terminated, truncating). */
bsg_status bsg_config_get(const bsg_config* cfg, const char* key, char* buf, size_t buf_size);
bsg_status bsg_config_set_seed(bsg_config* cfg, unsigned long long seed);

/* ---- runs --------------------------------------------------------------- */

/* Load from a FEMTO-layout directory (root/bearing_id/acc_*.csv) or, when
 * path ends in .bsr, from the binary run container. */
bsg_status bsg_run_load(const char* path, const char* bearing_id, bsg_run** out);
bsg_status bsg_run_save_bsr(const bsg_run* run, const char* path);
bsg_status bsg_run_snapshot_count(const bsg_run* run, size_t* out);
/* Validation report as text; free with bsg_string_free. issue_count gets the
 * number of problems found (0 = clean). */
bsg_status bsg_run_validate(const bsg_run* run, char** report_text, size_t* issue_count);
void bsg_run_destroy(bsg_run* run);
void bsg_string_free(char* text);

/* ---- synthetic data ----------------------------------------------------- */

bsg_status bsg_synth_generate(const bsg_config* cfg, bsg_run** run_out, bsg_labels** truth_out);
/* Emit a FEMTO-layout directory (acc_*.csv + truth_labels.csv + manifest). */
bsg_status bsg_synth_write_dataset(const bsg_config* cfg, const char* out_dir);

/* ---- labeling ----------------------------------------------------------- */

/* method: "ae" (autoencoder + 3-means + anomaly split) or "pca"
 * (40-component PCA + 4-means). */
bsg_status bsg_label_run(const bsg_run* run, const bsg_config* cfg, const char* method,
                         bsg_labels** out);
bsg_status bsg_labels_save_csv(const bsg_labels* labels, const char* path);
bsg_status bsg_labels_load_csv(const char* path, bsg_labels** out);
bsg_status bsg_labels_count(const bsg_labels* labels, size_t* out);
/* Stage of snapshot i as 0..3. */
bsg_status bsg_labels_stage(const bsg_labels* labels, size_t index, int* stage_out);
void bsg_labels_destroy(bsg_labels* labels);

/* ---- classifier --------------------------------------------------------- */

bsg_status bsg_train_classifier(const bsg_run* const* runs, const bsg_labels* const* labels,
                                size_t count, const bsg_config* cfg, bsg_model** out);
bsg_status bsg_model_save(const bsg_model* model, const char* path);
bsg_status bsg_model_load(const char* path, bsg_model** out);
/* Writes "ae", "pca" or "classifier" into buf. */
bsg_status bsg_model_kind(const bsg_model* model, char* buf, size_t buf_size);
void bsg_model_destroy(bsg_model* model);

/* Smoothed posteriors for a whole run -> CSV
 * (time_index,p_healthy,p_s1,p_s2,p_s3,stage). */
bsg_status bsg_predict_run(const bsg_model* model, const bsg_run* run, const bsg_config* cfg,
                           const char* out_csv);
/* Smoothed stage sequence into stages_out (length run size, values 0..3). */
bsg_status bsg_predict_stages(const bsg_model* model, const bsg_run* run, const bsg_config* cfg,
                              int* stages_out, size_t stages_capacity);

/* Per-snapshot feature matrix (26 columns, 13 per channel) -> CSV. */
bsg_status bsg_export_features(const bsg_run* run, const bsg_config* cfg, const char* out_csv);

/* ---- command-level entry points (artifact + manifest writers) ---------- */

bsg_status bsg_cmd_ingest_check(const char* runs_root, const char* bearing_id,
                                const char* export_bsr_or_null,
                                const char* features_csv_or_null, const bsg_config* cfg,
                                char** report_text, size_t* issue_count);
bsg_status bsg_cmd_synth(const bsg_config* cfg, const char* out_dir);
bsg_status bsg_cmd_label(const char* runs_root, const char* bearing_id, const char* method,
                         const bsg_config* cfg, const char* out_file);
bsg_status bsg_cmd_train(const char* runs_root, const char* const* label_files,
                         size_t label_file_count, const bsg_config* cfg, const char* out_model);
bsg_status bsg_cmd_predict(const char* model_file, const char* run_path, const bsg_config* cfg,
                           const char* out_csv);
bsg_status bsg_cmd_evaluate(const char* model_file, const char* runs_root,
                            const char* const* label_files, size_t label_file_count,
                            const bsg_config* cfg, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BEARING_STAGER_H */
