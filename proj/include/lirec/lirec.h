#ifndef LIREC_H
#define LIREC_H

/* C interface to the lirec engine: synthetic data generation, training,
 * evaluation and gradient checking behind opaque handles.
 *
 * Conventions:
 *   - every fallible call returns a lirec_status; on failure
 *     lirec_last_error() holds a message until the next failing call on the
 *     same thread
 *   - all char** outputs are malloc'd JSON documents the caller releases
 *     with lirec_string_free()
 *   - JSON config arguments may be NULL for defaults
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lirec_status {
  LIREC_OK = 0,
  LIREC_ERR_INVALID = 1, /* bad arguments or config */
  LIREC_ERR_IO = 2,      /* filesystem or format failure */
  LIREC_ERR_RUNTIME = 3  /* numeric or internal failure */
} lirec_status;

const char* lirec_version(void);

/* message for the most recent failing call on this thread ("" if none) */
const char* lirec_last_error(void);

void lirec_string_free(char* s);

/* ---- datasets ------------------------------------------------------- */

typedef struct lirec_dataset lirec_dataset;

/* loads a dataset directory (manifest.json plus feature files) */
lirec_status lirec_dataset_open(const char* root, lirec_dataset** out);
void lirec_dataset_close(lirec_dataset* ds);

/* counts, vocab sizes and feature dims as JSON */
lirec_status lirec_dataset_summary(const lirec_dataset* ds, char** json_out);

/* writes a synthetic dataset (and its generator truth record) to out_dir */
lirec_status lirec_generate(const char* config_json, const char* out_dir);

/* ---- training ------------------------------------------------------- */

/* trains per config_json; writes checkpoints and a training log under
 * out_dir; result_json_out reports the final checkpoint and per-epoch loss */
lirec_status lirec_train(const char* config_json, const lirec_dataset* ds,
                         const char* out_dir, char** result_json_out);

/* continues a checkpointed run up to the config's total epoch count */
lirec_status lirec_resume(const char* checkpoint, const char* config_json,
                          const lirec_dataset* ds, const char* out_dir,
                          char** result_json_out);

/* ---- evaluation ----------------------------------------------------- */

/* scores a checkpoint on a dataset; options_json is an eval config */
lirec_status lirec_evaluate(const char* checkpoint, const lirec_dataset* ds,
                            const char* options_json, char** report_json_out);

/* model architecture, epoch and step of a checkpoint */
lirec_status lirec_checkpoint_summary(const char* checkpoint, char** json_out);

/* ---- gradient checking ---------------------------------------------- */

/* finite-difference check of every objective form; any output may be NULL */
lirec_status lirec_gradcheck(uint64_t seed, int instances_per_form,
                             char** report_json_out, double* max_rel_err_out);

#ifdef __cplusplus
}
#endif

#endif /* LIREC_H */
