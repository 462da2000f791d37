/* Shared-library interface: opaque handles, integer status codes, and
 * config-text-driven runners that back the command-line tool.
 *
 * Every function that can fail returns latcode_status; on failure the
 * thread-local message from latcode_last_error() describes what went wrong.
 * Out-parameters are written only on LATCODE_OK. Handles are freed with
 * their matching *_free function; buffers with latcode_buf_free.
 */
#ifndef LATCODE_H
#define LATCODE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LATCODE_API __declspec(dllexport)
#else
#define LATCODE_API __attribute__((visibility("default")))
#endif

typedef enum latcode_status {
    LATCODE_OK = 0,
    LATCODE_ERR_INVALID = 2, /* bad arguments, malformed config or file content */
    LATCODE_ERR_NUMERIC = 3, /* iteration limits, divergence, degenerate scales */
    LATCODE_ERR_IO = 4       /* filesystem failures */
} latcode_status;

/* Message for the most recent failure on this thread. Never NULL. */
LATCODE_API const char* latcode_last_error(void);

/* ----- byte buffer (JSON / CSV results) ----- */
typedef struct latcode_buf latcode_buf;
LATCODE_API const char* latcode_buf_data(const latcode_buf* buf);
LATCODE_API size_t latcode_buf_size(const latcode_buf* buf);
LATCODE_API void latcode_buf_free(latcode_buf* buf);

/* ----- data space ----- */
typedef struct latcode_space latcode_space;
LATCODE_API latcode_status latcode_space_ball(const double* center, int dim, double radius,
                                              latcode_space** out);
LATCODE_API latcode_status latcode_space_box(const double* lower, const double* upper, int dim,
                                             latcode_space** out);
LATCODE_API void latcode_space_free(latcode_space* space);
LATCODE_API latcode_status latcode_space_diameter(const latcode_space* space, double* out);
/* Metric projection of x (dim doubles) onto the space, written to out. */
LATCODE_API latcode_status latcode_space_project(const latcode_space* space, const double* x,
                                                 int dim, double* out);

/* ----- latent space ----- */
typedef struct latcode_latent latcode_latent;
LATCODE_API latcode_status latcode_latent_ball(int dim, double radius, latcode_latent** out);
LATCODE_API latcode_status latcode_latent_box(const double* lower, const double* upper, int dim,
                                              latcode_latent** out);
/* points: count x dim, row-major. */
LATCODE_API latcode_status latcode_latent_finite(const double* points, int count, int dim,
                                                 latcode_latent** out);
/* The standard basis codebook {e_1..e_k}. */
LATCODE_API latcode_status latcode_latent_basis(int k, latcode_latent** out);
LATCODE_API void latcode_latent_free(latcode_latent* latent);

/* ----- dataset ----- */
typedef struct latcode_dataset latcode_dataset;
/* rows: count x dim of the space, row-major; points must lie in the space. */
LATCODE_API latcode_status latcode_dataset_create(const latcode_space* space, const double* rows,
                                                  int count, latcode_dataset** out);
/* CSV: one sample per row, no header, '.' decimal separator. */
LATCODE_API latcode_status latcode_dataset_load(const latcode_space* space, const char* csv_path,
                                                latcode_dataset** out);
LATCODE_API latcode_status latcode_dataset_size(const latcode_dataset* data, int* out);
LATCODE_API void latcode_dataset_free(latcode_dataset* data);

/* ----- discrete measure ----- */
typedef struct latcode_measure latcode_measure;
/* atoms: count x dim row-major; weights: count nonnegative values summing to 1. */
LATCODE_API latcode_status latcode_measure_create(const double* atoms, const double* weights,
                                                  int count, int dim, latcode_measure** out);
/* CSV: one atom per row, last column is its weight. */
LATCODE_API latcode_status latcode_measure_load(const char* csv_path, latcode_measure** out);
LATCODE_API latcode_status latcode_measure_size(const latcode_measure* m, int* out);
LATCODE_API void latcode_measure_free(latcode_measure* m);

/* ----- reconstruction map ----- */
typedef struct latcode_map latcode_map;
LATCODE_API latcode_status latcode_map_load(const char* json_path, latcode_map** out);
LATCODE_API latcode_status latcode_map_from_json(const char* text, latcode_map** out);
LATCODE_API latcode_status latcode_map_to_json(const latcode_map* map, latcode_buf** out);
LATCODE_API latcode_status latcode_map_save(const latcode_map* map, const char* json_path);
LATCODE_API latcode_status latcode_map_latent_dim(const latcode_map* map, int* out);
LATCODE_API latcode_status latcode_map_output_dim(const latcode_map* map, int* out);
/* Raw map value f(h); h has latent_dim entries, out has output_dim. */
LATCODE_API latcode_status latcode_map_forward(const latcode_map* map, const double* h,
                                               double* out);
LATCODE_API void latcode_map_free(latcode_map* map);

/* ----- encoding and risk ----- */
/* strategy_kind: 0 exhaustive, 1 refined (projected gradient polish). */
LATCODE_API latcode_status latcode_encode_point(const latcode_map* map,
                                                const latcode_space* space,
                                                const latcode_latent* latent, int strategy_kind,
                                                double net_eps, int gd_steps, double step_size,
                                                int restarts, const double* z, double* h_out,
                                                double* error_out);
LATCODE_API latcode_status latcode_empirical_risk(const latcode_map* map,
                                                  const latcode_dataset* data,
                                                  const latcode_latent* latent, int strategy_kind,
                                                  double net_eps, int gd_steps, double step_size,
                                                  int restarts, int threads, double* out);

/* ----- optimal transport ----- */
/* p is 1 or 2; cost_out is the p-th power of distance_out, nnz_out counts
 * coupling entries above 1e-15. Any of the out pointers may be NULL. */
LATCODE_API latcode_status latcode_wasserstein(const latcode_measure* a,
                                               const latcode_measure* b, int p,
                                               double* distance_out, double* cost_out,
                                               int64_t* nnz_out);
/* Exhaustive check that the optimal k-point quantization error equals the
 * squared 2-Wasserstein distance to the best k-point measure. */
LATCODE_API latcode_status latcode_pollard_check(const latcode_measure* m, int k, double* e_k_out,
                                                 double* w2sq_out);

/* ----- rate-distortion ----- */
/* One fixed-slope evaluation (slope < 0): alternating-projection iterations
 * until the duality gap falls below tol. */
LATCODE_API latcode_status latcode_rd_point(const latcode_measure* source,
                                            const latcode_measure* reproduction, double slope,
                                            double tol, int max_iter, double* rate_out,
                                            double* distortion_out, double* gap_out,
                                            int* iterations_out);
/* Curve over negative slopes in ascending order; CSV rate_nats,distortion. */
LATCODE_API latcode_status latcode_rd_curve(const latcode_measure* source,
                                            const latcode_measure* reproduction,
                                            const double* slopes, int n_slopes, double tol,
                                            int max_iter, latcode_buf** csv_out);
/* Smallest distortion achievable at mutual information <= target_rate
 * (nats), approached from the feasible side. */
LATCODE_API latcode_status latcode_distortion_at_rate(const latcode_measure* source,
                                                      const latcode_measure* reproduction,
                                                      double target_rate, double tol, int max_iter,
                                                      double* distortion_out, double* rate_out);

/* ----- covering numbers ----- */
LATCODE_API latcode_status latcode_maurey_logcover(double M, int d_rows, int k_cols, double eps,
                                                   double* out);

/* ----- config-driven runners (the CLI's engine) -----
 * config_text: `key = value` lines, '#' comments. overrides_text (may be
 * NULL) is more of the same, applied on top — command-line flags land here.
 * out_dir (when the runner emits files) must exist. Each runner returns a
 * JSON summary in *json_out. */
LATCODE_API latcode_status latcode_run_fit(const char* config_text, const char* overrides_text,
                                           const char* out_dir, latcode_buf** json_out);
LATCODE_API latcode_status latcode_run_encode(const char* config_text, const char* overrides_text,
                                              const char* out_dir, latcode_buf** json_out);
LATCODE_API latcode_status latcode_run_risk(const char* config_text, const char* overrides_text,
                                            latcode_buf** json_out);
LATCODE_API latcode_status latcode_run_gap(const char* config_text, const char* overrides_text,
                                           const char* out_dir, latcode_buf** json_out);
LATCODE_API latcode_status latcode_run_rate(const char* config_text, const char* overrides_text,
                                            const char* out_dir, latcode_buf** json_out);
LATCODE_API latcode_status latcode_run_bound(const char* config_text, const char* overrides_text,
                                             latcode_buf** json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LATCODE_H */
