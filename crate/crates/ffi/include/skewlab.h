#ifndef SKEWLAB_H
#define SKEWLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes mirrored from the library's error classes.
typedef enum SkewlabStatus {
  SkewlabStatus_Ok = 0,
  SkewlabStatus_NullPointer = 1,
  SkewlabStatus_InvalidArgument = 2,
  SkewlabStatus_OutsideDomain = 3,
  SkewlabStatus_ParameterError = 4,
  SkewlabStatus_EvaluationError = 5,
  SkewlabStatus_ResourceError = 6,
  SkewlabStatus_DivergenceError = 7,
  SkewlabStatus_BranchError = 8,
  SkewlabStatus_ConfigError = 9,
  SkewlabStatus_IoError = 10,
  SkewlabStatus_Panic = 11,
} SkewlabStatus;

// Verdict codes returned by `skewlab_classify`.
typedef enum SkewlabVerdict {
  SkewlabVerdict_Carleson = 0,
  SkewlabVerdict_Vanishing = 1,
  SkewlabVerdict_NotCarleson = 2,
  SkewlabVerdict_Inconclusive = 3,
} SkewlabVerdict;

// Opaque model-domain handle.
typedef struct SkewlabDomain SkewlabDomain;

// Opaque measure handle.
typedef struct SkewlabMeasure SkewlabMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or NULL when no error occurred yet.
const char *skewlab_last_error(void);

// Library version as a static NUL-terminated string.
const char *skewlab_version(void);

// Create the unit ball of complex dimension `n`. `euclidean_weight`
// selects the `1-|z|` convention instead of the default `1-|z|^2`.
//
// # Safety
// `out` must be a valid pointer; the result must be freed with
// [`skewlab_domain_free`].
enum SkewlabStatus skewlab_domain_new(size_t n, bool euclidean_weight, struct SkewlabDomain **out);

// # Safety
// `domain` must come from [`skewlab_domain_new`] and not be freed twice.
void skewlab_domain_free(struct SkewlabDomain *domain);

// Boundary distance of a point under the domain's weight convention.
//
// # Safety
// `domain` must be a live handle; `coords` must point to `len` doubles;
// `out` must be valid.
enum SkewlabStatus skewlab_boundary_distance(const struct SkewlabDomain *domain,
                                             const double *coords,
                                             size_t len,
                                             double *out);

// Kobayashi distance between two points.
//
// # Safety
// As for [`skewlab_boundary_distance`], with both points of length `len`.
enum SkewlabStatus skewlab_kobayashi_distance(const struct SkewlabDomain *domain,
                                              const double *z,
                                              const double *w,
                                              size_t len,
                                              double *out);

// Weighted volume `nu_beta(B(center, r))` of a Kobayashi ball.
//
// # Safety
// As for [`skewlab_boundary_distance`].
enum SkewlabStatus skewlab_ball_volume(const struct SkewlabDomain *domain,
                                       const double *center,
                                       size_t len,
                                       double r,
                                       double beta,
                                       double *out);

// Radial-density measure `scale * delta^t dnu`.
//
// # Safety
// `domain` must be live; `out` valid; free with [`skewlab_measure_free`].
enum SkewlabStatus skewlab_measure_radial(const struct SkewlabDomain *domain,
                                          double t,
                                          double scale,
                                          struct SkewlabMeasure **out);

// Atomic measure from `count` points (interleaved, `2n` doubles each) and
// `count` positive weights.
//
// # Safety
// `points` must hold `count * 2n` doubles and `weights` `count` doubles.
enum SkewlabStatus skewlab_measure_atomic(const struct SkewlabDomain *domain,
                                          const double *points,
                                          const double *weights,
                                          size_t count,
                                          struct SkewlabMeasure **out);

// # Safety
// `measure` must come from a measure constructor and not be freed twice.
void skewlab_measure_free(struct SkewlabMeasure *measure);

// Total mass of the measure.
//
// # Safety
// `measure` must be live and `out` valid.
enum SkewlabStatus skewlab_total_mass(const struct SkewlabMeasure *measure, double *out);

// `mu(B(z, r))`.
//
// # Safety
// All handles live, `z` of length `len`, `out` valid.
enum SkewlabStatus skewlab_ball_mass(const struct SkewlabDomain *domain,
                                     const struct SkewlabMeasure *measure,
                                     const double *z,
                                     size_t len,
                                     double r,
                                     double *out);

// Geometric quotient `mu(B(z,r)) / nu(B(z,r))^theta`.
//
// # Safety
// As for [`skewlab_ball_mass`].
enum SkewlabStatus skewlab_mu_hat(const struct SkewlabDomain *domain,
                                  const struct SkewlabMeasure *measure,
                                  const double *z,
                                  size_t len,
                                  double r,
                                  double theta,
                                  double *out);

// Classify the measure at `(lambda, gamma)`; writes the verdict and the
// fitted boundary exponent (NaN when no fit was possible).
//
// # Safety
// Handles live; out pointers valid.
enum SkewlabStatus skewlab_classify(const struct SkewlabDomain *domain,
                                    const struct SkewlabMeasure *measure,
                                    double lambda,
                                    double gamma,
                                    double r,
                                    double slope_tol,
                                    enum SkewlabVerdict *out_verdict,
                                    double *out_slope);

// Parameter map of the Toeplitz mapping problem. `out_gamma` and
// `out_theta` receive NaN when `lambda = 0`; the hypothesis flags are the
// per-index exponent conditions.
//
// # Safety
// Out pointers must be valid.
enum SkewlabStatus skewlab_derive_params(size_t n,
                                         double p1,
                                         double alpha1,
                                         double p2,
                                         double alpha2,
                                         double beta,
                                         double *out_lambda,
                                         double *out_gamma,
                                         double *out_theta,
                                         int *out_hypothesis_1,
                                         int *out_hypothesis_2);

// Run an experiment subcommand (`params`, `geometry`, `carleson`,
// `berezin`, `toeplitz`, `vanishing`, `verify`) against a JSON
// configuration and return the JSON report.
//
// # Safety
// `subcommand` and `config_json` must be NUL-terminated strings;
// `out_report` must be valid. The returned string is released with
// [`skewlab_string_free`].
enum SkewlabStatus skewlab_run_json(const char *subcommand,
                                    const char *config_json,
                                    char **out_report);

// # Safety
// `s` must have been returned by this library and not freed before.
void skewlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWLAB_H */
