/* SPDX-License-Identifier: Apache-2.0 */

#ifndef FLOORPLAN_H
#define FLOORPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FpMode {
  FP_MODE_CASA = 0,
  FP_MODE_CLASSICAL = 1,
} FpMode;

/**
 * Result code of every fallible call.
 */
typedef enum FpStatus {
  FP_STATUS_OK = 0,
  FP_STATUS_NULL_ARGUMENT = 1,
  FP_STATUS_INVALID_UTF8 = 2,
  FP_STATUS_IO = 3,
  FP_STATUS_PARSE = 4,
  FP_STATUS_INVALID_PROBLEM = 5,
  FP_STATUS_CONFLICT = 6,
  FP_STATUS_DOMAIN = 7,
  FP_STATUS_OUT_OF_RANGE = 8,
  FP_STATUS_WORKER_FAILED = 9,
  FP_STATUS_PANIC = 10,
} FpStatus;

/**
 * Opaque benchmark with its constraints.
 */
typedef struct FpProblem FpProblem;

/**
 * Opaque result of one annealing run.
 */
typedef struct FpSolution FpSolution;

/**
 * Opaque pool result; slots of failed workers hold no solution.
 */
typedef struct FpSolutionList FpSolutionList;

typedef struct FpWeights {
  double alpha;
  double beta;
  double gamma;
  double eta;
  double zeta;
  double theta;
  double mu;
} FpWeights;

typedef struct FpAnnealConfig {
  uint64_t steps;
  enum FpMode mode;
  struct FpWeights weights;
  double fixing_move_prob;
  double ar_move_prob;
  double swap_vs_move_prob;
  double left_vs_right_prob;
  double cooling_ratio;
  uint64_t moves_per_temperature;
  double initial_acceptance_target;
  bool hard_blocks;
} FpAnnealConfig;

typedef struct FpCostReport {
  double hpwl;
  double bbox_area;
  double outline_cost;
  double grouping_cost;
  size_t boundary_violation_count;
  size_t grouping_violation_count;
  double preplaced_deviation;
  double overlap_area;
  bool outline_respected;
  double total;
  bool legal;
} FpCostReport;

typedef struct FpRect {
  double x;
  double y;
  double w;
  double h;
} FpRect;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Valid until the next failing call.
 */
const char *fp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fp_version(void);

struct FpAnnealConfig fp_anneal_config_default(void);

/**
 * Loads a Bookshelf benchmark.
 */
enum FpStatus fp_problem_load(const char *blocks,
                              const char *nets,
                              const char *pl,
                              struct FpProblem **out);

void fp_problem_free(struct FpProblem *problem);

/**
 * Applies a constraints file. Its outline, when present, replaces the current one.
 */
enum FpStatus fp_problem_load_constraints(struct FpProblem *problem, const char *path);

enum FpStatus fp_problem_set_outline(struct FpProblem *problem, double w, double h);

/**
 * Square outline with 10% whitespace over the total block area.
 */
enum FpStatus fp_problem_auto_outline(struct FpProblem *problem);

/**
 * Makes every block soft within `[ar_min, ar_max]`.
 */
enum FpStatus fp_problem_set_soft(struct FpProblem *problem, double ar_min, double ar_max);

/**
 * Number of blocks, or 0 for a null handle.
 */
size_t fp_problem_block_count(const struct FpProblem *problem);

/**
 * Checks the problem; on failure the message lists every issue.
 */
enum FpStatus fp_problem_validate(const struct FpProblem *problem);

/**
 * Writes a seeded constraints file for the problem. Needs an outline.
 */
enum FpStatus fp_problem_augment(const struct FpProblem *problem, uint64_t seed, const char *path);

/**
 * Runs one annealing search.
 */
enum FpStatus fp_solve(const struct FpProblem *problem,
                       const struct FpAnnealConfig *config,
                       uint64_t seed,
                       struct FpSolution **out);

/**
 * Runs `n_workers` searches in parallel with seeds `base_seed + i`.
 */
enum FpStatus fp_solve_pool(const struct FpProblem *problem,
                            const struct FpAnnealConfig *config,
                            size_t n_workers,
                            uint64_t base_seed,
                            struct FpSolutionList **out);

void fp_solution_free(struct FpSolution *solution);

uint64_t fp_solution_seed(const struct FpSolution *solution);

enum FpStatus fp_solution_report(const struct FpSolution *solution, struct FpCostReport *out);

enum FpStatus fp_solution_placement(const struct FpSolution *solution,
                                    size_t block,
                                    struct FpRect *out);

/**
 * Writes the solution as SVG using the problem's names and constraints.
 */
enum FpStatus fp_solution_render_svg(const struct FpProblem *problem,
                                     const struct FpSolution *solution,
                                     const char *path);

void fp_solution_list_free(struct FpSolutionList *list);

/**
 * Number of worker slots, or 0 for a null handle.
 */
size_t fp_solution_list_len(const struct FpSolutionList *list);

/**
 * Copies slot `index` into a new solution handle. A failed worker yields
 * `FpWorkerFailed` with its message.
 */
enum FpStatus fp_solution_list_get(const struct FpSolutionList *list,
                                   size_t index,
                                   struct FpSolution **out);

/**
 * Writes the successful slots as newline-delimited JSON records.
 */
enum FpStatus fp_solution_list_write(const struct FpSolutionList *list, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOORPLAN_H */
