#ifndef APF_DDPG_H
#define APF_DDPG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApfStatus {
  APF_STATUS_OK = 0,
  APF_STATUS_NULL_POINTER = 1,
  APF_STATUS_INVALID_ARGUMENT = 2,
  APF_STATUS_IO = 3,
  APF_STATUS_PARSE = 4,
  APF_STATUS_NON_FINITE = 5,
  APF_STATUS_EPISODE_OVER = 6,
  APF_STATUS_PANIC = 7,
} ApfStatus;

typedef enum ApfTerminal {
  APF_TERMINAL_NONE = 0,
  APF_TERMINAL_GOAL = 1,
  APF_TERMINAL_COLLISION = 2,
  APF_TERMINAL_TIMEOUT = 3,
} ApfTerminal;

/**
 * Opaque reaching environment.
 */
typedef struct ApfEnv ApfEnv;

/**
 * Opaque dense network (an actor, critic or potential network).
 */
typedef struct ApfNet ApfNet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *apf_last_error(void);

/**
 * Creates an environment from a JSON experiment config (NULL for defaults).
 *
 * # Safety
 * `config_json` must be NULL or a NUL-terminated string; `out` must be a
 * valid pointer to write the handle to.
 */
enum ApfStatus apf_env_new(const char *config_json, struct ApfEnv **out);

/**
 * # Safety
 * `env` must be NULL or a handle from [`apf_env_new`] not yet freed.
 */
void apf_env_free(struct ApfEnv *env);

/**
 * Resets to the fixed start pose and writes the 6-double state.
 *
 * # Safety
 * `env` must be a live handle; `out_state` must point to 6 writable doubles.
 */
enum ApfStatus apf_env_reset(struct ApfEnv *env, double *out_state);

/**
 * Applies one action (3 doubles, clamped to ±pi/16) and reports the next
 * state, the environment reward and the terminal tag.
 *
 * # Safety
 * `env` must be a live handle; `action` must point to 3 readable doubles;
 * `out_state` to 6 writable doubles; `out_reward` and `out_terminal` must be
 * writable.
 */
enum ApfStatus apf_env_step(struct ApfEnv *env,
                            const double *action,
                            double *out_state,
                            double *out_reward,
                            enum ApfTerminal *out_terminal);

/**
 * Banded reward for a tip-to-goal distance; a collision costs `max_steps`.
 */
double apf_env_reward(double distance, bool collided, size_t max_steps);

/**
 * Writes the integer grid cell of a tip position (3 doubles).
 *
 * # Safety
 * `tip` must point to 3 readable doubles and `out_cell` to 3 writable ints.
 */
enum ApfStatus apf_map_state(const double *tip, double cell_size, int32_t *out_cell);

/**
 * `(n_good - n_bad) / (n_good + n_bad)`; fails when both are zero.
 *
 * # Safety
 * `out` must be writable.
 */
enum ApfStatus apf_target(uint32_t n_good, uint32_t n_bad, double *out);

/**
 * Loads a network saved by the trainer.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ApfStatus apf_net_load(const char *path, struct ApfNet **out);

/**
 * # Safety
 * `net` must be NULL or a handle from [`apf_net_load`] not yet freed.
 */
void apf_net_free(struct ApfNet *net);

/**
 * # Safety
 * `net` must be a live handle.
 */
size_t apf_net_input_size(const struct ApfNet *net);

/**
 * # Safety
 * `net` must be a live handle.
 */
size_t apf_net_output_size(const struct ApfNet *net);

/**
 * Evaluates the network on one input vector.
 *
 * # Safety
 * `input` must point to `input_len` readable doubles and `output` to
 * `output_len` writable doubles.
 */
enum ApfStatus apf_net_forward(const struct ApfNet *net,
                               const double *input,
                               size_t input_len,
                               double *output,
                               size_t output_len);

/**
 * Shaping reward `gamma * phi(Z(s')) - phi(Z(s))` from a potential network
 * (`discounted = false` drops the `gamma`).
 *
 * # Safety
 * `net` must be a live handle with 3 inputs and 1 output; `state` and
 * `next_state` must point to 6 readable doubles; `out` must be writable.
 */
enum ApfStatus apf_shaping_reward(const struct ApfNet *net,
                                  const double *state,
                                  const double *next_state,
                                  double gamma,
                                  bool discounted,
                                  double cell_size,
                                  double *out);

/**
 * Runs a full experiment described by a JSON config (NULL for defaults).
 * If `out_dir` is non-NULL it overrides the config's output directory.
 * The episode CSV and saved networks are written there.
 *
 * # Safety
 * `config_json` and `out_dir` must each be NULL or NUL-terminated strings.
 */
enum ApfStatus apf_run_experiment(const char *config_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APF_DDPG_H */
