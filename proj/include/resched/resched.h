#ifndef RESCHED_H
#define RESCHED_H

/* C interface to the residual scheduling engine: instance handling, PDR and
 * policy-network solving, schedule validation, training, and benchmarking.
 * All handles are opaque; every function that can fail returns a status code
 * and leaves a human-readable message in resched_last_error(). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum resched_status {
    RESCHED_OK = 0,
    RESCHED_ERR_USAGE = 1,   /* bad arguments to a call */
    RESCHED_ERR_DATA = 2,    /* parse or I/O failure */
    RESCHED_ERR_INVALID = 3, /* schedule/state violates the construction rules */
} resched_status_t;

/* Message for the most recent failure in the calling thread. Never NULL. */
const char* resched_last_error(void);

typedef struct resched_instance resched_instance_t;
typedef struct resched_params resched_params_t;

/* Instance formats: "taillard" | "orlib" | "fjsp". Kinds: "jsp" | "fjsp". */
resched_status_t resched_instance_parse(const char* text, const char* format,
                                        resched_instance_t** out);
resched_status_t resched_instance_load(const char* path, const char* format,
                                       resched_instance_t** out);
resched_status_t resched_instance_generate(int jobs, int machines, const char* kind,
                                           uint64_t seed, resched_instance_t** out);
/* Training distribution: jobs ~ U{3..max_jobs}, machines ~ U{3..jobs} clamped
 * to max_machines. */
resched_status_t resched_instance_generate_training(int max_jobs, int max_machines,
                                                    const char* kind, uint64_t seed,
                                                    resched_instance_t** out);
/* The published Taillard benchmark generator; seeds pin the instance exactly. */
resched_status_t resched_instance_generate_taillard(int jobs, int machines,
                                                    int32_t time_seed,
                                                    int32_t machine_seed,
                                                    resched_instance_t** out);
resched_status_t resched_instance_serialize(const resched_instance_t* instance,
                                            const char* format, char** out_text);
int resched_instance_jobs(const resched_instance_t* instance);
int resched_instance_machines(const resched_instance_t* instance);
int resched_instance_operations(const resched_instance_t* instance);
void resched_instance_free(resched_instance_t* instance);

/* Frees any char* returned through an out parameter. */
void resched_string_free(char* text);

/* Policy-network parameters. init draws a fresh random initialization. */
resched_status_t resched_params_init(uint64_t seed, resched_params_t** out);
resched_status_t resched_params_load(const char* path, resched_params_t** out);
resched_status_t resched_params_save(const resched_params_t* params, const char* path);
void resched_params_free(resched_params_t* params);

typedef struct resched_dispatch {
    int job;
    int op;
    int machine;
    long long start;
    long long end;
} resched_dispatch_t;

/* Solvers allocate *out_schedule (length *out_count); free it with
 * resched_schedule_free. Either out pointer may be NULL if not wanted.
 * policy: "pdr:mwkr" | "pdr:mor" | "pdr:spt" | "pdr:fifo" | "random". */
resched_status_t resched_solve(const resched_instance_t* instance, const char* policy,
                               uint64_t seed, long long* out_makespan,
                               resched_dispatch_t** out_schedule, int* out_count);
/* samples = 0: greedy argmax rollout; samples >= 1: that many softmax-sampled
 * rollouts, keeping the best schedule. */
resched_status_t resched_solve_model(const resched_instance_t* instance,
                                     const resched_params_t* params, int samples,
                                     uint64_t seed, long long* out_makespan,
                                     resched_dispatch_t** out_schedule, int* out_count);
void resched_schedule_free(resched_dispatch_t* schedule);

/* RESCHED_OK and *out_report = NULL when the schedule is valid; otherwise
 * RESCHED_ERR_INVALID with one violation per line. */
resched_status_t resched_validate(const resched_instance_t* instance,
                                  const resched_dispatch_t* schedule, int count,
                                  char** out_report);

/* (makespan - reference) / reference. Negative/zero reference is a usage error
 * reported as NaN. */
double resched_gap(double makespan, double reference);

/* Runs the REINFORCE training loop. config holds "key=value" lines with the
 * keys episodes, jobs, machines, kind, baseline, entropy_coef, lr, lr_decay,
 * lr_decay_every, beta1, beta2, adam_eps, seed, checkpoint_every, hidden,
 * threads; '#' starts a comment and unknown keys are rejected. Checkpoints
 * and the training log are written under out_dir. progress may be NULL. */
typedef void (*resched_progress_fn)(long long episode, long long makespan, void* user);
resched_status_t resched_train(const char* config, const char* out_dir,
                               resched_progress_fn progress, void* user);

/* Benchmark harness: runs each method over every *.txt instance file in dir
 * (sorted by name, layout auto-detected) and writes per-instance rows to
 * out_csv (optional). methods is comma-separated: "pdr:<rule>", "random",
 * "model:<checkpoint>". samples <= 1 solves model methods greedily; larger
 * values keep the best of that many sampled rollouts. ref_csv
 * ("benchmark,instance,makespan") may be NULL: gaps become NaN. out_summary
 * (optional) receives the per-size-class average table plus any warnings. */
resched_status_t resched_bench(const char* dir, const char* methods, const char* ref_csv,
                               const char* out_csv, int samples, int threads,
                               uint64_t seed, char** out_summary);

#ifdef __cplusplus
}
#endif

#endif /* RESCHED_H */
