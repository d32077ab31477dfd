#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/nn.hpp"
#include "core/pdr.hpp"

namespace resched {

struct TrainConfig {
    long long episodes = 1'000'000;
    int max_jobs = 10;      // N of the training distribution
    int max_machines = 10;  // M
    InstanceKind kind = InstanceKind::JSP;
    Rule baseline = Rule::MWKR;
    double entropy_coef = 1e-2;
    double lr = 1e-4;
    double lr_decay = 0.99;
    long long lr_decay_every = 1000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    long long checkpoint_every = 1000;
    int hidden = 256;
    int threads = 1;      // rollout/replay workers; any count gives identical results
    std::string out_dir;  // receives train_log.csv and checkpoint files
};

// One decision point of a sampled episode: the state as it stood before the
// action, plus what the policy did there. Snapshots reference the instance the
// episode ran on, which must stay alive as long as the trace is used.
struct EpisodeStep {
    ConstructionState before;
    int action = 0;
    double logprob = 0.0;
    double entropy = 0.0;
};

struct EpisodeTrace {
    std::vector<EpisodeStep> steps;
    ConstructionState terminal;
    Time makespan = 0;
};

struct AdamState {
    PolicyParams m, v;  // first/second moments, shaped like the parameters
    long long steps = 0;
};

AdamState make_adam(const PolicyParams& params);

// alpha * decay^floor(episode / every); episodes count from 0.
double lr_at(long long episode, const TrainConfig& config);

// Samples one construction episode from the softmax policy.
EpisodeTrace run_episode(const PolicyParams& params, const Instance& instance, Rng& rng);

// (T_b - T_pi) / T_b for step t: T_pi is the trace's own continuation measured
// from the step's clock; T_b is the baseline-rule continuation after
// committing the step's action, measured from the same clock. Zero when the
// baseline continuation is empty.
double normalized_advantage(const EpisodeTrace& trace, std::size_t t, Rule baseline);

// All steps' advantages; rollouts may fan out over `threads` workers (the
// rules are deterministic, so the thread count never changes the values).
std::vector<double> episode_advantages(const EpisodeTrace& trace, Rule baseline, int threads);

struct UpdateStats {
    double mean_advantage = 0.0;
    double mean_entropy = 0.0;
    bool applied = true;  // false when a non-finite gradient skipped the step
};

// Replays every step of the trace through the network, accumulates the exact
// gradient of sum_t [A_t * log pi(a_t) + c * H_t], and applies one Adam ascent
// step at lr_at(episode). A non-finite gradient skips the step and leaves both
// parameters and optimizer state untouched.
UpdateStats update(PolicyParams& params, AdamState& adam, const EpisodeTrace& trace,
                   const TrainConfig& config, long long episode);

// Called once per episode; return false to stop early.
using TrainCallback =
    std::function<bool(long long episode, Time makespan, double mean_advantage, double entropy,
                       double lr)>;

struct TrainResult {
    long long episodes_run = 0;
    long long skipped_updates = 0;
    std::string log_path;
    std::vector<std::string> checkpoint_paths;
};

// The REINFORCE loop: generate instance, sample episode, update; appends one
// CSV row per episode to <out_dir>/train_log.csv and saves a checkpoint every
// checkpoint_every episodes (write-then-rename, so an interrupt never leaves a
// torn file). Bit-reproducible for a fixed seed.
TrainResult train(const TrainConfig& config, const TrainCallback& callback = {});

// Index of the checkpoint with the lowest mean greedy makespan over the
// validation set; ties keep the earliest. Throws on empty inputs.
std::size_t select_checkpoint(const std::vector<PolicyParams>& checkpoints,
                              const std::vector<Instance>& validation);

}  // namespace resched
