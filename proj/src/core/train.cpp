#include "core/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <thread>

#include "core/eval.hpp"
#include "core/graph.hpp"

namespace resched {

AdamState make_adam(const PolicyParams& params) {
    AdamState a;
    a.m = make_params(params.hidden, int(params.layers.size()));
    a.v = make_params(params.hidden, int(params.layers.size()));
    return a;
}

double lr_at(long long episode, const TrainConfig& config) {
    return config.lr * std::pow(config.lr_decay, double(episode / config.lr_decay_every));
}

namespace {

double entropy_of(const Eigen::VectorXd& probs) {
    double h = 0.0;
    for (long i = 0; i < probs.size(); ++i)
        if (probs(i) > 0.0) h -= probs(i) * std::log(probs(i));
    return h;
}

}  // namespace

EpisodeTrace run_episode(const PolicyParams& params, const Instance& instance, Rng& rng) {
    auto s = ConstructionState::reset(instance);
    EpisodeTrace trace{{}, s, 0};
    while (!s.terminal()) {
        auto fw = policy(encode(s), params);
        const std::size_t a = rng.categorical(
            std::span<const double>(fw.probs.data(), std::size_t(fw.probs.size())));
        trace.steps.push_back(
            {s, int(a), std::log(fw.probs(long(a))), entropy_of(fw.probs)});
        s.step(s.candidates()[a]);
    }
    trace.terminal = s;
    trace.makespan = s.makespan();
    return trace;
}

double normalized_advantage(const EpisodeTrace& trace, std::size_t t, Rule baseline) {
    const EpisodeStep& step = trace.steps.at(t);
    const Time tau = step.before.clock();
    const Time t_pi = residual_makespan(step.before, trace.terminal);

    // Baseline continuation: commit the step's action, then hand over to the
    // rule. rollout() rebases to the post-action clock, so shift back to tau.
    ConstructionState after = step.before;
    after.step(step.before.candidates()[std::size_t(step.action)]);
    const Time t_b = rollout(after, baseline) + (after.clock() - tau);

    if (t_b == 0) return 0.0;
    return double(t_b - t_pi) / double(t_b);
}

std::vector<double> episode_advantages(const EpisodeTrace& trace, Rule baseline, int threads) {
    std::vector<double> adv(trace.steps.size());
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) adv[t] = normalized_advantage(trace, t, baseline);
    };
    const int workers = std::max(1, std::min<int>(threads, int(trace.steps.size())));
    if (workers <= 1) {
        run_range(0, trace.steps.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk =
            (trace.steps.size() + std::size_t(workers) - 1) / std::size_t(workers);
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = std::size_t(w) * chunk;
            const std::size_t hi = std::min(trace.steps.size(), lo + chunk);
            pool.emplace_back([&run_range, lo, hi] { run_range(lo, hi); });
        }
        for (auto& t : pool) t.join();
    }
    return adv;
}

UpdateStats update(PolicyParams& params, AdamState& adam, const EpisodeTrace& trace,
                   const TrainConfig& config, long long episode) {
    UpdateStats stats;
    if (trace.steps.empty()) return stats;

    const std::vector<double> adv = episode_advantages(trace, config.baseline, config.threads);
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        stats.mean_advantage += adv[t];
        stats.mean_entropy += trace.steps[t].entropy;
    }
    stats.mean_advantage /= double(trace.steps.size());
    stats.mean_entropy /= double(trace.steps.size());

    // Replay each step: a fresh forward pass is cheaper to hold than a full
    // episode of cached activations, and the parameters have not moved since
    // the episode was sampled, so the replayed distributions are identical.
    // Per-step gradients accumulate into a fixed number of blocks that are
    // reduced in block order, so the sum never depends on the thread count.
    const std::size_t n_steps = trace.steps.size();
    const int blocks = int(std::min<std::size_t>(8, n_steps));
    const std::size_t chunk = (n_steps + std::size_t(blocks) - 1) / std::size_t(blocks);
    std::vector<PolicyGrads> partial;
    partial.reserve(std::size_t(blocks));
    for (int b = 0; b < blocks; ++b)
        partial.push_back(make_params(params.hidden, int(params.layers.size())));
    auto run_block = [&](int b) {
        const std::size_t lo = std::size_t(b) * chunk;
        const std::size_t hi = std::min(n_steps, lo + chunk);
        for (std::size_t t = lo; t < hi; ++t) {
            auto fw = policy(encode(trace.steps[t].before), params);
            backward(params, fw, trace.steps[t].action, adv[t], config.entropy_coef,
                     partial[std::size_t(b)]);
        }
    };
    const int workers = std::max(1, std::min(config.threads, blocks));
    if (workers <= 1) {
        for (int b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&run_block, w, workers, blocks] {
                for (int b = w; b < blocks; b += workers) run_block(b);
            });
        for (auto& th : pool) th.join();
    }
    PolicyGrads grads = make_params(params.hidden, int(params.layers.size()));
    for (int b = 0; b < blocks; ++b) add_scaled(grads, partial[std::size_t(b)], 1.0);

    bool finite = true;
    for_each_param(grads, [&](const std::string&, double* d, long rows, long cols) {
        for (long i = 0; i < rows * cols && finite; ++i)
            if (!std::isfinite(d[i])) finite = false;
    });
    if (!finite) {
        stats.applied = false;
        return stats;
    }

    // One Adam ascent step on the whole-episode gradient.
    adam.steps += 1;
    const double lr = lr_at(episode, config);
    const double bc1 = 1.0 - std::pow(config.beta1, double(adam.steps));
    const double bc2 = 1.0 - std::pow(config.beta2, double(adam.steps));
    std::vector<std::pair<double*, long>> ps, gs, ms, vs;
    auto slots = [](PolicyParams& p, std::vector<std::pair<double*, long>>& out) {
        for_each_param(p, [&](const std::string&, double* d, long rows, long cols) {
            out.emplace_back(d, rows * cols);
        });
    };
    slots(params, ps);
    slots(grads, gs);
    slots(adam.m, ms);
    slots(adam.v, vs);
    for (std::size_t b = 0; b < ps.size(); ++b) {
        double* p = ps[b].first;
        double* g = gs[b].first;
        double* m = ms[b].first;
        double* v = vs[b].first;
        for (long i = 0; i < ps[b].second; ++i) {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            p[i] += lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config.adam_eps);
        }
    }
    return stats;
}

namespace {

void save_checkpoint_atomic(const PolicyParams& params, const std::string& path) {
    const std::string tmp = path + ".tmp";
    save_checkpoint(params, tmp);
    std::filesystem::rename(tmp, path);
}

}  // namespace

TrainResult train(const TrainConfig& config, const TrainCallback& callback) {
    if (config.episodes < 1) throw std::invalid_argument("train: episodes must be >= 1");
    if (!(config.lr > 0.0 && config.lr < 1.0))
        throw std::invalid_argument("train: lr must be in (0, 1)");
    if (config.entropy_coef < 0.0) throw std::invalid_argument("train: entropy_coef < 0");
    if (config.out_dir.empty()) throw std::invalid_argument("train: out_dir required");

    std::filesystem::create_directories(config.out_dir);
    TrainResult result;
    result.log_path = config.out_dir + "/train_log.csv";
    std::ofstream log(result.log_path, std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write " + result.log_path);
    log << "episode,makespan,mean_advantage,entropy,lr\n";

    Rng rng(config.seed);
    PolicyParams params = init_params(rng, config.hidden);
    AdamState adam = make_adam(params);

    char buf[160];
    for (long long ep = 0; ep < config.episodes; ++ep) {
        Instance inst =
            generate_training_instance(config.max_jobs, config.max_machines, config.kind, rng);
        EpisodeTrace trace = run_episode(params, inst, rng);
        UpdateStats stats = update(params, adam, trace, config, ep);
        if (!stats.applied) {
            ++result.skipped_updates;
            std::cerr << "episode " << ep << ": non-finite gradient, update skipped\n";
        }

        const double lr = lr_at(ep, config);
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.9f,%.9f,%.9g\n", ep,
                      (long long)trace.makespan, stats.mean_advantage, stats.mean_entropy, lr);
        log << buf;
        result.episodes_run = ep + 1;

        if ((ep + 1) % config.checkpoint_every == 0 || ep + 1 == config.episodes) {
            std::snprintf(buf, sizeof buf, "%s/checkpoint_%09lld.bin", config.out_dir.c_str(),
                          ep + 1);
            save_checkpoint_atomic(params, buf);
            if (result.checkpoint_paths.empty() || result.checkpoint_paths.back() != buf)
                result.checkpoint_paths.push_back(buf);
        }
        if (callback && !callback(ep, trace.makespan, stats.mean_advantage, stats.mean_entropy,
                                  lr))
            break;
    }
    return result;
}

std::size_t select_checkpoint(const std::vector<PolicyParams>& checkpoints,
                              const std::vector<Instance>& validation) {
    if (checkpoints.empty() || validation.empty())
        throw std::invalid_argument("select_checkpoint: empty input");
    std::size_t best = 0;
    double best_mean = 0.0;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        double mean = 0.0;
        for (const auto& inst : validation)
            mean += double(solve_greedy(checkpoints[c], inst).makespan);
        mean /= double(validation.size());
        if (c == 0 || mean < best_mean) {
            best = c;
            best_mean = mean;
        }
    }
    return best;
}

}  // namespace resched
