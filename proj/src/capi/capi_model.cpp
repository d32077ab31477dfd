#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "capi/detail.hpp"
#include "core/eval.hpp"
#include "core/train.hpp"
#include "resched/resched.h"

using namespace resched;
using capi::dup_string;
using capi::fail;
using capi::guarded;

namespace {

std::string trim(const std::string& s) {
    std::size_t lo = 0, hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

bool to_ll(const std::string& s, long long& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

bool to_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

bool set_train_key(TrainConfig& cfg, const std::string& key, const std::string& value,
                   std::string& err) {
    long long ll = 0;
    double d = 0.0;
    const auto want_ll = [&](long long& slot) {
        if (!to_ll(value, ll)) {
            err = "key '" + key + "' needs an integer, got '" + value + "'";
            return false;
        }
        slot = ll;
        return true;
    };
    const auto want_int = [&](int& slot) {
        if (!to_ll(value, ll)) {
            err = "key '" + key + "' needs an integer, got '" + value + "'";
            return false;
        }
        slot = int(ll);
        return true;
    };
    const auto want_double = [&](double& slot) {
        if (!to_double(value, d)) {
            err = "key '" + key + "' needs a number, got '" + value + "'";
            return false;
        }
        slot = d;
        return true;
    };

    if (key == "episodes") return want_ll(cfg.episodes);
    if (key == "jobs") return want_int(cfg.max_jobs);
    if (key == "machines") return want_int(cfg.max_machines);
    if (key == "kind") {
        if (value == "jsp") cfg.kind = InstanceKind::JSP;
        else if (value == "fjsp") cfg.kind = InstanceKind::FJSP;
        else {
            err = "kind must be 'jsp' or 'fjsp', got '" + value + "'";
            return false;
        }
        return true;
    }
    if (key == "baseline") {
        if (!rule_from_name(value, cfg.baseline)) {
            err = "unknown baseline rule '" + value + "'";
            return false;
        }
        return true;
    }
    if (key == "entropy_coef") return want_double(cfg.entropy_coef);
    if (key == "lr") return want_double(cfg.lr);
    if (key == "lr_decay") return want_double(cfg.lr_decay);
    if (key == "lr_decay_every") return want_ll(cfg.lr_decay_every);
    if (key == "beta1") return want_double(cfg.beta1);
    if (key == "beta2") return want_double(cfg.beta2);
    if (key == "adam_eps") return want_double(cfg.adam_eps);
    if (key == "seed") {
        if (!to_ll(value, ll)) {
            err = "key 'seed' needs an integer, got '" + value + "'";
            return false;
        }
        cfg.seed = std::uint64_t(ll);
        return true;
    }
    if (key == "checkpoint_every") return want_ll(cfg.checkpoint_every);
    if (key == "hidden") return want_int(cfg.hidden);
    if (key == "threads") return want_int(cfg.threads);
    err = "unknown config key '" + key + "'";
    return false;
}

bool parse_train_config(const std::string& text, TrainConfig& cfg, std::string& err) {
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            err = "config line " + std::to_string(line_no) + ": expected key=value";
            return false;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            err = "config line " + std::to_string(line_no) + ": expected key=value";
            return false;
        }
        if (!set_train_key(cfg, key, value, err)) {
            err = "config line " + std::to_string(line_no) + ": " + err;
            return false;
        }
    }
    return true;
}

}  // namespace

extern "C" {

resched_status_t resched_params_init(uint64_t seed, resched_params_t** out) {
    if (out == nullptr) return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        Rng rng(seed);
        *out = new resched_params{init_params(rng)};
        return RESCHED_OK;
    });
}

resched_status_t resched_params_load(const char* path, resched_params_t** out) {
    if (path == nullptr || out == nullptr) return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        *out = new resched_params{load_checkpoint(path)};
        return RESCHED_OK;
    });
}

resched_status_t resched_params_save(const resched_params_t* params, const char* path) {
    if (params == nullptr || path == nullptr) return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        save_checkpoint(params->params, path);
        return RESCHED_OK;
    });
}

void resched_params_free(resched_params_t* params) { delete params; }

resched_status_t resched_solve_model(const resched_instance_t* instance,
                                     const resched_params_t* params, int samples,
                                     uint64_t seed, long long* out_makespan,
                                     resched_dispatch_t** out_schedule, int* out_count) {
    if (instance == nullptr || params == nullptr)
        return fail(RESCHED_ERR_USAGE, "null argument");
    if (samples < 0) return fail(RESCHED_ERR_USAGE, "samples must be >= 0");
    return guarded([&] {
        const SolveResult r =
            samples == 0 ? solve_greedy(params->params, instance->inst)
                         : solve_sample_k(params->params, instance->inst, samples, seed);
        return capi::export_schedule(r.schedule, r.makespan, out_makespan, out_schedule,
                                     out_count);
    });
}

resched_status_t resched_train(const char* config, const char* out_dir,
                               resched_progress_fn progress, void* user) {
    if (out_dir == nullptr) return fail(RESCHED_ERR_USAGE, "null out_dir");
    return guarded([&] {
        TrainConfig cfg;
        std::string err;
        if (config != nullptr && !parse_train_config(config, cfg, err))
            return fail(RESCHED_ERR_USAGE, err);
        cfg.out_dir = out_dir;
        TrainCallback cb;
        if (progress != nullptr)
            cb = [progress, user](long long episode, Time makespan, double, double, double) {
                progress(episode, static_cast<long long>(makespan), user);
                return true;
            };
        train(cfg, cb);
        return RESCHED_OK;
    });
}

resched_status_t resched_bench(const char* dir, const char* methods, const char* ref_csv,
                               const char* out_csv, int samples, int threads,
                               uint64_t seed, char** out_summary) {
    if (dir == nullptr || methods == nullptr) return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        std::vector<PolicySpec> specs;
        std::istringstream list(methods);
        std::string token;
        while (std::getline(list, token, ',')) {
            token = trim(token);
            PolicySpec spec;
            if (token.empty() || !policy_from_name(token, spec))
                return fail(RESCHED_ERR_USAGE, "unknown method '" + token + "'");
            specs.push_back(std::move(spec));
        }
        if (specs.empty()) return fail(RESCHED_ERR_USAGE, "no methods given");

        ReferenceTable refs;
        if (ref_csv != nullptr) refs = ReferenceTable::load_csv(ref_csv);

        const BenchReport report = bench(dir, specs, refs, seed, std::max(threads, 1),
                                         std::max(samples, 1));

        if (out_csv != nullptr) {
            std::ofstream out(out_csv, std::ios::trunc);
            if (!out) return fail(RESCHED_ERR_DATA, std::string("cannot write ") + out_csv);
            out << report.to_csv();
        }
        if (out_summary != nullptr) {
            std::string text = "benchmark,n,m,method,mean_gap,count\n";
            char buf[160];
            for (const auto& avg : report.averages) {
                std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%.6f,%d\n",
                              avg.benchmark.c_str(), avg.n, avg.m, avg.method.c_str(),
                              avg.mean_gap, avg.count);
                text += buf;
            }
            for (const auto& w : report.warnings) text += "warning: " + w + "\n";
            *out_summary = dup_string(text);
        }
        if (!report.all_valid)
            return fail(RESCHED_ERR_INVALID, "a produced schedule failed validation");
        return RESCHED_OK;
    });
}

}  // extern "C"
