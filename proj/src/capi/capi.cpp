#include "resched/resched.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "capi/detail.hpp"
#include "core/pdr.hpp"
#include "core/rng.hpp"

using namespace resched;
using capi::dup_string;
using capi::fail;
using capi::guarded;

namespace {

thread_local std::string g_last_error = "no error";

}  // namespace

namespace capi {

resched_status_t fail(resched_status_t code, const std::string& message) {
    g_last_error = message;
    return code;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

resched_status_t export_schedule(const std::vector<DispatchRecord>& records,
                                 long long makespan, long long* out_makespan,
                                 resched_dispatch_t** out_schedule, int* out_count) {
    if (out_makespan != nullptr) *out_makespan = makespan;
    if (out_schedule != nullptr) {
        auto* sched = static_cast<resched_dispatch_t*>(
            std::malloc(sizeof(resched_dispatch_t) * std::max<std::size_t>(records.size(), 1)));
        for (std::size_t i = 0; i < records.size(); ++i)
            sched[i] = {records[i].job_id, records[i].op_index, records[i].machine_id,
                        records[i].start, records[i].end};
        *out_schedule = sched;
    }
    if (out_count != nullptr) *out_count = int(records.size());
    return RESCHED_OK;
}

}  // namespace capi

extern "C" {

const char* resched_last_error(void) { return g_last_error.c_str(); }

resched_status_t resched_instance_parse(const char* text, const char* format,
                                        resched_instance_t** out) {
    if (text == nullptr || format == nullptr || out == nullptr)
        return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        FileFormat f;
        if (!format_from_name(format, f))
            return fail(RESCHED_ERR_USAGE, std::string("unknown format '") + format + "'");
        *out = new resched_instance{parse(text, f)};
        return RESCHED_OK;
    });
}

resched_status_t resched_instance_load(const char* path, const char* format,
                                       resched_instance_t** out) {
    if (path == nullptr || format == nullptr || out == nullptr)
        return fail(RESCHED_ERR_USAGE, "null argument");
    std::ifstream in(path);
    if (!in) return fail(RESCHED_ERR_DATA, std::string("cannot open '") + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return resched_instance_parse(buf.str().c_str(), format, out);
}

resched_status_t resched_instance_generate(int jobs, int machines, const char* kind,
                                           uint64_t seed, resched_instance_t** out) {
    if (kind == nullptr || out == nullptr) return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        const std::string k = kind;
        if (k != "jsp" && k != "fjsp")
            return fail(RESCHED_ERR_USAGE, "kind must be 'jsp' or 'fjsp'");
        Rng rng(seed);
        *out = new resched_instance{k == "jsp" ? generate_jsp(jobs, machines, rng)
                                               : generate_fjsp(jobs, machines, rng)};
        return RESCHED_OK;
    });
}

resched_status_t resched_instance_generate_training(int max_jobs, int max_machines,
                                                    const char* kind, uint64_t seed,
                                                    resched_instance_t** out) {
    if (kind == nullptr || out == nullptr) return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        const std::string k = kind;
        if (k != "jsp" && k != "fjsp")
            return fail(RESCHED_ERR_USAGE, "kind must be 'jsp' or 'fjsp'");
        Rng rng(seed);
        *out = new resched_instance{generate_training_instance(
            max_jobs, max_machines,
            k == "jsp" ? InstanceKind::JSP : InstanceKind::FJSP, rng)};
        return RESCHED_OK;
    });
}

resched_status_t resched_instance_generate_taillard(int jobs, int machines,
                                                    int32_t time_seed,
                                                    int32_t machine_seed,
                                                    resched_instance_t** out) {
    if (out == nullptr) return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        *out = new resched_instance{
            generate_taillard_jsp(jobs, machines, time_seed, machine_seed)};
        return RESCHED_OK;
    });
}

resched_status_t resched_instance_serialize(const resched_instance_t* instance,
                                            const char* format, char** out_text) {
    if (instance == nullptr || format == nullptr || out_text == nullptr)
        return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        FileFormat f;
        if (!format_from_name(format, f))
            return fail(RESCHED_ERR_USAGE, std::string("unknown format '") + format + "'");
        *out_text = dup_string(serialize(instance->inst, f));
        return RESCHED_OK;
    });
}

int resched_instance_jobs(const resched_instance_t* instance) {
    return instance ? instance->inst.n_jobs : 0;
}

int resched_instance_machines(const resched_instance_t* instance) {
    return instance ? instance->inst.n_machines : 0;
}

int resched_instance_operations(const resched_instance_t* instance) {
    return instance ? instance->inst.total_ops() : 0;
}

void resched_instance_free(resched_instance_t* instance) { delete instance; }

void resched_string_free(char* text) { std::free(text); }

void resched_schedule_free(resched_dispatch_t* schedule) { std::free(schedule); }

resched_status_t resched_solve(const resched_instance_t* instance, const char* policy,
                               uint64_t seed, long long* out_makespan,
                               resched_dispatch_t** out_schedule, int* out_count) {
    if (instance == nullptr || policy == nullptr)
        return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        const std::string spec = policy;
        ConstructionState state(instance->inst);
        if (spec.rfind("pdr:", 0) == 0) {
            Rule rule;
            if (!rule_from_name(spec.substr(4), rule))
                return fail(RESCHED_ERR_USAGE, "unknown rule in '" + spec + "'");
            while (!state.terminal()) state.step(select(state, rule));
        } else if (spec == "random") {
            Rng rng(seed);
            while (!state.terminal()) {
                const auto cands = state.candidates();
                state.step(cands[std::size_t(rng.uniform_int(0, int(cands.size()) - 1))]);
            }
        } else {
            return fail(RESCHED_ERR_USAGE, "unknown policy '" + spec + "'");
        }
        return capi::export_schedule(state.records(), state.makespan(), out_makespan,
                                     out_schedule, out_count);
    });
}

resched_status_t resched_validate(const resched_instance_t* instance,
                                  const resched_dispatch_t* schedule, int count,
                                  char** out_report) {
    if (instance == nullptr || (schedule == nullptr && count > 0))
        return fail(RESCHED_ERR_USAGE, "null argument");
    return guarded([&] {
        std::vector<DispatchRecord> records;
        records.reserve(std::size_t(count));
        for (int i = 0; i < count; ++i)
            records.push_back({schedule[i].job, schedule[i].op, schedule[i].machine,
                               schedule[i].start, schedule[i].end});
        const auto violations = validate(records, instance->inst);
        if (violations.empty()) {
            if (out_report != nullptr) *out_report = nullptr;
            return RESCHED_OK;
        }
        std::ostringstream report;
        for (const auto& v : violations) report << v.to_string() << '\n';
        if (out_report != nullptr) *out_report = dup_string(report.str());
        return fail(RESCHED_ERR_INVALID,
                    "schedule has " + std::to_string(violations.size()) + " violation(s)");
    });
}

double resched_gap(double makespan, double reference) {
    if (!(reference > 0.0)) {
        fail(RESCHED_ERR_USAGE, "reference makespan must be positive");
        return std::nan("");
    }
    return (makespan - reference) / reference;
}

/* The policy-network entry points are wired up together with the neural and
 * training modules further down the source tree; see capi_model.cpp. */

}  // extern "C"
