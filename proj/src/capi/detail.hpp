#pragma once

// Internals shared by the C API translation units: the handle definitions and
// the error/status plumbing behind resched_last_error().

#include <string>
#include <vector>

#include "core/env.hpp"
#include "core/error.hpp"
#include "core/instance.hpp"
#include "core/nn.hpp"
#include "resched/resched.h"

struct resched_instance {
    resched::Instance inst;
};

struct resched_params {
    resched::PolicyParams params;
};

namespace capi {

// Stores the message for the calling thread and passes the code through.
resched_status_t fail(resched_status_t code, const std::string& message);

// malloc-backed copy for char** out parameters (freed by resched_string_free).
char* dup_string(const std::string& s);

resched_status_t export_schedule(const std::vector<resched::DispatchRecord>& records,
                                 long long makespan, long long* out_makespan,
                                 resched_dispatch_t** out_schedule, int* out_count);

// Runs fn, translating exceptions into status codes: malformed input data maps
// to DATA, rule violations to INVALID, everything else to USAGE.
template <typename Fn>
resched_status_t guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const resched::ParseError& e) {
        return fail(RESCHED_ERR_DATA, e.what());
    } catch (const resched::CheckpointError& e) {
        return fail(RESCHED_ERR_DATA, e.what());
    } catch (const resched::IllegalAction& e) {
        return fail(RESCHED_ERR_INVALID, e.what());
    } catch (const std::logic_error& e) {
        return fail(RESCHED_ERR_USAGE, e.what());
    } catch (const std::runtime_error& e) {
        return fail(RESCHED_ERR_DATA, e.what());
    } catch (const std::exception& e) {
        return fail(RESCHED_ERR_USAGE, e.what());
    }
}

}  // namespace capi
