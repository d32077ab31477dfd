#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace resched {

using Time = long long;

// One way an operation can be processed: a machine and how long it takes there.
struct ProcessingOption {
    int machine_id = 0;  // 0-based
    int duration = 0;    // integer time units, >= 1

    bool operator==(const ProcessingOption&) const = default;
};

struct OperationSpec {
    int job_id = 0;        // 0-based
    int index_in_job = 0;  // 0-based position within the job
    std::vector<ProcessingOption> options;  // non-empty; single entry for JSP

    const ProcessingOption* option_on(int machine_id) const {
        for (const auto& o : options)
            if (o.machine_id == machine_id) return &o;
        return nullptr;
    }

    // Processing time used wherever one number must stand for the whole
    // operation (features, remaining-work sums): the plain duration for JSP,
    // the average over eligible machines for FJSP.
    double mean_duration() const {
        double s = 0.0;
        for (const auto& o : options) s += o.duration;
        return s / double(options.size());
    }

    int min_duration() const {
        int best = options.front().duration;
        for (const auto& o : options)
            if (o.duration < best) best = o.duration;
        return best;
    }

    int max_duration() const {
        int best = options.front().duration;
        for (const auto& o : options)
            if (o.duration > best) best = o.duration;
        return best;
    }

    bool operator==(const OperationSpec&) const = default;
};

enum class InstanceKind { JSP, FJSP };

enum class FileFormat { Taillard, Orlib, Fjsp };

// Immutable problem description. Safe to share across threads once built.
struct Instance {
    int n_jobs = 0;
    int n_machines = 0;
    InstanceKind kind = InstanceKind::JSP;
    std::vector<std::vector<OperationSpec>> jobs;

    int total_ops() const {
        int t = 0;
        for (const auto& j : jobs) t += int(j.size());
        return t;
    }

    const OperationSpec& op(int job, int index) const { return jobs[job][index]; }

    // Flattened operation ids: op (j, i) lives at offsets[j] + i; offsets has
    // n_jobs + 1 entries, the last being total_ops().
    std::vector<int> op_offsets() const {
        std::vector<int> off(jobs.size() + 1, 0);
        for (std::size_t j = 0; j < jobs.size(); ++j)
            off[j + 1] = off[j] + int(jobs[j].size());
        return off;
    }

    bool rectangular() const {
        for (const auto& j : jobs)
            if (int(j.size()) != n_machines) return false;
        return true;
    }

    // Largest single processing time in the instance (over every option).
    int max_option_duration() const;

    // Throws std::invalid_argument if any structural invariant is broken:
    // empty jobs, empty/duplicate options, out-of-range machines,
    // non-positive durations, or a kind flag inconsistent with the options.
    void check() const;

    bool operator==(const Instance&) const = default;
};

// ---- Parsing ----------------------------------------------------------------
//
// All three parsers throw ParseError with the offending line (and column where
// it is meaningful). Machine indices are normalized to 0-based internally no
// matter what the file convention is.

// Taillard layout: header "n m" (extra header tokens ignored), then n lines of
// m durations, then n lines of m machine indices (1-based, each line a
// permutation of 1..m).
Instance parse_taillard_jsp(const std::string& text);

// ORLib layout: header "n m", then n job lines of "machine duration" pairs
// with 0-based machines. Jobs may have differing operation counts.
Instance parse_orlib_jsp(const std::string& text);

// Flexible layout: header "n m [avg]"; each job line is k_j followed, per
// operation, by an option count c and c "machine duration" pairs (machines
// 1-based). Kind is JSP when every c equals 1.
Instance parse_fjsp(const std::string& text);

Instance parse(const std::string& text, FileFormat format);

// Inverse of the parsers; emits single-space separators and newline-terminated
// lines. Throws std::invalid_argument on a format/kind mismatch (e.g. ragged
// instance through the Taillard format).
std::string serialize(const Instance& instance, FileFormat format);

// Parses "taillard" | "orlib" | "fjsp" (case-sensitive).
bool format_from_name(const std::string& name, FileFormat& out);

// ---- Generation -------------------------------------------------------------

// Standard random JSP: every job visits all m machines in an independent
// uniform random order; durations uniform on {1..99}.
Instance generate_jsp(int n, int m, Rng& rng);

// Random FJSP with the same shape: per operation, q ~ U{1..m} distinct
// eligible machines, each with an independent duration on {1..99}.
Instance generate_fjsp(int n, int m, Rng& rng);

// Training distribution: n ~ U{3..max_jobs}, m ~ U{3..n} additionally clamped
// to max_machines, then the body of generate_jsp / generate_fjsp.
Instance generate_training_instance(int max_jobs, int max_machines, InstanceKind kind,
                                    Rng& rng);

// Taillard's published benchmark generator, bit-faithful to the original
// portable pseudo-random sequence; (n, m, time_seed, machine_seed) pin the
// instance exactly.
Instance generate_taillard_jsp(int n, int m, std::int32_t time_seed,
                               std::int32_t machine_seed);

}  // namespace resched
