#pragma once

#include <string>
#include <vector>

#include "core/instance.hpp"

namespace resched {

struct DispatchRecord {
    int job_id = 0;
    int op_index = 0;
    int machine_id = 0;
    Time start = 0;
    Time end = 0;

    bool operator==(const DispatchRecord&) const = default;
};

enum class OpStatus : unsigned char { Completed, Ongoing, Ready, Unready };

// A legal dispatch: a ready operation paired with an idle machine it may run
// on, plus the duration of that pairing.
struct Candidate {
    int machine_id = 0;
    int job_id = 0;
    int op_index = 0;
    int duration = 0;

    bool operator==(const Candidate&) const = default;
};

// What is left of the problem once everything finished is stripped away:
// per surviving job, an optional in-flight head operation (pinned to its
// machine with only the remaining time) followed by the untouched tail.
struct ResidualOperation {
    int orig_job = 0;
    int orig_index = 0;
    bool ongoing = false;
    std::vector<ProcessingOption> options;  // ongoing: single {machine, remaining}
};

struct ResidualJob {
    int orig_job = 0;
    std::vector<ResidualOperation> ops;
};

struct ResidualDescriptor {
    int n_machines = 0;
    std::vector<ResidualJob> jobs;  // ascending original job id; finished jobs absent

    // Normalization context of the ORIGINAL instance. Feature encodings keep
    // these denominators fixed over an episode, so a re-encoding of the
    // residual as a fresh instance needs them carried along.
    Time orig_max_duration = 0;
    std::vector<double> orig_job_totals;  // aligned with `jobs`
};

// The residual descriptor turned back into a standalone problem: a fresh
// instance plus the dispatches that must be replayed at time 0 to put the
// in-flight operations back onto their machines.
struct ResidualReconstruction {
    Instance instance;
    std::vector<Candidate> ongoing_dispatches;
};

ResidualReconstruction materialize(const ResidualDescriptor& descriptor);

// Schedule-correctness violation; rendered as "KIND job op machine detail".
struct Violation {
    std::string kind;
    int job = -1;
    int op = -1;
    int machine = -1;
    std::string detail;

    std::string to_string() const;
};

// Checks a complete (or partial) set of dispatch records against an instance:
// coverage, job precedence, machine exclusivity, duration fidelity, and
// machine legality. Returns all violations found; never throws.
std::vector<Violation> validate(const std::vector<DispatchRecord>& records,
                                const Instance& instance);

// Mutable partial schedule under construction. One dispatch per step; after
// each dispatch the clock advances through completion events until some legal
// dispatch exists again (or everything is finished), so a non-terminal state
// always offers at least one candidate and the schedules built are non-delay.
//
// Copyable: copies are independent continuations (used for baseline rollouts).
// The referenced Instance must outlive every state built on it.
class ConstructionState {
public:
    explicit ConstructionState(const Instance& instance);

    static ConstructionState reset(const Instance& instance) {
        return ConstructionState(instance);
    }

    const Instance& instance() const { return *inst_; }
    Time clock() const { return clock_; }
    bool terminal() const { return completed_ == total_ops_; }
    int dispatched_count() const { return dispatched_; }
    int completed_count() const { return completed_; }
    const std::vector<DispatchRecord>& records() const { return records_; }

    // All legal dispatches at the current clock, ascending (job, op, machine).
    // Throws std::logic_error on a terminal state.
    std::vector<Candidate> candidates() const;

    // Applies one dispatch, then advances time as described above. Throws
    // IllegalAction if the candidate is not currently legal.
    void step(const Candidate& candidate);

    // Max completion time over all records. Throws std::logic_error unless
    // terminal.
    Time makespan() const;

    OpStatus status(int job, int op_index) const;

    // When the operation first became dispatchable; -1 if it never has. The
    // timestamp persists even if the operation later loses its idle machine.
    Time ready_since(int job, int op_index) const {
        return ready_since_[flat_id(job, op_index)];
    }

    // The record currently running on the machine, or nullptr when idle.
    const DispatchRecord* ongoing_on(int machine_id) const {
        const int r = machine_record_[machine_id];
        return r >= 0 ? &records_[r] : nullptr;
    }

    bool machine_idle(int machine_id) const { return machine_record_[machine_id] < 0; }

    // Index of the next undispatched operation of the job, or k_j when the
    // whole job has been dispatched.
    int next_undispatched(int job) const { return next_op_[job]; }

    // Remaining work of a job as seen at the current clock: remaining time of
    // an in-flight head plus mean durations of the undispatched tail.
    double job_remaining_work(int job) const;

    ResidualDescriptor residual_view() const;

    int flat_id(int job, int op_index) const { return offsets_[job] + op_index; }

private:
    void refresh_ready_timestamps();
    void advance_until_actionable();
    bool any_candidate() const;

    const Instance* inst_;
    std::vector<int> offsets_;
    Time clock_ = 0;
    std::vector<DispatchRecord> records_;
    std::vector<OpStatus> dispatch_state_;  // Completed / Ongoing / Unready(=undispatched)
    std::vector<Time> ready_since_;
    std::vector<int> op_record_;  // record index per dispatched op, -1 otherwise
    std::vector<int> machine_record_;  // running record index per machine, -1 idle
    std::vector<int> next_op_;         // per job
    int total_ops_ = 0;
    int dispatched_ = 0;
    int completed_ = 0;
};

// Tail makespan of a finished episode measured from an earlier state of the
// same episode: latest completion among operations not yet completed at `at`,
// rebased to `at`'s clock. Zero when nothing completes later.
Time residual_makespan(const ConstructionState& at, const ConstructionState& terminal);

// One CSV row "job,op,machine,start,end" per dispatch record, no header.
std::string gantt_export(const ConstructionState& state);

}  // namespace resched
