#include "core/env.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "core/error.hpp"

namespace resched {

ConstructionState::ConstructionState(const Instance& instance) : inst_(&instance) {
    instance.check();
    offsets_ = instance.op_offsets();
    total_ops_ = offsets_.back();
    dispatch_state_.assign(total_ops_, OpStatus::Unready);
    ready_since_.assign(total_ops_, -1);
    op_record_.assign(total_ops_, -1);
    machine_record_.assign(instance.n_machines, -1);
    next_op_.assign(instance.n_jobs, 0);
    refresh_ready_timestamps();
}

OpStatus ConstructionState::status(int job, int op_index) const {
    const int flat = flat_id(job, op_index);
    const OpStatus s = dispatch_state_[flat];
    if (s != OpStatus::Unready) return s;  // Completed or Ongoing
    if (op_index != next_op_[job]) return OpStatus::Unready;
    if (op_index > 0 && dispatch_state_[flat - 1] != OpStatus::Completed)
        return OpStatus::Unready;
    for (const auto& o : inst_->op(job, op_index).options)
        if (machine_idle(o.machine_id)) return OpStatus::Ready;
    return OpStatus::Unready;
}

std::vector<Candidate> ConstructionState::candidates() const {
    if (terminal()) throw std::logic_error("candidates() called on a terminal state");
    std::vector<Candidate> out;
    std::vector<ProcessingOption> legal;
    for (int j = 0; j < inst_->n_jobs; ++j) {
        const int i = next_op_[j];
        if (i >= int(inst_->jobs[j].size())) continue;
        if (i > 0 && dispatch_state_[flat_id(j, i - 1)] != OpStatus::Completed) continue;
        legal.clear();
        for (const auto& o : inst_->op(j, i).options)
            if (machine_idle(o.machine_id)) legal.push_back(o);
        std::sort(legal.begin(), legal.end(),
                  [](const ProcessingOption& a, const ProcessingOption& b) {
                      return a.machine_id < b.machine_id;
                  });
        for (const auto& o : legal) out.push_back({o.machine_id, j, i, o.duration});
    }
    return out;
}

void ConstructionState::step(const Candidate& c) {
    if (terminal()) throw IllegalAction("dispatch on a terminal state");
    if (c.job_id < 0 || c.job_id >= inst_->n_jobs)
        throw IllegalAction("job id out of range");
    if (c.op_index < 0 || c.op_index >= int(inst_->jobs[c.job_id].size()))
        throw IllegalAction("operation index out of range");
    if (c.machine_id < 0 || c.machine_id >= inst_->n_machines)
        throw IllegalAction("machine id out of range");
    if (c.op_index != next_op_[c.job_id])
        throw IllegalAction("operation is not the job's next undispatched operation");
    if (c.op_index > 0 &&
        dispatch_state_[flat_id(c.job_id, c.op_index - 1)] != OpStatus::Completed)
        throw IllegalAction("job predecessor has not completed");
    if (!machine_idle(c.machine_id)) throw IllegalAction("machine is busy");
    const ProcessingOption* opt = inst_->op(c.job_id, c.op_index).option_on(c.machine_id);
    if (opt == nullptr)
        throw IllegalAction("operation cannot run on the requested machine");
    if (c.duration != opt->duration)
        throw IllegalAction("candidate duration disagrees with the processing option");

    const int flat = flat_id(c.job_id, c.op_index);
    records_.push_back({c.job_id, c.op_index, c.machine_id, clock_, clock_ + c.duration});
    dispatch_state_[flat] = OpStatus::Ongoing;
    op_record_[flat] = int(records_.size()) - 1;
    machine_record_[c.machine_id] = int(records_.size()) - 1;
    ++next_op_[c.job_id];
    ++dispatched_;

    advance_until_actionable();
}

bool ConstructionState::any_candidate() const {
    for (int j = 0; j < inst_->n_jobs; ++j) {
        const int i = next_op_[j];
        if (i >= int(inst_->jobs[j].size())) continue;
        if (i > 0 && dispatch_state_[flat_id(j, i - 1)] != OpStatus::Completed) continue;
        for (const auto& o : inst_->op(j, i).options)
            if (machine_idle(o.machine_id)) return true;
    }
    return false;
}

void ConstructionState::advance_until_actionable() {
    while (completed_ < total_ops_ && !any_candidate()) {
        Time next = std::numeric_limits<Time>::max();
        for (int mach = 0; mach < inst_->n_machines; ++mach)
            if (machine_record_[mach] >= 0)
                next = std::min(next, records_[machine_record_[mach]].end);
        // Some machine must be running: every undispatched job head either waits
        // on an ongoing predecessor or on a busy machine.
        assert(next != std::numeric_limits<Time>::max());
        for (int mach = 0; mach < inst_->n_machines; ++mach) {
            const int r = machine_record_[mach];
            if (r >= 0 && records_[r].end == next) {
                dispatch_state_[flat_id(records_[r].job_id, records_[r].op_index)] =
                    OpStatus::Completed;
                machine_record_[mach] = -1;
                ++completed_;
            }
        }
        clock_ = next;
        refresh_ready_timestamps();
    }
}

void ConstructionState::refresh_ready_timestamps() {
    for (int j = 0; j < inst_->n_jobs; ++j) {
        const int i = next_op_[j];
        if (i >= int(inst_->jobs[j].size())) continue;
        const int flat = flat_id(j, i);
        if (ready_since_[flat] >= 0) continue;
        if (i > 0 && dispatch_state_[flat - 1] != OpStatus::Completed) continue;
        for (const auto& o : inst_->op(j, i).options) {
            if (machine_idle(o.machine_id)) {
                ready_since_[flat] = clock_;
                break;
            }
        }
    }
}

Time ConstructionState::makespan() const {
    if (!terminal()) throw std::logic_error("makespan of an unfinished schedule");
    Time best = 0;
    for (const auto& r : records_) best = std::max(best, r.end);
    return best;
}

double ConstructionState::job_remaining_work(int job) const {
    double total = 0.0;
    const int k = int(inst_->jobs[job].size());
    if (next_op_[job] > 0) {
        const int flat = flat_id(job, next_op_[job] - 1);
        if (dispatch_state_[flat] == OpStatus::Ongoing)
            total += double(records_[op_record_[flat]].end - clock_);
    }
    for (int i = next_op_[job]; i < k; ++i) total += inst_->op(job, i).mean_duration();
    return total;
}

ResidualDescriptor ConstructionState::residual_view() const {
    ResidualDescriptor d;
    d.n_machines = inst_->n_machines;
    d.orig_max_duration = inst_->max_option_duration();
    for (int j = 0; j < inst_->n_jobs; ++j) {
        const int k = int(inst_->jobs[j].size());
        ResidualJob rj;
        rj.orig_job = j;
        // Jobs complete front to back: a completed prefix, at most one ongoing
        // operation, then the undispatched tail.
        int first = next_op_[j];
        if (first > 0 &&
            dispatch_state_[flat_id(j, first - 1)] == OpStatus::Ongoing)
            --first;
        for (int i = first; i < k; ++i) {
            const int flat = flat_id(j, i);
            ResidualOperation rop;
            rop.orig_job = j;
            rop.orig_index = i;
            if (dispatch_state_[flat] == OpStatus::Ongoing) {
                const DispatchRecord& rec = records_[op_record_[flat]];
                rop.ongoing = true;
                rop.options = {{rec.machine_id, int(rec.end - clock_)}};
            } else {
                rop.ongoing = false;
                rop.options = inst_->op(j, i).options;
            }
            rj.ops.push_back(std::move(rop));
        }
        if (!rj.ops.empty()) {
            double total = 0.0;
            for (const auto& op : inst_->jobs[j]) total += op.mean_duration();
            d.jobs.push_back(std::move(rj));
            d.orig_job_totals.push_back(total);
        }
    }
    return d;
}

ResidualReconstruction materialize(const ResidualDescriptor& descriptor) {
    if (descriptor.jobs.empty())
        throw std::invalid_argument("residual descriptor has no operations left");
    ResidualReconstruction out;
    Instance& inst = out.instance;
    inst.n_jobs = int(descriptor.jobs.size());
    inst.n_machines = descriptor.n_machines;
    inst.jobs.assign(inst.n_jobs, {});
    bool all_single = true;
    for (int j = 0; j < inst.n_jobs; ++j) {
        const ResidualJob& rj = descriptor.jobs[j];
        for (std::size_t i = 0; i < rj.ops.size(); ++i) {
            OperationSpec op{j, int(i), rj.ops[i].options};
            all_single = all_single && op.options.size() == 1;
            inst.jobs[j].push_back(std::move(op));
        }
        if (rj.ops.front().ongoing)
            out.ongoing_dispatches.push_back({rj.ops.front().options.front().machine_id, j,
                                              0,
                                              rj.ops.front().options.front().duration});
    }
    inst.kind = all_single ? InstanceKind::JSP : InstanceKind::FJSP;
    inst.check();
    return out;
}

Time residual_makespan(const ConstructionState& at, const ConstructionState& terminal) {
    assert(&at.instance() == &terminal.instance());
    Time latest = at.clock();
    for (const auto& r : terminal.records()) latest = std::max(latest, r.end);
    return latest - at.clock();
}

std::string Violation::to_string() const {
    std::ostringstream out;
    out << kind << ' ' << job << ' ' << op << ' ' << machine << ' ' << detail;
    return out.str();
}

std::vector<Violation> validate(const std::vector<DispatchRecord>& records,
                                const Instance& instance) {
    std::vector<Violation> out;
    const auto offsets = instance.op_offsets();
    std::vector<int> seen(offsets.back(), 0);

    for (const auto& r : records) {
        if (r.job_id < 0 || r.job_id >= instance.n_jobs ||
            r.op_index < 0 || r.op_index >= int(instance.jobs[r.job_id].size())) {
            out.push_back({"UNKNOWN_OP", r.job_id, r.op_index, r.machine_id,
                           "record references a nonexistent operation"});
            continue;
        }
        ++seen[offsets[r.job_id] + r.op_index];
        if (r.start < 0)
            out.push_back({"NEGATIVE_START", r.job_id, r.op_index, r.machine_id,
                           "start " + std::to_string(r.start)});
        const OperationSpec& op = instance.op(r.job_id, r.op_index);
        const ProcessingOption* opt = op.option_on(r.machine_id);
        if (opt == nullptr) {
            out.push_back({"ILLEGAL_MACHINE", r.job_id, r.op_index, r.machine_id,
                           "operation is not eligible on this machine"});
        } else if (r.end - r.start != opt->duration) {
            out.push_back({"BAD_DURATION", r.job_id, r.op_index, r.machine_id,
                           "interval " + std::to_string(r.end - r.start) + " != option " +
                               std::to_string(opt->duration)});
        }
    }

    for (int j = 0; j < instance.n_jobs; ++j)
        for (int i = 0; i < int(instance.jobs[j].size()); ++i) {
            const int count = seen[offsets[j] + i];
            if (count == 0)
                out.push_back({"MISSING_OP", j, i, -1, "operation never dispatched"});
            else if (count > 1)
                out.push_back({"DUPLICATE_OP", j, i, -1,
                               "dispatched " + std::to_string(count) + " times"});
        }

    // Job precedence: each operation must start at or after its predecessor's
    // completion. Only checkable where both records exist exactly once.
    std::vector<const DispatchRecord*> by_op(offsets.back(), nullptr);
    for (const auto& r : records)
        if (r.job_id >= 0 && r.job_id < instance.n_jobs && r.op_index >= 0 &&
            r.op_index < int(instance.jobs[r.job_id].size()))
            by_op[offsets[r.job_id] + r.op_index] = &r;
    for (int j = 0; j < instance.n_jobs; ++j)
        for (int i = 1; i < int(instance.jobs[j].size()); ++i) {
            const DispatchRecord* prev = by_op[offsets[j] + i - 1];
            const DispatchRecord* cur = by_op[offsets[j] + i];
            if (prev && cur && seen[offsets[j] + i - 1] == 1 && seen[offsets[j] + i] == 1 &&
                cur->start < prev->end)
                out.push_back({"PRECEDENCE", j, i, cur->machine_id,
                               "starts at " + std::to_string(cur->start) +
                                   " before predecessor ends at " +
                                   std::to_string(prev->end)});
        }

    // Machine exclusivity: no two records may overlap on one machine.
    std::vector<std::vector<const DispatchRecord*>> per_machine(instance.n_machines);
    for (const auto& r : records)
        if (r.machine_id >= 0 && r.machine_id < instance.n_machines)
            per_machine[r.machine_id].push_back(&r);
    for (int mach = 0; mach < instance.n_machines; ++mach) {
        auto& rs = per_machine[mach];
        std::sort(rs.begin(), rs.end(), [](const DispatchRecord* a, const DispatchRecord* b) {
            return a->start < b->start;
        });
        for (std::size_t i = 1; i < rs.size(); ++i)
            if (rs[i]->start < rs[i - 1]->end)
                out.push_back({"OVERLAP", rs[i]->job_id, rs[i]->op_index, mach,
                               "overlaps the previous interval on the machine"});
    }
    return out;
}

std::string gantt_export(const ConstructionState& state) {
    std::ostringstream out;
    for (const auto& r : state.records())
        out << r.job_id << ',' << r.op_index << ',' << r.machine_id << ',' << r.start << ','
            << r.end << '\n';
    return out.str();
}

}  // namespace resched
