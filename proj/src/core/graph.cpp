#include "core/graph.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace resched {

NormContext norm_context_of(const Instance& instance) {
    NormContext ctx;
    ctx.max_duration = instance.max_option_duration();
    ctx.job_totals.reserve(instance.jobs.size());
    for (const auto& job : instance.jobs) {
        double total = 0.0;
        for (const auto& op : job) total += op.mean_duration();
        ctx.job_totals.push_back(total);
    }
    return ctx;
}

NormContext norm_context_of(const ResidualDescriptor& descriptor) {
    return NormContext{descriptor.orig_max_duration, descriptor.orig_job_totals};
}

ResidualGraph encode(const ConstructionState& state) {
    return encode(state, norm_context_of(state.instance()));
}

ResidualGraph encode(const ConstructionState& state, const NormContext& context) {
    if (state.terminal()) throw std::logic_error("encode: terminal state");
    const Instance& inst = state.instance();
    if (int(context.job_totals.size()) != inst.n_jobs)
        throw std::invalid_argument("encode: context job count mismatch");

    const double t_max = double(context.max_duration);
    const Time clock = state.clock();

    // Remaining processing time per ongoing operation, keyed by flat id.
    std::vector<Time> ongoing_remaining(inst.total_ops(), -1);
    for (int l = 0; l < inst.n_machines; ++l) {
        if (const DispatchRecord* rec = state.ongoing_on(l))
            ongoing_remaining[state.flat_id(rec->job_id, rec->op_index)] = rec->end - clock;
    }

    ResidualGraph g;
    g.n_machines = inst.n_machines;

    // Surviving operations in ascending (job, index) order.
    std::vector<int> node_of(inst.total_ops(), -1);
    for (int j = 0; j < inst.n_jobs; ++j) {
        for (int i = 0; i < int(inst.jobs[j].size()); ++i) {
            if (state.status(j, i) == OpStatus::Completed) continue;
            node_of[state.flat_id(j, i)] = g.n_ops++;
            g.op_ident.emplace_back(j, i);
        }
    }

    g.op_feat.setZero(g.n_ops, kOpFeatureDim);
    g.mach_feat.setZero(g.n_machines, kMachineFeatureDim);
    g.oo_in.resize(g.n_ops);
    g.om_in.resize(g.n_machines);
    g.mo_in.resize(g.n_ops);

    for (int j = 0; j < inst.n_jobs; ++j) {
        const auto& ops = inst.jobs[j];
        const double job_total = context.job_totals[j];

        // Work from each surviving operation to the end of its job.
        double tail = 0.0;
        for (int i = int(ops.size()) - 1; i >= 0; --i) {
            const int node = node_of[state.flat_id(j, i)];
            if (node < 0) break;  // completed prefix
            const Time remaining = ongoing_remaining[state.flat_id(j, i)];
            const bool ongoing = remaining >= 0;
            const double proc = ongoing ? double(remaining) : ops[i].mean_duration();
            tail += proc;

            switch (state.status(j, i)) {
                case OpStatus::Ongoing: g.op_feat(node, 0) = 1.0; break;
                case OpStatus::Ready: g.op_feat(node, 1) = 1.0; break;
                case OpStatus::Unready: g.op_feat(node, 2) = 1.0; break;
                case OpStatus::Completed: break;  // unreachable
            }
            g.op_feat(node, 3) = proc / t_max;
            g.op_feat(node, 4) = tail / job_total;
        }

        // Same-job operations are fully connected in both directions.
        std::vector<int> nodes;
        for (int i = 0; i < int(ops.size()); ++i) {
            const int node = node_of[state.flat_id(j, i)];
            if (node >= 0) nodes.push_back(node);
        }
        for (int v : nodes)
            for (int u : nodes)
                if (u != v) g.oo_in[v].push_back(u);
    }

    // Operation-machine edges; an ongoing operation keeps only the edge to the
    // machine actually processing it.
    for (int j = 0; j < inst.n_jobs; ++j) {
        for (int i = 0; i < int(inst.jobs[j].size()); ++i) {
            const int node = node_of[state.flat_id(j, i)];
            if (node < 0) continue;
            const Time remaining = ongoing_remaining[state.flat_id(j, i)];
            if (remaining >= 0) {
                int l = -1;
                for (int m = 0; m < inst.n_machines; ++m) {
                    const DispatchRecord* rec = state.ongoing_on(m);
                    if (rec && rec->job_id == j && rec->op_index == i) { l = m; break; }
                }
                const double e = double(remaining) / t_max;
                g.mo_in[node].emplace_back(l, e);
                g.om_in[l].emplace_back(node, e);
            } else {
                for (const auto& opt : inst.jobs[j][i].options) {
                    const double e = double(opt.duration) / t_max;
                    g.mo_in[node].emplace_back(opt.machine_id, e);
                    g.om_in[opt.machine_id].emplace_back(node, e);
                }
            }
        }
    }

    for (int l = 0; l < inst.n_machines; ++l) {
        if (const DispatchRecord* rec = state.ongoing_on(l)) {
            g.mach_feat(l, 0) = 1.0;
            g.mach_feat(l, 2) = double(rec->end - clock) / t_max;
        } else {
            g.mach_feat(l, 1) = 1.0;
        }
    }

    for (const Candidate& c : state.candidates())
        g.candidate_index.emplace_back(c.machine_id, node_of[state.flat_id(c.job_id, c.op_index)]);

    return g;
}

std::string graph_dump(const ResidualGraph& g) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "ops " << g.n_ops << " machines " << g.n_machines << "\n";
    for (int v = 0; v < g.n_ops; ++v) {
        out << "op " << v << " job " << g.op_ident[v].first << " index "
            << g.op_ident[v].second << " feat";
        for (int c = 0; c < kOpFeatureDim; ++c) out << ' ' << g.op_feat(v, c);
        out << "\n";
    }
    for (int l = 0; l < g.n_machines; ++l) {
        out << "mach " << l << " feat";
        for (int c = 0; c < kMachineFeatureDim; ++c) out << ' ' << g.mach_feat(l, c);
        out << "\n";
    }
    for (int v = 0; v < g.n_ops; ++v) {
        out << "oo " << v << ":";
        for (int u : g.oo_in[v]) out << ' ' << u;
        out << "\n";
    }
    for (int l = 0; l < g.n_machines; ++l) {
        out << "om " << l << ":";
        for (const auto& [v, e] : g.om_in[l]) out << " (" << v << ',' << e << ')';
        out << "\n";
    }
    for (int v = 0; v < g.n_ops; ++v) {
        out << "mo " << v << ":";
        for (const auto& [l, e] : g.mo_in[v]) out << " (" << l << ',' << e << ')';
        out << "\n";
    }
    for (std::size_t k = 0; k < g.candidate_index.size(); ++k)
        out << "cand " << k << ": mach " << g.candidate_index[k].first << " op "
            << g.candidate_index[k].second << "\n";
    return out.str();
}

}  // namespace resched
