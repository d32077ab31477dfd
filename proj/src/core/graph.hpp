#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "core/env.hpp"

namespace resched {

// Normalization denominators for graph features. Defaults to the encoded
// state's own instance; pass the values carried by a ResidualDescriptor when
// encoding a materialized residual so both encodings share denominators.
struct NormContext {
    Time max_duration = 0;                // max option duration of the original instance
    std::vector<double> job_totals;       // full mean work per job of the encoded instance
};

NormContext norm_context_of(const Instance& instance);
NormContext norm_context_of(const ResidualDescriptor& descriptor);

// Heterogeneous graph over the surviving work of a state: one node per
// non-completed operation, one node per machine.
//
// Operation features  [ongoing, ready, unready, norm_proc, norm_job_remaining]
//   norm_proc: remaining time for an ongoing operation, option-average
//   duration otherwise, divided by max_duration.
//   norm_job_remaining: work from this operation to the end of its job over
//   the job's original total work.
// Machine features    [processing, idle, norm_op_proc]
//   norm_op_proc: remaining time of the operation being processed, zero when
//   idle.
// Edge feature (operation-machine pairs): that pairing's duration over
// max_duration; an ongoing operation keeps a single edge to the machine
// actually processing it, carrying the remaining time.
//
// Relations are stored as in-neighbor lists ready for sum aggregation. Same-
// job operations are fully connected in both directions (OO); there are no
// machine-machine edges.
struct ResidualGraph {
    int n_ops = 0;
    int n_machines = 0;
    Eigen::MatrixXd op_feat;    // n_ops x 5
    Eigen::MatrixXd mach_feat;  // n_machines x 3

    std::vector<std::vector<int>> oo_in;                         // per op: same-job ops
    std::vector<std::vector<std::pair<int, double>>> om_in;      // per machine: (op, edge)
    std::vector<std::vector<std::pair<int, double>>> mo_in;      // per op: (machine, edge)

    std::vector<std::pair<int, int>> candidate_index;  // per candidate: (machine, op node)
    std::vector<std::pair<int, int>> op_ident;         // per op node: (job, op index)
};

constexpr int kOpFeatureDim = 5;
constexpr int kMachineFeatureDim = 3;
constexpr int kEdgeFeatureDim = 1;

ResidualGraph encode(const ConstructionState& state);
ResidualGraph encode(const ConstructionState& state, const NormContext& context);

// Line-oriented rendering of features and adjacency, for debugging and fixtures.
std::string graph_dump(const ResidualGraph& graph);

}  // namespace resched
