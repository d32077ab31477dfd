#pragma once

#include <string>

#include "core/env.hpp"

namespace resched {

// The four classic priority dispatching rules. MWKR doubles as the training
// baseline policy.
enum class Rule { MWKR, MOR, SPT, FIFO };

// Parses "mwkr" | "mor" | "spt" | "fifo".
bool rule_from_name(const std::string& name, Rule& out);
const char* rule_name(Rule rule);

// Picks one candidate of a non-terminal state:
//   MWKR - most remaining work in the job (option-average durations, in-flight
//          operations at remaining time; for a candidate's own job that is just
//          the undispatched tail including the candidate itself),
//   MOR  - most remaining operations in the job,
//   SPT  - shortest duration of the candidate pairing itself,
//   FIFO - earliest ready-since timestamp.
// Every tie falls back to the environment's fixed candidate order.
Candidate select(const ConstructionState& state, Rule rule);

// Runs the rule from a copy of `state` to termination and returns the tail
// makespan rebased to `state`'s clock. The input state is not mutated.
Time rollout(const ConstructionState& state, Rule rule);

}  // namespace resched
