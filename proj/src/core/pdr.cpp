#include "core/pdr.hpp"

#include <stdexcept>
#include <vector>

namespace resched {

bool rule_from_name(const std::string& name, Rule& out) {
    if (name == "mwkr") out = Rule::MWKR;
    else if (name == "mor") out = Rule::MOR;
    else if (name == "spt") out = Rule::SPT;
    else if (name == "fifo") out = Rule::FIFO;
    else return false;
    return true;
}

const char* rule_name(Rule rule) {
    switch (rule) {
        case Rule::MWKR: return "mwkr";
        case Rule::MOR: return "mor";
        case Rule::SPT: return "spt";
        case Rule::FIFO: return "fifo";
    }
    return "?";
}

Candidate select(const ConstructionState& state, Rule rule) {
    const std::vector<Candidate> cands = state.candidates();
    std::size_t best = 0;
    // Strict comparisons keep the first candidate on ties, which is exactly the
    // fixed (job, op, machine) order the environment emits.
    switch (rule) {
        case Rule::MWKR: {
            double best_work = state.job_remaining_work(cands[0].job_id);
            for (std::size_t i = 1; i < cands.size(); ++i) {
                const double w = state.job_remaining_work(cands[i].job_id);
                if (w > best_work) {
                    best_work = w;
                    best = i;
                }
            }
            break;
        }
        case Rule::MOR: {
            auto remaining_ops = [&](const Candidate& c) {
                return int(state.instance().jobs[c.job_id].size()) - c.op_index;
            };
            int best_count = remaining_ops(cands[0]);
            for (std::size_t i = 1; i < cands.size(); ++i) {
                const int r = remaining_ops(cands[i]);
                if (r > best_count) {
                    best_count = r;
                    best = i;
                }
            }
            break;
        }
        case Rule::SPT: {
            int best_dur = cands[0].duration;
            for (std::size_t i = 1; i < cands.size(); ++i) {
                if (cands[i].duration < best_dur) {
                    best_dur = cands[i].duration;
                    best = i;
                }
            }
            break;
        }
        case Rule::FIFO: {
            Time best_ts = state.ready_since(cands[0].job_id, cands[0].op_index);
            for (std::size_t i = 1; i < cands.size(); ++i) {
                const Time ts = state.ready_since(cands[i].job_id, cands[i].op_index);
                if (ts < best_ts) {
                    best_ts = ts;
                    best = i;
                }
            }
            break;
        }
    }
    return cands[best];
}

Time rollout(const ConstructionState& state, Rule rule) {
    ConstructionState cur = state;
    while (!cur.terminal()) cur.step(select(cur, rule));
    return residual_makespan(state, cur);
}

}  // namespace resched
