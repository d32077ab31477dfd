#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/env.hpp"
#include "core/nn.hpp"
#include "core/pdr.hpp"

namespace resched {

struct SolveResult {
    std::vector<DispatchRecord> schedule;
    Time makespan = 0;
};

// Argmax-score construction; score ties keep the earliest candidate.
SolveResult solve_greedy(const PolicyParams& params, const Instance& instance);

// k independent softmax-sampled constructions, best one kept (ties keep the
// earliest sample). Sample i draws from a substream mixed from (seed, i), so
// the first 10 of a 100-sample run are exactly a 10-sample run: nested reuse.
// Thread count only splits the loop; results are identical at any count.
// When `per_sample` is given it receives all k makespans in sample order.
SolveResult solve_sample_k(const PolicyParams& params, const Instance& instance, int k,
                           std::uint64_t seed, int threads = 1,
                           std::vector<Time>* per_sample = nullptr);

// Uniform-random candidate each step.
SolveResult solve_random(const Instance& instance, Rng& rng);

// (makespan - reference) / reference. Throws std::invalid_argument unless
// reference > 0.
double gap(double makespan, double reference);

// Reference makespans keyed by (benchmark, instance name), loaded from a CSV
// with header "benchmark,instance,makespan". All values must be positive.
struct ReferenceTable {
    std::map<std::pair<std::string, std::string>, long long> values;

    static ReferenceTable load_csv(const std::string& path);

    // Looks an instance name up across benchmarks. Exactly one match returns
    // its (benchmark, makespan); zero or several return false.
    bool find(const std::string& instance, std::string& benchmark, long long& makespan) const;
};

// How to construct schedules in bench/solve: a dispatching rule, a trained
// model checkpoint, or uniform random. Parsed from "pdr:<rule>",
// "model:<checkpoint path>", "random".
struct PolicySpec {
    enum class Kind { Pdr, Model, Random };
    Kind kind = Kind::Pdr;
    Rule rule = Rule::MWKR;
    std::string checkpoint;
    std::string name;  // the spec string itself, used in reports
};

bool policy_from_name(const std::string& text, PolicySpec& out);

struct BenchRow {
    std::string benchmark;  // empty when the instance has no reference entry
    std::string instance;
    int n = 0, m = 0;
    std::string method;
    Time makespan = 0;
    double gap = 0.0;  // NaN without a reference
    double seconds = 0.0;
};

struct ClassAverage {
    std::string benchmark;
    int n = 0, m = 0;
    std::string method;
    double mean_gap = 0.0;
    int count = 0;  // instances with a reference
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<ClassAverage> averages;  // per (benchmark, n, m, method), NaN rows excluded
    std::vector<std::string> warnings;   // missing references, unreadable files
    bool all_valid = true;               // every produced schedule passed validate()

    // Per-instance rows only: header benchmark,instance,n,m,method,makespan,gap,seconds
    // with gaps to 6 decimals. Averages are reported separately (stdout in the CLI).
    std::string to_csv() const;
};

// Runs every method over every *.txt instance in `dir` (sorted by filename;
// format detected by trying the known layouts). Unreadable files become
// warnings, the run continues. `seed` feeds random policies and sampling.
BenchReport bench(const std::string& dir, const std::vector<PolicySpec>& methods,
                  const ReferenceTable& refs, std::uint64_t seed = 0, int threads = 1,
                  int samples = 1);

// Parses an instance file by trying Taillard, then flexible, then ORLib
// layout; the first that parses and passes check() wins.
Instance parse_any(const std::string& text);

}  // namespace resched
