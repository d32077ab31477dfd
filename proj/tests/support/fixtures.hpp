#pragma once

// Shared desk-scale fixtures: the 3x3 JSP and 3x3 FJSP instances used across
// the test suites, plus small helpers. Machines are written M1..M3 in the
// comments but are 0-based in code.

#include <string>

#include "core/env.hpp"
#include "core/instance.hpp"

namespace fixtures {

// 3 jobs, 3 machines. Job 0: (M1,3) (M3,5) (M2,4); job 1: (M3,2) (M2,4) (M1,3);
// job 2: (M1,3) (M3,2). Best possible makespan: 12.
inline const char* kJsp3x3 =
    "3 3\n"
    "0 3 2 5 1 4\n"
    "2 2 1 4 0 3\n"
    "0 3 2 2\n";

// Flexible 3x3. Job 0: O1 {M1:3, M2:2}, O2 {M1:3, M3:5}, O3 {M2:4, M3:3};
// job 1: O1 {M3:2}, O2 {M2:4}, O3 {M1:3}; job 2: O1 {M1:3, M2:4},
// O2 {M1:2, M3:2}. Best possible makespan: 9.
inline const char* kFjsp3x3 =
    "3 3\n"
    "3 2 1 3 2 2 2 1 3 3 5 2 2 4 3 3\n"
    "3 1 3 2 1 2 4 1 1 3\n"
    "2 2 1 3 2 4 2 1 2 3 2\n";

inline resched::Instance jsp3x3() { return resched::parse_orlib_jsp(kJsp3x3); }
inline resched::Instance fjsp3x3() { return resched::parse_fjsp(kFjsp3x3); }

// A single-job, single-machine, duration-7 instance.
inline resched::Instance tiny1x1() { return resched::parse_orlib_jsp("1 1\n0 7\n"); }

// The eight-dispatch walkthrough of the 3x3 JSP instance that finishes at
// makespan 12, as (machine, job, op, duration) candidates in order.
inline std::vector<resched::Candidate> walkthrough12() {
    return {
        {0, 0, 0, 3},  // (M1, O11) at t=0
        {2, 1, 0, 2},  // (M3, O21) at t=0
        {1, 1, 1, 4},  // (M2, O22) at t=2
        {2, 0, 1, 5},  // (M3, O12) at t=3
        {0, 2, 0, 3},  // (M1, O31) at t=3
        {0, 1, 2, 3},  // (M1, O23) at t=6
        {2, 2, 1, 2},  // (M3, O32) at t=8
        {1, 0, 2, 4},  // (M2, O13) at t=8
    };
}

}  // namespace fixtures
