#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "core/graph.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace resched;

namespace {

// Row of the op feature matrix as a plain vector for CHECK messages.
std::vector<double> row(const Eigen::MatrixXd& m, int r) {
    std::vector<double> v(m.cols());
    for (int c = 0; c < m.cols(); ++c) v[c] = m(r, c);
    return v;
}

void check_row(const Eigen::MatrixXd& m, int r, std::vector<double> expect) {
    auto got = row(m, r);
    REQUIRE(got.size() == expect.size());
    for (std::size_t c = 0; c < expect.size(); ++c)
        CHECK(got[c] == doctest::Approx(expect[c]).epsilon(1e-12));
}

bool graphs_match(const ResidualGraph& a, const ResidualGraph& b) {
    if (a.n_ops != b.n_ops || a.n_machines != b.n_machines) return false;
    if ((a.op_feat - b.op_feat).cwiseAbs().maxCoeff() != 0.0) return false;
    if ((a.mach_feat - b.mach_feat).cwiseAbs().maxCoeff() != 0.0) return false;
    return a.oo_in == b.oo_in && a.om_in == b.om_in && a.mo_in == b.mo_in &&
           a.candidate_index == b.candidate_index;
}

}  // namespace

TEST_CASE("encoding the fresh 3x3 JSP reproduces the hand-built graph") {
    auto inst = fixtures::jsp3x3();
    auto s = ConstructionState::reset(inst);
    auto g = encode(s);

    REQUIRE(g.n_ops == 8);
    REQUIRE(g.n_machines == 3);
    REQUIRE(g.op_feat.rows() == 8);
    REQUIRE(g.op_feat.cols() == kOpFeatureDim);
    REQUIRE(g.mach_feat.cols() == kMachineFeatureDim);

    // Node order is ascending (job, index); T_max = 5, job totals 12 / 9 / 5.
    CHECK(g.op_ident[0] == std::pair<int, int>{0, 0});
    CHECK(g.op_ident[7] == std::pair<int, int>{2, 1});
    check_row(g.op_feat, 0, {0, 1, 0, 3.0 / 5, 1.0});
    check_row(g.op_feat, 1, {0, 0, 1, 1.0, 9.0 / 12});
    check_row(g.op_feat, 2, {0, 0, 1, 4.0 / 5, 4.0 / 12});
    check_row(g.op_feat, 3, {0, 1, 0, 2.0 / 5, 1.0});
    check_row(g.op_feat, 4, {0, 0, 1, 4.0 / 5, 7.0 / 9});
    check_row(g.op_feat, 5, {0, 0, 1, 3.0 / 5, 3.0 / 9});
    check_row(g.op_feat, 6, {0, 1, 0, 3.0 / 5, 1.0});
    check_row(g.op_feat, 7, {0, 0, 1, 2.0 / 5, 2.0 / 5});

    for (int l = 0; l < 3; ++l) check_row(g.mach_feat, l, {0, 1, 0});

    CHECK(g.oo_in[0] == std::vector<int>{1, 2});
    CHECK(g.oo_in[1] == std::vector<int>{0, 2});
    CHECK(g.oo_in[2] == std::vector<int>{0, 1});
    CHECK(g.oo_in[6] == std::vector<int>{7});
    CHECK(g.oo_in[7] == std::vector<int>{6});

    using E = std::vector<std::pair<int, double>>;
    CHECK(g.mo_in[0] == E{{0, 0.6}});
    CHECK(g.mo_in[1] == E{{2, 1.0}});
    CHECK(g.mo_in[4] == E{{1, 0.8}});
    CHECK(g.om_in[0] == E{{0, 0.6}, {5, 0.6}, {6, 0.6}});
    CHECK(g.om_in[1] == E{{2, 0.8}, {4, 0.8}});
    CHECK(g.om_in[2] == E{{1, 1.0}, {3, 0.4}, {7, 0.4}});

    using CI = std::vector<std::pair<int, int>>;
    CHECK(g.candidate_index == CI{{0, 0}, {2, 3}, {0, 6}});
}

TEST_CASE("mid-episode encoding drops finished work and pins the in-flight operation") {
    auto inst = fixtures::jsp3x3();
    auto s = ConstructionState::reset(inst);
    auto seq = fixtures::walkthrough12();
    for (int t = 0; t < 3; ++t) s.step(seq[t]);
    REQUIRE(s.clock() == 3);

    auto g = encode(s);
    REQUIRE(g.n_ops == 6);  // O11 and O21 completed

    // Nodes: (0,1) (0,2) (1,1) (1,2) (2,0) (2,1); O22 is ongoing with 3 left.
    check_row(g.op_feat, 0, {0, 1, 0, 1.0, 9.0 / 12});
    check_row(g.op_feat, 1, {0, 0, 1, 4.0 / 5, 4.0 / 12});
    check_row(g.op_feat, 2, {1, 0, 0, 3.0 / 5, 6.0 / 9});
    check_row(g.op_feat, 3, {0, 0, 1, 3.0 / 5, 3.0 / 9});
    check_row(g.op_feat, 4, {0, 1, 0, 3.0 / 5, 1.0});
    check_row(g.op_feat, 5, {0, 0, 1, 2.0 / 5, 2.0 / 5});

    check_row(g.mach_feat, 0, {0, 1, 0});
    check_row(g.mach_feat, 1, {1, 0, 3.0 / 5});
    check_row(g.mach_feat, 2, {0, 1, 0});

    // The ongoing operation keeps a single machine edge carrying its remainder.
    using E = std::vector<std::pair<int, double>>;
    CHECK(g.mo_in[2] == E{{1, 0.6}});
    CHECK(g.om_in[1] == E{{1, 0.8}, {2, 0.6}});
    CHECK(g.om_in[0] == E{{3, 0.6}, {4, 0.6}});
    CHECK(g.om_in[2] == E{{0, 1.0}, {5, 0.4}});

    CHECK(g.oo_in[2] == std::vector<int>{3});
    CHECK(g.oo_in[3] == std::vector<int>{2});

    using CI = std::vector<std::pair<int, int>>;
    CHECK(g.candidate_index == CI{{2, 0}, {0, 4}});
}

TEST_CASE("flexible operations average their options in node features") {
    auto inst = fixtures::fjsp3x3();
    auto s = ConstructionState::reset(inst);
    auto g = encode(s);

    REQUIRE(g.n_ops == 8);
    // T_max = 5; job totals 10 / 9 / 5.5.
    check_row(g.op_feat, 0, {0, 1, 0, 2.5 / 5, 1.0});
    check_row(g.op_feat, 1, {0, 0, 1, 4.0 / 5, 7.5 / 10});
    check_row(g.op_feat, 2, {0, 0, 1, 3.5 / 5, 3.5 / 10});
    check_row(g.op_feat, 6, {0, 1, 0, 3.5 / 5, 1.0});
    check_row(g.op_feat, 7, {0, 0, 1, 2.0 / 5, 2.0 / 5.5});

    // Edge features stay per machine.
    using E = std::vector<std::pair<int, double>>;
    CHECK(g.mo_in[0] == E{{0, 0.6}, {1, 0.4}});
    CHECK(g.mo_in[1] == E{{0, 0.6}, {2, 1.0}});
    CHECK(g.mo_in[3] == E{{2, 0.4}});
    CHECK(g.mo_in[7] == E{{0, 0.4}, {2, 0.4}});

    using CI = std::vector<std::pair<int, int>>;
    CHECK(g.candidate_index == CI{{0, 0}, {1, 0}, {2, 3}, {0, 6}, {1, 6}});
}

TEST_CASE("graph structure invariants hold on random partial schedules") {
    Rng rng(20240517);
    for (int trial = 0; trial < 60; ++trial) {
        Instance inst = (trial % 2 == 0) ? generate_jsp(4, 3, rng) : generate_fjsp(4, 3, rng);
        auto s = ConstructionState::reset(inst);
        int steps = rng.uniform_int(0, inst.total_ops() - 1);
        for (int t = 0; t < steps && !s.terminal(); ++t) {
            auto cs = s.candidates();
            s.step(cs[std::size_t(rng.uniform_int(0, int(cs.size()) - 1))]);
        }
        if (s.terminal()) continue;
        auto g = encode(s);

        int surviving = 0;
        for (int j = 0; j < inst.n_jobs; ++j)
            for (int i = 0; i < int(inst.jobs[j].size()); ++i)
                if (s.status(j, i) != OpStatus::Completed) ++surviving;
        REQUIRE(g.n_ops == surviving);

        // Status one-hots are exact; processing-time ratios land in [0, 1].
        // The job-remaining ratio of an ONGOING node may pass 1 on flexible
        // instances: the denominator totals option averages, while the
        // numerator counts the dispatched option's actual remaining time,
        // which can exceed the average. Its excess is bounded by
        // (max option - mean option) of that operation over the job total.
        for (int v = 0; v < g.n_ops; ++v) {
            CHECK(g.op_feat(v, 0) + g.op_feat(v, 1) + g.op_feat(v, 2) == 1.0);
            for (int c = 0; c < 3; ++c)
                CHECK((g.op_feat(v, c) == 0.0 || g.op_feat(v, c) == 1.0));
            CHECK(g.op_feat(v, 3) >= 0.0);
            CHECK(g.op_feat(v, 3) <= 1.0);
            CHECK(g.op_feat(v, 4) > 0.0);
            auto [j, i] = g.op_ident[v];
            const auto& op = inst.jobs[j][i];
            double slack = g.op_feat(v, 0) == 1.0
                               ? (op.max_duration() - op.mean_duration()) /
                                     norm_context_of(inst).job_totals[j]
                               : 0.0;
            CHECK(g.op_feat(v, 4) <= 1.0 + slack + 1e-12);
        }
        for (int l = 0; l < g.n_machines; ++l) {
            CHECK(g.mach_feat(l, 0) + g.mach_feat(l, 1) == 1.0);
            CHECK(g.mach_feat(l, 2) >= 0.0);
            CHECK(g.mach_feat(l, 2) <= 1.0);
            if (g.mach_feat(l, 1) == 1.0) CHECK(g.mach_feat(l, 2) == 0.0);
        }

        // Same-job connectivity: r*(r-1) directed edges per job, none across jobs.
        std::map<int, int> per_job;
        for (int v = 0; v < g.n_ops; ++v) per_job[g.op_ident[v].first]++;
        std::map<int, int> oo_count;
        for (int v = 0; v < g.n_ops; ++v) {
            for (int u : g.oo_in[v]) {
                CHECK(g.op_ident[u].first == g.op_ident[v].first);
                CHECK(u != v);
            }
            oo_count[g.op_ident[v].first] += int(g.oo_in[v].size());
        }
        for (auto [j, r] : per_job) CHECK(oo_count[j] == r * (r - 1));

        // OM and MO mirror each other; edge counts follow the option lists.
        std::multiset<std::tuple<int, int, double>> om, mo;
        for (int l = 0; l < g.n_machines; ++l)
            for (const auto& [v, e] : g.om_in[l]) om.insert({l, v, e});
        for (int v = 0; v < g.n_ops; ++v)
            for (const auto& [l, e] : g.mo_in[v]) mo.insert({l, v, e});
        CHECK(om == mo);
        for (int v = 0; v < g.n_ops; ++v) {
            auto [j, i] = g.op_ident[v];
            std::size_t expect = s.status(j, i) == OpStatus::Ongoing
                                     ? 1u
                                     : inst.jobs[j][i].options.size();
            CHECK(g.mo_in[v].size() == expect);
            if (g.op_feat(v, 0) == 1.0)
                CHECK(g.mo_in[v][0].second == g.op_feat(v, 3));
        }

        // Candidates map onto ready nodes and idle machines.
        auto cs = s.candidates();
        REQUIRE(g.candidate_index.size() == cs.size());
        for (std::size_t k = 0; k < cs.size(); ++k) {
            auto [l, v] = g.candidate_index[k];
            CHECK(l == cs[k].machine_id);
            CHECK(g.op_ident[v] == std::pair<int, int>{cs[k].job_id, cs[k].op_index});
            CHECK(g.op_feat(v, 1) == 1.0);
            CHECK(g.mach_feat(l, 1) == 1.0);
        }
    }
}

TEST_CASE("a state and its materialized residual encode to the same graph") {
    Rng rng(77001);
    int compared = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Instance inst = (trial % 2 == 0) ? generate_jsp(4, 4, rng) : generate_fjsp(3, 4, rng);
        auto s = ConstructionState::reset(inst);
        int steps = rng.uniform_int(1, inst.total_ops() - 1);
        for (int t = 0; t < steps && !s.terminal(); ++t) {
            auto cs = s.candidates();
            s.step(cs[std::size_t(rng.uniform_int(0, int(cs.size()) - 1))]);
        }
        if (s.terminal()) continue;

        auto d = s.residual_view();
        auto recon = materialize(d);
        auto fresh = ConstructionState::reset(recon.instance);
        for (const auto& c : recon.ongoing_dispatches) fresh.step(c);
        REQUIRE(fresh.clock() == 0);

        CHECK(graphs_match(encode(s), encode(fresh, norm_context_of(d))));
        ++compared;
    }
    CHECK(compared >= 30);  // the property must actually be exercised
}

TEST_CASE("job remaining of an ongoing flexible operation can pass one") {
    // Job 0's single operation runs 1 on M1 or 99 on M2 (mean 50). Dispatched
    // on M2, its remaining time is 99, so remaining/total = 99/50. The job
    // total keeps using option averages; the numerator uses what was actually
    // committed. Job 1 only exists to keep the state non-terminal.
    auto inst = parse_fjsp("2 2\n1 2 1 1 2 99\n1 1 1 100\n");
    auto s = ConstructionState::reset(inst);
    s.step(Candidate{1, 0, 0, 99});
    REQUIRE(s.clock() == 0);

    auto g = encode(s);
    REQUIRE(g.op_ident[0] == std::pair<int, int>{0, 0});
    CHECK(g.op_feat(0, 0) == 1.0);                                   // ongoing
    CHECK(g.op_feat(0, 3) == doctest::Approx(99.0 / 100).epsilon(1e-12));
    CHECK(g.op_feat(0, 4) == doctest::Approx(99.0 / 50).epsilon(1e-12));
}

TEST_CASE("encoding a terminal state is rejected") {
    auto inst = fixtures::tiny1x1();
    auto s = ConstructionState::reset(inst);
    s.step(s.candidates()[0]);
    REQUIRE(s.terminal());
    CHECK_THROWS_AS(encode(s), std::logic_error);
}

TEST_CASE("the graph dump is deterministic and names every section") {
    auto inst = fixtures::jsp3x3();
    auto s = ConstructionState::reset(inst);
    auto text = graph_dump(encode(s));
    CHECK(text == graph_dump(encode(s)));
    CHECK(text.find("ops 8 machines 3") == 0);
    for (const char* section : {"\nop 7 ", "\nmach 2 ", "\noo 0:", "\nom 2:", "\nmo 7:", "\ncand 2:"})
        CHECK(text.find(section) != std::string::npos);
}
