#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "core/eval.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace resched;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::trunc);
    REQUIRE(bool(out));
    out << text;
}

bool schedule_ok(const SolveResult& r, const Instance& inst) {
    return validate(r.schedule, inst).empty();
}

}  // namespace

TEST_CASE("gap is the relative excess over the reference") {
    CHECK(std::abs(gap(1356.0, 1231.0) - 0.1015) <= 1e-4);
    CHECK(std::abs(gap(1462.0, 1231.0) - 0.1877) <= 1e-4);
    CHECK(gap(1231.0, 1231.0) == 0.0);
    CHECK(gap(615.5, 1231.0) < 0.0);
    CHECK(gap(10.0, 8.0) > gap(9.0, 8.0));
    CHECK_THROWS_AS(gap(5.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gap(5.0, -3.0), std::invalid_argument);
}

TEST_CASE("greedy solve with all-zero parameters walks the first candidates") {
    const Instance inst = fixtures::jsp3x3();
    const PolicyParams zero = make_params(8);

    // Every score is zero, so the argmax keeps the earliest candidate; the
    // same walk done by hand must give an identical schedule.
    auto s = ConstructionState::reset(inst);
    while (!s.terminal()) s.step(s.candidates()[0]);

    const SolveResult r = solve_greedy(zero, inst);
    CHECK(r.makespan == s.makespan());
    CHECK(r.schedule == s.records());
    CHECK(r.makespan >= 12);
    CHECK(schedule_ok(r, inst));

    const Instance tiny = fixtures::tiny1x1();
    CHECK(solve_greedy(zero, tiny).makespan == 7);
}

TEST_CASE("greedy solve is deterministic and valid for random parameters") {
    Rng rng(41);
    const PolicyParams params = init_params(rng, 16);
    for (const Instance inst : {fixtures::jsp3x3(), fixtures::fjsp3x3()}) {
        const SolveResult a = solve_greedy(params, inst);
        const SolveResult b = solve_greedy(params, inst);
        CHECK(a.makespan == b.makespan);
        CHECK(a.schedule == b.schedule);
        CHECK(schedule_ok(a, inst));
    }
}

TEST_CASE("sampled solve exposes nested substreams") {
    Rng rng(5);
    const PolicyParams params = init_params(rng, 8);
    const Instance inst = fixtures::jsp3x3();

    std::vector<Time> all, head, threaded;
    const SolveResult best12 = solve_sample_k(params, inst, 12, 99, 1, &all);
    REQUIRE(all.size() == 12);
    CHECK(best12.makespan == *std::min_element(all.begin(), all.end()));
    CHECK(schedule_ok(best12, inst));

    // Sample i depends only on (seed, i): a 4-sample run is a prefix of the
    // 12-sample run, and the thread count changes nothing.
    solve_sample_k(params, inst, 4, 99, 1, &head);
    REQUIRE(head.size() == 4);
    CHECK(std::equal(head.begin(), head.end(), all.begin()));

    const SolveResult best_mt = solve_sample_k(params, inst, 12, 99, 3, &threaded);
    CHECK(threaded == all);
    CHECK(best_mt.makespan == best12.makespan);
    CHECK(best_mt.schedule == best12.schedule);

    // More samples can only improve the best.
    const Time best4 = *std::min_element(head.begin(), head.end());
    CHECK(best12.makespan <= best4);

    CHECK(solve_sample_k(params, fixtures::tiny1x1(), 1, 7).makespan == 7);
    CHECK_THROWS_AS(solve_sample_k(params, inst, 0, 1), std::invalid_argument);
}

TEST_CASE("random solve is reproducible from its generator") {
    const Instance inst = fixtures::jsp3x3();
    Rng a(7), b(7);
    const SolveResult ra = solve_random(inst, a);
    const SolveResult rb = solve_random(inst, b);
    CHECK(ra.makespan == rb.makespan);
    CHECK(ra.schedule == rb.schedule);
    CHECK(schedule_ok(ra, inst));

    Rng c(1);
    CHECK(solve_random(fixtures::tiny1x1(), c).makespan == 7);
}

TEST_CASE("policy specs parse from their names") {
    PolicySpec spec;
    REQUIRE(policy_from_name("pdr:mwkr", spec));
    CHECK(spec.kind == PolicySpec::Kind::Pdr);
    CHECK(spec.rule == Rule::MWKR);
    CHECK(spec.name == "pdr:mwkr");

    REQUIRE(policy_from_name("pdr:spt", spec));
    CHECK(spec.rule == Rule::SPT);

    REQUIRE(policy_from_name("model:/tmp/net.bin", spec));
    CHECK(spec.kind == PolicySpec::Kind::Model);
    CHECK(spec.checkpoint == "/tmp/net.bin");

    REQUIRE(policy_from_name("random", spec));
    CHECK(spec.kind == PolicySpec::Kind::Random);

    for (const char* bad : {"", "pdr:", "pdr:nope", "model:", "greedy", "Random"})
        CHECK_FALSE(policy_from_name(bad, spec));
}

TEST_CASE("reference tables load and resolve unique instance names") {
    TempDir tmp("resched_test_refs");
    const fs::path csv = tmp.path / "refs.csv";
    write_file(csv,
               "benchmark,instance,makespan\n"
               "tai,ta01,1231\n"
               "dmu,dmu01,2501\n"
               "tai,shared,100\n"
               "dmu,shared,200\n");

    const ReferenceTable table = ReferenceTable::load_csv(csv.string());
    CHECK(table.values.size() == 4);

    std::string benchmark;
    long long makespan = 0;
    REQUIRE(table.find("ta01", benchmark, makespan));
    CHECK(benchmark == "tai");
    CHECK(makespan == 1231);
    CHECK_FALSE(table.find("shared", benchmark, makespan));  // ambiguous
    CHECK_FALSE(table.find("ta99", benchmark, makespan));    // absent

    const fs::path bad = tmp.path / "bad.csv";
    write_file(bad, "instance,makespan\nta01,1231\n");
    CHECK_THROWS_AS(ReferenceTable::load_csv(bad.string()), std::runtime_error);
    write_file(bad, "benchmark,instance,makespan\ntai,ta01\n");
    CHECK_THROWS_AS(ReferenceTable::load_csv(bad.string()), std::runtime_error);
    write_file(bad, "benchmark,instance,makespan\ntai,ta01,zero\n");
    CHECK_THROWS_AS(ReferenceTable::load_csv(bad.string()), std::runtime_error);
    write_file(bad, "benchmark,instance,makespan\ntai,ta01,0\n");
    CHECK_THROWS_AS(ReferenceTable::load_csv(bad.string()), std::runtime_error);
    write_file(bad, "benchmark,instance,makespan\ntai,ta01,10\ntai,ta01,11\n");
    CHECK_THROWS_AS(ReferenceTable::load_csv(bad.string()), std::runtime_error);
    CHECK_THROWS_AS(ReferenceTable::load_csv((tmp.path / "absent.csv").string()),
                    std::runtime_error);
}

TEST_CASE("parse_any detects the layout by trying each parser") {
    Rng rng(13);
    const Instance jsp = generate_jsp(4, 3, rng);
    const Instance via_taillard = parse_any(serialize(jsp, FileFormat::Taillard));
    CHECK(serialize(via_taillard, FileFormat::Taillard) ==
          serialize(jsp, FileFormat::Taillard));

    const Instance ragged = parse_any(fixtures::kJsp3x3);
    CHECK(serialize(ragged, FileFormat::Orlib) ==
          serialize(fixtures::jsp3x3(), FileFormat::Orlib));

    const Instance flex = parse_any(fixtures::kFjsp3x3);
    CHECK(flex.kind == InstanceKind::FJSP);
    CHECK(flex.n_jobs == 3);

    CHECK_THROWS_AS(parse_any("not an instance at all\n"), std::runtime_error);
}

TEST_CASE("bench sweeps a directory and reports per-class averages") {
    TempDir tmp("resched_test_bench");
    write_file(tmp.path / "alpha.txt", serialize(fixtures::jsp3x3(), FileFormat::Orlib));
    write_file(tmp.path / "beta.txt", serialize(fixtures::tiny1x1(), FileFormat::Taillard));
    write_file(tmp.path / "zzz_broken.txt", "garbage that parses as nothing\n");
    write_file(tmp.path / "ignored.md", "not picked up\n");

    const fs::path csv = tmp.path / "refs.csv";
    write_file(csv, "benchmark,instance,makespan\ntoy,alpha,12\n");
    const ReferenceTable refs = ReferenceTable::load_csv(csv.string());

    std::vector<PolicySpec> methods(3);
    REQUIRE(policy_from_name("pdr:mwkr", methods[0]));
    REQUIRE(policy_from_name("pdr:spt", methods[1]));
    REQUIRE(policy_from_name("random", methods[2]));

    const BenchReport report = bench(tmp.path.string(), methods, refs, 17, 1);

    // alpha and beta each produce one row per method; the broken file only
    // warns. Files are visited in name order, methods in argument order.
    REQUIRE(report.rows.size() == 6);
    CHECK(report.all_valid);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(report.rows[i].instance == "alpha");
        CHECK(report.rows[i].method == methods[i].name);
        CHECK(report.rows[i].benchmark == "toy");
        CHECK(report.rows[i].n == 3);
        CHECK(report.rows[i].m == 3);
        CHECK(report.rows[i].makespan >= 12);
        CHECK(report.rows[i].gap ==
              doctest::Approx(gap(double(report.rows[i].makespan), 12.0)).epsilon(1e-12));
        CHECK(report.rows[i].seconds >= 0.0);
    }
    for (std::size_t i = 3; i < 6; ++i) {
        CHECK(report.rows[i].instance == "beta");
        CHECK(report.rows[i].benchmark.empty());
        CHECK(report.rows[i].makespan == 7);
        CHECK(std::isnan(report.rows[i].gap));
    }

    REQUIRE(report.warnings.size() == 2);
    CHECK(report.warnings[0].find("beta") != std::string::npos);
    CHECK(report.warnings[1].find("zzz_broken") != std::string::npos);

    // Only alpha has a reference, so each method averages over one instance.
    REQUIRE(report.averages.size() == 3);
    for (const auto& avg : report.averages) {
        CHECK(avg.benchmark == "toy");
        CHECK(avg.n == 3);
        CHECK(avg.m == 3);
        CHECK(avg.count == 1);
    }

    const std::string text = report.to_csv();
    CHECK(text.rfind("benchmark,instance,n,m,method,makespan,gap,seconds\n", 0) == 0);
    CHECK(text.find("toy,alpha,3,3,pdr:mwkr,") != std::string::npos);
    CHECK(text.find(",nan,") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);

    // The thread count must not change any outcome.
    const BenchReport threaded = bench(tmp.path.string(), methods, refs, 17, 4);
    REQUIRE(threaded.rows.size() == report.rows.size());
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        CHECK(threaded.rows[i].makespan == report.rows[i].makespan);
        CHECK(threaded.rows[i].instance == report.rows[i].instance);
        CHECK(threaded.rows[i].method == report.rows[i].method);
    }
    CHECK(threaded.warnings == report.warnings);
}

TEST_CASE("bench runs model policies from a checkpoint file") {
    TempDir tmp("resched_test_bench_model");
    write_file(tmp.path / "alpha.txt", serialize(fixtures::jsp3x3(), FileFormat::Orlib));

    Rng rng(3);
    const PolicyParams params = init_params(rng, 8);
    const fs::path ckpt = tmp.path / "net.bin";
    save_checkpoint(params, ckpt.string());

    std::vector<PolicySpec> methods(1);
    REQUIRE(policy_from_name("model:" + ckpt.string(), methods[0]));

    ReferenceTable refs;
    refs.values[{"toy", "alpha"}] = 12;

    const Instance inst = fixtures::jsp3x3();
    const BenchReport greedy = bench(tmp.path.string(), methods, refs, 0, 1, 1);
    REQUIRE(greedy.rows.size() == 1);
    CHECK(greedy.rows[0].makespan == solve_greedy(params, inst).makespan);

    const BenchReport sampled = bench(tmp.path.string(), methods, refs, 0, 1, 8);
    REQUIRE(sampled.rows.size() == 1);
    CHECK(sampled.rows[0].makespan ==
          solve_sample_k(params, inst, 8, mix_seed(0, 0)).makespan);
    CHECK(sampled.all_valid);
}
