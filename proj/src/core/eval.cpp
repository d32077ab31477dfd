#include "core/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>
#include <tuple>

#include "core/error.hpp"

namespace resched {

namespace {

int argmax_first(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

SolveResult finish(ConstructionState&& s) {
    SolveResult r;
    r.makespan = s.makespan();
    r.schedule = s.records();
    return r;
}

}  // namespace

SolveResult solve_greedy(const PolicyParams& params, const Instance& instance) {
    auto s = ConstructionState::reset(instance);
    while (!s.terminal()) {
        auto fw = policy(encode(s), params);
        s.step(s.candidates()[std::size_t(argmax_first(fw.scores))]);
    }
    return finish(std::move(s));
}

namespace {

SolveResult solve_sample_once(const PolicyParams& params, const Instance& instance, Rng& rng) {
    auto s = ConstructionState::reset(instance);
    while (!s.terminal()) {
        auto fw = policy(encode(s), params);
        std::size_t a = rng.categorical(
            std::span<const double>(fw.probs.data(), std::size_t(fw.probs.size())));
        s.step(s.candidates()[a]);
    }
    return finish(std::move(s));
}

}  // namespace

SolveResult solve_sample_k(const PolicyParams& params, const Instance& instance, int k,
                           std::uint64_t seed, int threads, std::vector<Time>* per_sample) {
    if (k < 1) throw std::invalid_argument("solve_sample_k: k must be >= 1");
    std::vector<SolveResult> results(static_cast<std::size_t>(k));
    auto run_range = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            Rng rng(mix_seed(seed, std::uint64_t(i)));
            results[std::size_t(i)] = solve_sample_once(params, instance, rng);
        }
    };
    const int workers = std::max(1, std::min(threads, k));
    if (workers == 1) {
        run_range(0, k);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (k + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(run_range, w * chunk, std::min(k, (w + 1) * chunk));
        for (auto& t : pool) t.join();
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].makespan < results[best].makespan) best = i;
    if (per_sample) {
        per_sample->clear();
        for (const auto& r : results) per_sample->push_back(r.makespan);
    }
    return results[best];
}

SolveResult solve_random(const Instance& instance, Rng& rng) {
    auto s = ConstructionState::reset(instance);
    while (!s.terminal()) {
        auto cs = s.candidates();
        s.step(cs[std::size_t(rng.uniform_int(0, int(cs.size()) - 1))]);
    }
    return finish(std::move(s));
}

double gap(double makespan, double reference) {
    if (!(reference > 0.0)) throw std::invalid_argument("gap: reference must be positive");
    return (makespan - reference) / reference;
}

ReferenceTable ReferenceTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open reference file " + path);
    ReferenceTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "benchmark,instance,makespan")
                throw std::runtime_error(path + ": expected header benchmark,instance,makespan");
            continue;
        }
        std::istringstream row(line);
        std::string benchmark, instance, value;
        if (!std::getline(row, benchmark, ',') || !std::getline(row, instance, ',') ||
            !std::getline(row, value))
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": bad row");
        long long makespan = 0;
        try {
            makespan = std::stoll(value);
        } catch (const std::exception&) {
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": bad makespan " + value);
        }
        if (makespan <= 0)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": reference makespan must be positive");
        if (!table.values.emplace(std::make_pair(benchmark, instance), makespan).second)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": duplicate entry " + benchmark + "/" + instance);
    }
    return table;
}

bool ReferenceTable::find(const std::string& instance, std::string& benchmark,
                          long long& makespan) const {
    int hits = 0;
    for (const auto& [key, value] : values) {
        if (key.second != instance) continue;
        if (++hits > 1) return false;
        benchmark = key.first;
        makespan = value;
    }
    return hits == 1;
}

bool policy_from_name(const std::string& text, PolicySpec& out) {
    out.name = text;
    if (text == "random") {
        out.kind = PolicySpec::Kind::Random;
        return true;
    }
    if (text.rfind("pdr:", 0) == 0) {
        out.kind = PolicySpec::Kind::Pdr;
        return rule_from_name(text.substr(4), out.rule);
    }
    if (text.rfind("model:", 0) == 0 && text.size() > 6) {
        out.kind = PolicySpec::Kind::Model;
        out.checkpoint = text.substr(6);
        return true;
    }
    return false;
}

Instance parse_any(const std::string& text) {
    std::string errors;
    for (auto format : {FileFormat::Taillard, FileFormat::Fjsp, FileFormat::Orlib}) {
        try {
            Instance inst = parse(text, format);
            inst.check();
            return inst;
        } catch (const std::exception& e) {
            if (!errors.empty()) errors += "; ";
            errors += e.what();
        }
    }
    throw std::runtime_error("no known instance layout matched (" + errors + ")");
}

namespace {

SolveResult run_method(const PolicySpec& method, const Instance& instance,
                       const PolicyParams* params, std::uint64_t seed, int samples) {
    switch (method.kind) {
        case PolicySpec::Kind::Pdr: {
            auto s = ConstructionState::reset(instance);
            while (!s.terminal()) s.step(select(s, method.rule));
            return finish(std::move(s));
        }
        case PolicySpec::Kind::Model:
            if (samples <= 1) return solve_greedy(*params, instance);
            return solve_sample_k(*params, instance, samples, seed);
        case PolicySpec::Kind::Random: {
            Rng rng(seed);
            return solve_random(instance, rng);
        }
    }
    throw std::logic_error("unreachable");
}

std::string format_gap(double g) {
    if (std::isnan(g)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", g);
    return buf;
}

}  // namespace

std::string BenchReport::to_csv() const {
    std::string out = "benchmark,instance,n,m,method,makespan,gap,seconds\n";
    char buf[64];
    for (const auto& r : rows) {
        out += r.benchmark + ',' + r.instance + ',' + std::to_string(r.n) + ',' +
               std::to_string(r.m) + ',' + r.method + ',' + std::to_string(r.makespan) + ',' +
               format_gap(r.gap);
        std::snprintf(buf, sizeof buf, ",%.3f\n", r.seconds);
        out += buf;
    }
    return out;
}

BenchReport bench(const std::string& dir, const std::vector<PolicySpec>& methods,
                  const ReferenceTable& refs, std::uint64_t seed, int threads, int samples) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    // Checkpoints load once, shared read-only by every worker.
    std::map<std::string, PolicyParams> models;
    for (const auto& m : methods)
        if (m.kind == PolicySpec::Kind::Model && !models.count(m.checkpoint))
            models.emplace(m.checkpoint, load_checkpoint(m.checkpoint));

    struct FileOutcome {
        std::vector<BenchRow> rows;
        std::vector<std::string> warnings;
        bool valid = true;
    };
    std::vector<FileOutcome> outcomes(files.size());

    auto run_file = [&](std::size_t fi) {
        FileOutcome& out = outcomes[fi];
        const std::string name = files[fi].stem().string();
        std::ifstream in(files[fi]);
        if (!in) {
            out.warnings.push_back("cannot read " + files[fi].string());
            return;
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        Instance inst;
        try {
            inst = parse_any(buffer.str());
        } catch (const std::exception& e) {
            out.warnings.push_back(files[fi].string() + ": " + e.what());
            return;
        }

        std::string benchmark;
        long long reference = 0;
        const bool have_ref = refs.find(name, benchmark, reference);
        if (!have_ref)
            out.warnings.push_back("no reference makespan for " + name +
                                   "; excluded from averages");

        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const auto t0 = std::chrono::steady_clock::now();
            SolveResult solved = run_method(methods[mi], inst,
                                            methods[mi].kind == PolicySpec::Kind::Model
                                                ? &models.at(methods[mi].checkpoint)
                                                : nullptr,
                                            mix_seed(seed, fi * 997 + mi), samples);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!validate(solved.schedule, inst).empty()) out.valid = false;

            BenchRow row;
            row.benchmark = benchmark;
            row.instance = name;
            row.n = inst.n_jobs;
            row.m = inst.n_machines;
            row.method = methods[mi].name;
            row.makespan = solved.makespan;
            row.gap = have_ref ? gap(double(solved.makespan), double(reference))
                               : std::numeric_limits<double>::quiet_NaN();
            row.seconds = secs;
            out.rows.push_back(std::move(row));
        }
    };

    const int workers = std::max(1, std::min<int>(threads, int(files.size())));
    if (workers <= 1) {
        for (std::size_t fi = 0; fi < files.size(); ++fi) run_file(fi);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (files.size() + std::size_t(workers) - 1) / std::size_t(workers);
        for (int w = 0; w < workers; ++w) {
            std::size_t lo = std::size_t(w) * chunk;
            std::size_t hi = std::min(files.size(), lo + chunk);
            pool.emplace_back([&run_file, lo, hi] {
                for (std::size_t fi = lo; fi < hi; ++fi) run_file(fi);
            });
        }
        for (auto& t : pool) t.join();
    }

    BenchReport report;
    struct Accum {
        double sum = 0.0;
        int count = 0;
    };
    std::map<std::tuple<std::string, int, int, std::string>, Accum> classes;
    for (auto& out : outcomes) {
        for (auto& w : out.warnings) report.warnings.push_back(std::move(w));
        report.all_valid = report.all_valid && out.valid;
        for (auto& row : out.rows) {
            if (!std::isnan(row.gap)) {
                auto& acc = classes[{row.benchmark, row.n, row.m, row.method}];
                acc.sum += row.gap;
                acc.count += 1;
            }
            report.rows.push_back(std::move(row));
        }
    }
    for (const auto& [key, acc] : classes) {
        const auto& [benchmark, n, m, method] = key;
        report.averages.push_back({benchmark, n, m, method, acc.sum / acc.count, acc.count});
    }
    return report;
}

}  // namespace resched
