#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "resched/resched.h"

namespace {

struct InstanceDeleter {
    void operator()(resched_instance_t* p) const { resched_instance_free(p); }
};
struct ParamsDeleter {
    void operator()(resched_params_t* p) const { resched_params_free(p); }
};
struct StringDeleter {
    void operator()(char* p) const { resched_string_free(p); }
};
struct ScheduleDeleter {
    void operator()(resched_dispatch_t* p) const { resched_schedule_free(p); }
};
using InstancePtr = std::unique_ptr<resched_instance_t, InstanceDeleter>;
using ParamsPtr = std::unique_ptr<resched_params_t, ParamsDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;
using SchedulePtr = std::unique_ptr<resched_dispatch_t, ScheduleDeleter>;

// Exit codes mirror resched_status_t: 0 ok, 1 usage, 2 data, 3 invalid.
int fail_with(resched_status_t status) {
    std::fprintf(stderr, "error: %s\n", resched_last_error());
    return static_cast<int>(status);
}

int default_threads() {
    if (const char* env = std::getenv("RESCHED_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Loads an instance file, trying the known layouts in a fixed order.
resched_status_t load_instance_any(const std::string& path, InstancePtr& out) {
    std::string errors;
    for (const char* format : {"taillard", "fjsp", "orlib"}) {
        resched_instance_t* raw = nullptr;
        const resched_status_t status = resched_instance_load(path.c_str(), format, &raw);
        if (status == RESCHED_OK) {
            out.reset(raw);
            return RESCHED_OK;
        }
        if (!errors.empty()) errors += "; ";
        errors += std::string(format) + ": " + resched_last_error();
        // A missing or unreadable file will not improve with another format.
        if (status == RESCHED_ERR_DATA && errors.find("cannot open") != std::string::npos)
            break;
    }
    std::fprintf(stderr, "error: %s does not match any known layout (%s)\n", path.c_str(),
                 errors.c_str());
    return RESCHED_ERR_DATA;
}

struct GenerateArgs {
    int jobs = 0;
    int machines = 0;
    std::vector<int> train_dist;
    int count = 1;
    std::uint64_t seed = 0;
    std::string kind = "jsp";
    std::string out_dir;
};

int cmd_generate(const GenerateArgs& args) {
    std::error_code ec;
    std::filesystem::create_directories(args.out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "error: cannot create %s: %s\n", args.out_dir.c_str(),
                     ec.message().c_str());
        return 2;
    }
    const bool from_dist = !args.train_dist.empty();
    if (!from_dist && (args.jobs < 1 || args.machines < 1)) {
        std::fprintf(stderr, "error: need --jobs and --machines, or --train-dist N M\n");
        return 1;
    }

    for (int i = 0; i < args.count; ++i) {
        resched_instance_t* raw = nullptr;
        const std::uint64_t seed = args.seed + std::uint64_t(i);
        const resched_status_t status =
            from_dist ? resched_instance_generate_training(args.train_dist[0],
                                                           args.train_dist[1],
                                                           args.kind.c_str(), seed, &raw)
                      : resched_instance_generate(args.jobs, args.machines,
                                                  args.kind.c_str(), seed, &raw);
        if (status != RESCHED_OK) return fail_with(status);
        InstancePtr inst(raw);

        char* text = nullptr;
        const char* format = args.kind == "fjsp" ? "fjsp" : "orlib";
        const resched_status_t ser = resched_instance_serialize(inst.get(), format, &text);
        if (ser != RESCHED_OK) return fail_with(ser);
        StringPtr owned(text);

        std::ostringstream name;
        name << args.kind << '_' << resched_instance_jobs(inst.get()) << 'x'
             << resched_instance_machines(inst.get()) << '_' << i << ".txt";
        const std::filesystem::path path = std::filesystem::path(args.out_dir) / name.str();
        std::ofstream file(path, std::ios::trunc);
        if (!file) {
            std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
            return 2;
        }
        file << text;
    }
    std::printf("wrote %d instance(s) to %s\n", args.count, args.out_dir.c_str());
    return 0;
}

struct SolveArgs {
    std::string instance;
    std::string policy = "pdr:mwkr";
    int samples = 0;
    std::uint64_t seed = 0;
    std::string gantt;
};

int cmd_solve(const SolveArgs& args) {
    InstancePtr inst;
    if (load_instance_any(args.instance, inst) != RESCHED_OK) return 2;

    long long makespan = 0;
    resched_dispatch_t* raw_schedule = nullptr;
    int count = 0;
    resched_status_t status;
    if (args.policy.rfind("model:", 0) == 0) {
        resched_params_t* raw_params = nullptr;
        status = resched_params_load(args.policy.substr(6).c_str(), &raw_params);
        if (status != RESCHED_OK) return fail_with(status);
        ParamsPtr params(raw_params);
        status = resched_solve_model(inst.get(), params.get(), args.samples, args.seed,
                                     &makespan, &raw_schedule, &count);
    } else {
        status = resched_solve(inst.get(), args.policy.c_str(), args.seed, &makespan,
                               &raw_schedule, &count);
    }
    if (status != RESCHED_OK) return fail_with(status);
    SchedulePtr schedule(raw_schedule);

    char* raw_report = nullptr;
    const resched_status_t valid =
        resched_validate(inst.get(), schedule.get(), count, &raw_report);
    StringPtr report(raw_report);
    if (valid != RESCHED_OK) {
        if (report) std::fputs(report.get(), stderr);
        return fail_with(valid);
    }

    if (!args.gantt.empty()) {
        std::ofstream out(args.gantt, std::ios::trunc);
        if (!out) {
            std::fprintf(stderr, "error: cannot write %s\n", args.gantt.c_str());
            return 2;
        }
        out << "job,op,machine,start,end\n";
        for (int i = 0; i < count; ++i)
            out << schedule.get()[i].job << ',' << schedule.get()[i].op << ','
                << schedule.get()[i].machine << ',' << schedule.get()[i].start << ','
                << schedule.get()[i].end << '\n';
    }

    std::printf("makespan %lld\n", makespan);
    return 0;
}

struct TrainArgs {
    std::string out_dir;
    std::string config_file;
    std::vector<std::string> overrides;  // "key=value" lines, flags win over the file
};

int cmd_train(const TrainArgs& args) {
    // Later lines override earlier ones, so precedence is: built-in defaults,
    // then the config file, then explicit flags.
    std::string config = "threads=" + std::to_string(default_threads()) + "\n";
    if (!args.config_file.empty()) {
        std::ifstream in(args.config_file);
        if (!in) {
            std::fprintf(stderr, "error: cannot open %s\n", args.config_file.c_str());
            return 2;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        config += buf.str();
        if (!config.empty() && config.back() != '\n') config += '\n';
    }
    for (const std::string& line : args.overrides) config += line + "\n";

    std::printf("training into %s\n", args.out_dir.c_str());
    std::fputs(config.c_str(), stdout);
    const resched_status_t status = resched_train(
        config.c_str(), args.out_dir.c_str(),
        [](long long episode, long long makespan, void*) {
            if (episode % 1000 == 0)
                std::printf("episode %lld makespan %lld\n", episode, makespan);
        },
        nullptr);
    if (status != RESCHED_OK) return fail_with(status);
    std::printf("log written to %s/train_log.csv\n", args.out_dir.c_str());
    return 0;
}

struct BenchArgs {
    std::string dir;
    std::string methods;
    std::string ref_csv;
    std::string out_csv;
    int samples = 1;
    int threads = 0;
    std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& args) {
    char* raw_summary = nullptr;
    const resched_status_t status = resched_bench(
        args.dir.c_str(), args.methods.c_str(),
        args.ref_csv.empty() ? nullptr : args.ref_csv.c_str(),
        args.out_csv.empty() ? nullptr : args.out_csv.c_str(), args.samples,
        args.threads > 0 ? args.threads : default_threads(), args.seed, &raw_summary);
    StringPtr summary(raw_summary);
    if (summary) std::fputs(summary.get(), stdout);
    if (status != RESCHED_OK) return fail_with(status);
    if (!args.out_csv.empty()) std::printf("report written to %s\n", args.out_csv.c_str());
    return 0;
}

struct ValidateArgs {
    std::string instance;
    std::string schedule;
};

int cmd_validate(const ValidateArgs& args) {
    InstancePtr inst;
    if (load_instance_any(args.instance, inst) != RESCHED_OK) return 2;

    std::ifstream in(args.schedule);
    if (!in) {
        std::fprintf(stderr, "error: cannot open %s\n", args.schedule.c_str());
        return 2;
    }
    std::string line;
    if (!std::getline(in, line) || line != "job,op,machine,start,end") {
        std::fprintf(stderr, "error: %s: expected header job,op,machine,start,end\n",
                     args.schedule.c_str());
        return 2;
    }
    std::vector<resched_dispatch_t> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        resched_dispatch_t d;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lld,%lld", &d.job, &d.op, &d.machine,
                        &d.start, &d.end) != 5) {
            std::fprintf(stderr, "error: %s line %d: bad row\n", args.schedule.c_str(),
                         line_no);
            return 2;
        }
        rows.push_back(d);
    }

    char* raw_report = nullptr;
    const resched_status_t status = resched_validate(
        inst.get(), rows.empty() ? nullptr : rows.data(), int(rows.size()), &raw_report);
    StringPtr report(raw_report);
    if (status == RESCHED_OK) {
        std::printf("schedule valid (%d dispatches)\n", int(rows.size()));
        return 0;
    }
    if (report) std::fputs(report.get(), stderr);
    return fail_with(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"residual scheduling toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("generate", "write random instance files");
    cmd_gen->add_option("--jobs", gen.jobs, "job count");
    cmd_gen->add_option("--machines", gen.machines, "machine count");
    cmd_gen->add_option("--train-dist", gen.train_dist,
                        "sample sizes from the training distribution up to N M")
        ->expected(2)
        ->excludes("--jobs")
        ->excludes("--machines");
    cmd_gen->add_option("--count", gen.count, "number of instances")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--seed", gen.seed, "base seed; file i uses seed+i");
    cmd_gen->add_option("--kind", gen.kind, "jsp or fjsp")
        ->check(CLI::IsMember({"jsp", "fjsp"}));
    cmd_gen->add_option("--out", gen.out_dir, "output directory")->required();

    SolveArgs solve;
    CLI::App* cmd_slv = app.add_subcommand("solve", "schedule one instance");
    cmd_slv->add_option("--instance", solve.instance, "instance file")->required();
    cmd_slv->add_option("--policy", solve.policy,
                        "pdr:<mwkr|mor|spt|fifo>, model:<checkpoint>, or random");
    cmd_slv->add_option("--samples", solve.samples,
                        "model policies: best of this many sampled rollouts (0 = greedy)")
        ->check(CLI::NonNegativeNumber);
    cmd_slv->add_option("--seed", solve.seed, "sampling seed");
    cmd_slv->add_option("--gantt", solve.gantt, "write the schedule as CSV");

    TrainArgs train;
    CLI::App* cmd_trn = app.add_subcommand("train", "run the training loop");
    cmd_trn->add_option("--out", train.out_dir, "checkpoint/log directory")->required();
    cmd_trn->add_option("--config", train.config_file, "key=value config file");
    // Every flag mirrors a config key; explicit flags beat the file.
    const std::vector<std::pair<std::string, std::string>> train_keys = {
        {"--episodes", "episodes"},
        {"--jobs", "jobs"},
        {"--machines", "machines"},
        {"--kind", "kind"},
        {"--baseline", "baseline"},
        {"--entropy-coef", "entropy_coef"},
        {"--lr", "lr"},
        {"--lr-decay", "lr_decay"},
        {"--lr-decay-every", "lr_decay_every"},
        {"--beta1", "beta1"},
        {"--beta2", "beta2"},
        {"--adam-eps", "adam_eps"},
        {"--seed", "seed"},
        {"--checkpoint-every", "checkpoint_every"},
        {"--hidden", "hidden"},
        {"--threads", "threads"},
    };
    for (const auto& [flag, key] : train_keys) {
        const std::string name = key;
        cmd_trn->add_option_function<std::string>(
            flag,
            [&train, name](const std::string& value) {
                train.overrides.push_back(name + "=" + value);
            },
            "training config key '" + name + "'");
    }

    BenchArgs bench;
    CLI::App* cmd_bch = app.add_subcommand("bench", "run methods over an instance directory");
    cmd_bch->add_option("--dir", bench.dir, "directory of instance files")->required();
    cmd_bch->add_option("--methods", bench.methods, "comma-separated method specs")
        ->required();
    cmd_bch->add_option("--ref", bench.ref_csv, "reference makespan CSV");
    cmd_bch->add_option("--out", bench.out_csv, "per-instance report CSV");
    cmd_bch->add_option("--samples", bench.samples,
                        "model methods: best of this many sampled rollouts")
        ->check(CLI::PositiveNumber);
    cmd_bch->add_option("--threads", bench.threads, "worker threads (default: all cores)");
    cmd_bch->add_option("--seed", bench.seed, "seed for random/sampled methods");

    ValidateArgs val;
    CLI::App* cmd_val = app.add_subcommand("validate", "check a schedule CSV");
    cmd_val->add_option("--instance", val.instance, "instance file")->required();
    cmd_val->add_option("--schedule", val.schedule, "schedule CSV (job,op,machine,start,end)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (cmd_gen->parsed()) return cmd_generate(gen);
    if (cmd_slv->parsed()) return cmd_solve(solve);
    if (cmd_trn->parsed()) return cmd_train(train);
    if (cmd_bch->parsed()) return cmd_bench(bench);
    if (cmd_val->parsed()) return cmd_validate(val);
    return 1;
}
