#include "core/instance.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "core/error.hpp"

namespace resched {

namespace {

struct Token {
    long long value;
    int col;  // 1-based column of the token's first character
};

// Splits text into lines, dropping a trailing '\r' so CRLF files parse too.
std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) {
        if (cur.back() == '\r') cur.pop_back();
        lines.push_back(cur);
    }
    return lines;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

// Tokenizes one line into integers, recording the column of each token.
std::vector<Token> line_ints(const std::string& line, int line_no) {
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::string word = line.substr(start, i - start);
        try {
            std::size_t used = 0;
            long long v = std::stoll(word, &used);
            if (used != word.size()) throw std::invalid_argument(word);
            toks.push_back({v, int(start) + 1});
        } catch (const std::exception&) {
            throw ParseError("expected an integer, got '" + word + "'", line_no,
                             int(start) + 1);
        }
    }
    return toks;
}

// Line-oriented reader over the instance text; skips blank lines.
class Lines {
public:
    explicit Lines(const std::string& text) : lines_(split_lines(text)) {}

    // Next non-blank line, or false at end of input.
    bool next(std::string& out, int& line_no) {
        while (pos_ < lines_.size()) {
            ++line_no_;
            if (!blank(lines_[pos_])) {
                out = lines_[pos_++];
                line_no = line_no_;
                return true;
            }
            ++pos_;
        }
        return false;
    }

    int last_line_no() const { return line_no_; }

private:
    std::vector<std::string> lines_;
    std::size_t pos_ = 0;
    int line_no_ = 0;
};

// Reads the two leading header integers; everything after them on the header
// line is ignored (Taillard files carry seeds/bounds there, FJSP files an
// average-flexibility field that is often fractional).
void read_header(Lines& in, int& n, int& m, int& line_no) {
    std::string line;
    if (!in.next(line, line_no)) throw ParseError("empty input, expected header", 1);
    std::istringstream ss(line);
    if (!(ss >> n >> m))
        throw ParseError("header must start with job and machine counts", line_no);
    if (n < 1 || m < 1)
        throw ParseError("job and machine counts must be positive", line_no);
}

std::string require_line(Lines& in, int& line_no, const std::string& what) {
    std::string line;
    if (!in.next(line, line_no))
        throw ParseError("unexpected end of input, expected " + what,
                         in.last_line_no() + 1);
    return line;
}

int checked_machine(long long raw, int base, int n_machines, int line_no, int col) {
    const long long id = raw - base;
    if (id < 0 || id >= n_machines)
        throw ParseError("machine index " + std::to_string(raw) + " out of range", line_no,
                         col);
    return int(id);
}

int checked_duration(long long raw, int line_no, int col) {
    if (raw < 1)
        throw ParseError("duration must be a positive integer, got " + std::to_string(raw),
                         line_no, col);
    if (raw > 1'000'000'000)
        throw ParseError("duration " + std::to_string(raw) + " is implausibly large",
                         line_no, col);
    return int(raw);
}

}  // namespace

int Instance::max_option_duration() const {
    int best = 0;
    for (const auto& job : jobs)
        for (const auto& op : job) best = std::max(best, op.max_duration());
    return best;
}

void Instance::check() const {
    if (n_jobs != int(jobs.size())) throw std::invalid_argument("job count mismatch");
    if (n_jobs < 1 || n_machines < 1)
        throw std::invalid_argument("instance must have at least one job and machine");
    bool all_single = true;
    for (int j = 0; j < n_jobs; ++j) {
        if (jobs[j].empty()) throw std::invalid_argument("job without operations");
        for (int i = 0; i < int(jobs[j].size()); ++i) {
            const OperationSpec& op = jobs[j][i];
            if (op.job_id != j || op.index_in_job != i)
                throw std::invalid_argument("operation ids inconsistent with position");
            if (op.options.empty())
                throw std::invalid_argument("operation without processing options");
            all_single = all_single && op.options.size() == 1;
            std::vector<bool> seen(n_machines, false);
            for (const auto& o : op.options) {
                if (o.machine_id < 0 || o.machine_id >= n_machines)
                    throw std::invalid_argument("machine id out of range");
                if (o.duration < 1) throw std::invalid_argument("non-positive duration");
                if (seen[o.machine_id])
                    throw std::invalid_argument("duplicate machine within an operation");
                seen[o.machine_id] = true;
            }
        }
    }
    if ((kind == InstanceKind::JSP) != all_single)
        throw std::invalid_argument("kind flag inconsistent with option counts");
}

// ---- Parsers -----------------------------------------------------------------

Instance parse_taillard_jsp(const std::string& text) {
    Lines in(text);
    int n = 0, m = 0, line_no = 0;
    read_header(in, n, m, line_no);

    // n rows of durations, then n rows of machines; rows must be exactly m wide,
    // which is what rejects ragged instances in this format.
    std::vector<std::vector<int>> dur(n);
    for (int j = 0; j < n; ++j) {
        const std::string line = require_line(in, line_no, "a duration row");
        const auto toks = line_ints(line, line_no);
        if (int(toks.size()) != m)
            throw ParseError("duration row has " + std::to_string(toks.size()) +
                                 " entries, expected " + std::to_string(m),
                             line_no);
        for (const Token& t : toks)
            dur[j].push_back(checked_duration(t.value, line_no, t.col));
    }

    Instance inst;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.kind = InstanceKind::JSP;
    inst.jobs.assign(n, {});
    for (int j = 0; j < n; ++j) {
        const std::string line = require_line(in, line_no, "a machine row");
        const auto toks = line_ints(line, line_no);
        if (int(toks.size()) != m)
            throw ParseError("machine row has " + std::to_string(toks.size()) +
                                 " entries, expected " + std::to_string(m),
                             line_no);
        std::vector<bool> used(m, false);
        for (int i = 0; i < m; ++i) {
            const int mach = checked_machine(toks[i].value, 1, m, line_no, toks[i].col);
            if (used[mach])
                throw ParseError("machine " + std::to_string(toks[i].value) +
                                     " appears twice in one job",
                                 line_no, toks[i].col);
            used[mach] = true;
            inst.jobs[j].push_back({j, i, {{mach, dur[j][i]}}});
        }
    }
    inst.check();
    return inst;
}

Instance parse_orlib_jsp(const std::string& text) {
    Lines in(text);
    int n = 0, m = 0, line_no = 0;
    read_header(in, n, m, line_no);

    Instance inst;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.kind = InstanceKind::JSP;
    inst.jobs.assign(n, {});
    for (int j = 0; j < n; ++j) {
        const std::string line = require_line(in, line_no, "a job line");
        const auto toks = line_ints(line, line_no);
        if (toks.empty()) throw ParseError("job line without operations", line_no);
        if (toks.size() % 2 != 0)
            throw ParseError("job line has an odd token count; expected machine/duration pairs",
                             line_no);
        for (std::size_t p = 0; p < toks.size(); p += 2) {
            const int mach = checked_machine(toks[p].value, 0, m, line_no, toks[p].col);
            const int d = checked_duration(toks[p + 1].value, line_no, toks[p + 1].col);
            inst.jobs[j].push_back({j, int(p / 2), {{mach, d}}});
        }
    }
    inst.check();
    return inst;
}

Instance parse_fjsp(const std::string& text) {
    Lines in(text);
    int n = 0, m = 0, line_no = 0;
    read_header(in, n, m, line_no);

    Instance inst;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.jobs.assign(n, {});
    bool all_single = true;
    for (int j = 0; j < n; ++j) {
        const std::string line = require_line(in, line_no, "a job line");
        const auto toks = line_ints(line, line_no);
        std::size_t p = 0;
        auto take = [&](const std::string& what) -> const Token& {
            if (p >= toks.size())
                throw ParseError("job line truncated, expected " + what, line_no);
            return toks[p++];
        };
        const long long k = take("operation count").value;
        if (k < 1) throw ParseError("job must have at least one operation", line_no);
        for (int i = 0; i < k; ++i) {
            const Token& ct = take("option count");
            if (ct.value < 1)
                throw ParseError("operation must have at least one option", line_no, ct.col);
            OperationSpec op{j, i, {}};
            std::vector<bool> seen(m, false);
            for (int c = 0; c < ct.value; ++c) {
                const Token& mt = take("machine index");
                const Token& dt = take("duration");
                const int mach = checked_machine(mt.value, 1, m, line_no, mt.col);
                if (seen[mach])
                    throw ParseError("machine " + std::to_string(mt.value) +
                                         " listed twice for one operation",
                                     line_no, mt.col);
                seen[mach] = true;
                op.options.push_back({mach, checked_duration(dt.value, line_no, dt.col)});
            }
            all_single = all_single && op.options.size() == 1;
            inst.jobs[j].push_back(std::move(op));
        }
        if (p != toks.size())
            throw ParseError("trailing tokens after the last operation", line_no,
                             toks[p].col);
    }
    inst.kind = all_single ? InstanceKind::JSP : InstanceKind::FJSP;
    inst.check();
    return inst;
}

Instance parse(const std::string& text, FileFormat format) {
    switch (format) {
        case FileFormat::Taillard: return parse_taillard_jsp(text);
        case FileFormat::Orlib: return parse_orlib_jsp(text);
        case FileFormat::Fjsp: return parse_fjsp(text);
    }
    throw std::invalid_argument("unknown format");
}

// ---- Serialization -----------------------------------------------------------

std::string serialize(const Instance& instance, FileFormat format) {
    instance.check();
    std::ostringstream out;
    switch (format) {
        case FileFormat::Taillard: {
            if (instance.kind != InstanceKind::JSP)
                throw std::invalid_argument("Taillard format holds JSP instances only");
            for (const auto& job : instance.jobs)
                if (int(job.size()) != instance.n_machines)
                    throw std::invalid_argument(
                        "Taillard format requires every job to have exactly m operations");
            out << instance.n_jobs << ' ' << instance.n_machines << '\n';
            for (const auto& job : instance.jobs) {
                for (std::size_t i = 0; i < job.size(); ++i)
                    out << (i ? " " : "") << job[i].options.front().duration;
                out << '\n';
            }
            for (const auto& job : instance.jobs) {
                for (std::size_t i = 0; i < job.size(); ++i)
                    out << (i ? " " : "") << job[i].options.front().machine_id + 1;
                out << '\n';
            }
            break;
        }
        case FileFormat::Orlib: {
            if (instance.kind != InstanceKind::JSP)
                throw std::invalid_argument("ORLib format holds JSP instances only");
            out << instance.n_jobs << ' ' << instance.n_machines << '\n';
            for (const auto& job : instance.jobs) {
                for (std::size_t i = 0; i < job.size(); ++i) {
                    const auto& o = job[i].options.front();
                    out << (i ? " " : "") << o.machine_id << ' ' << o.duration;
                }
                out << '\n';
            }
            break;
        }
        case FileFormat::Fjsp: {
            out << instance.n_jobs << ' ' << instance.n_machines << '\n';
            for (const auto& job : instance.jobs) {
                out << job.size();
                for (const auto& op : job) {
                    out << ' ' << op.options.size();
                    for (const auto& o : op.options)
                        out << ' ' << o.machine_id + 1 << ' ' << o.duration;
                }
                out << '\n';
            }
            break;
        }
    }
    return out.str();
}

bool format_from_name(const std::string& name, FileFormat& out) {
    if (name == "taillard") out = FileFormat::Taillard;
    else if (name == "orlib") out = FileFormat::Orlib;
    else if (name == "fjsp") out = FileFormat::Fjsp;
    else return false;
    return true;
}

// ---- Generators --------------------------------------------------------------

namespace {

std::vector<int> random_permutation(int m, Rng& rng) {
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    for (int i = m - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);
    return perm;
}

}  // namespace

Instance generate_jsp(int n, int m, Rng& rng) {
    if (n < 1 || m < 1) throw std::invalid_argument("need n >= 1 and m >= 1");
    Instance inst;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.kind = InstanceKind::JSP;
    inst.jobs.assign(n, {});
    for (int j = 0; j < n; ++j) {
        const std::vector<int> order = random_permutation(m, rng);
        for (int i = 0; i < m; ++i)
            inst.jobs[j].push_back({j, i, {{order[i], rng.uniform_int(1, 99)}}});
    }
    return inst;
}

Instance generate_fjsp(int n, int m, Rng& rng) {
    if (n < 1 || m < 1) throw std::invalid_argument("need n >= 1 and m >= 1");
    Instance inst;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.kind = InstanceKind::FJSP;
    inst.jobs.assign(n, {});
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) {
            // q distinct eligible machines via a partial shuffle, then sorted so
            // the option list order is canonical.
            const int q = rng.uniform_int(1, m);
            std::vector<int> pool(m);
            for (int x = 0; x < m; ++x) pool[x] = x;
            OperationSpec op{j, i, {}};
            for (int c = 0; c < q; ++c) {
                const int pick = rng.uniform_int(c, m - 1);
                std::swap(pool[c], pool[pick]);
                op.options.push_back({pool[c], rng.uniform_int(1, 99)});
            }
            std::sort(op.options.begin(), op.options.end(),
                      [](const ProcessingOption& a, const ProcessingOption& b) {
                          return a.machine_id < b.machine_id;
                      });
            inst.jobs[j].push_back(std::move(op));
        }
    }
    // A single-option draw everywhere would make this a JSP by definition.
    bool all_single = true;
    for (const auto& job : inst.jobs)
        for (const auto& op : job) all_single = all_single && op.options.size() == 1;
    if (all_single) inst.kind = InstanceKind::JSP;
    return inst;
}

Instance generate_training_instance(int max_jobs, int max_machines, InstanceKind kind,
                                    Rng& rng) {
    if (max_jobs < 3 || max_machines < 3)
        throw std::invalid_argument("training distribution needs bounds >= 3");
    const int n = rng.uniform_int(3, max_jobs);
    const int m = std::min(rng.uniform_int(3, n), max_machines);
    return kind == InstanceKind::JSP ? generate_jsp(n, m, rng) : generate_fjsp(n, m, rng);
}

namespace {

// Taillard's portable pseudo-random sequence ("Benchmarks for basic scheduling
// problems", EJOR 64, 1993). Integer arithmetic must be exactly this: the
// published benchmark instances are defined by it.
int taillard_unif(std::int32_t& seed, int low, int high) {
    constexpr std::int32_t m = 2147483647, a = 16807, b = 127773, c = 2836;
    const std::int32_t k = seed / b;
    seed = a * (seed % b) - k * c;
    if (seed < 0) seed += m;
    const double value_0_1 = seed / double(m);
    return low + int(value_0_1 * (high - low + 1));
}

}  // namespace

Instance generate_taillard_jsp(int n, int m, std::int32_t time_seed,
                               std::int32_t machine_seed) {
    if (n < 1 || m < 1) throw std::invalid_argument("need n >= 1 and m >= 1");
    std::vector<std::vector<int>> dur(n, std::vector<int>(m));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) dur[j][i] = taillard_unif(time_seed, 1, 99);

    Instance inst;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.kind = InstanceKind::JSP;
    inst.jobs.assign(n, {});
    for (int j = 0; j < n; ++j) {
        std::vector<int> mach(m);
        for (int i = 0; i < m; ++i) mach[i] = i;
        for (int i = 0; i < m; ++i)
            std::swap(mach[i], mach[taillard_unif(machine_seed, i, m - 1)]);
        for (int i = 0; i < m; ++i) inst.jobs[j].push_back({j, i, {{mach[i], dur[j][i]}}});
    }
    return inst;
}

}  // namespace resched
