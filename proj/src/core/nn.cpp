#include "core/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

static_assert(std::endian::native == std::endian::little,
              "checkpoint files are little-endian; big-endian hosts need byte swaps");

namespace resched {

namespace {

MlpParams make_mlp(int in, int hidden, int out) {
    MlpParams m;
    m.layer[0].w.setZero(hidden, in);
    m.layer[0].b.setZero(hidden);
    m.layer[1].w.setZero(hidden, hidden);
    m.layer[1].b.setZero(hidden);
    m.layer[2].w.setZero(out, hidden);
    m.layer[2].b.setZero(out);
    return m;
}

// Forward through one MLP, rows of x are independent items. Fills the trace
// when given one (backward needs the input and both rectified activations).
Eigen::MatrixXd mlp_forward(const MlpParams& p, const Eigen::MatrixXd& x, MlpTrace* t) {
    Eigen::MatrixXd a1 =
        ((x * p.layer[0].w.transpose()).rowwise() + p.layer[0].b.transpose()).cwiseMax(0.0);
    Eigen::MatrixXd a2 =
        ((a1 * p.layer[1].w.transpose()).rowwise() + p.layer[1].b.transpose()).cwiseMax(0.0);
    Eigen::MatrixXd y = (a2 * p.layer[2].w.transpose()).rowwise() + p.layer[2].b.transpose();
    if (t) {
        t->x = x;
        t->a1 = std::move(a1);
        t->a2 = std::move(a2);
    }
    return y;
}

// Reverse of mlp_forward: accumulates parameter gradients, returns dloss/dx.
Eigen::MatrixXd mlp_backward(const MlpParams& p, const MlpTrace& t, const Eigen::MatrixXd& dy,
                             MlpParams& g) {
    g.layer[2].w += dy.transpose() * t.a2;
    g.layer[2].b += dy.colwise().sum().transpose();
    Eigen::MatrixXd dz2 =
        ((t.a2.array() > 0.0).cast<double>() * (dy * p.layer[2].w).array()).matrix();
    g.layer[1].w += dz2.transpose() * t.a1;
    g.layer[1].b += dz2.colwise().sum().transpose();
    Eigen::MatrixXd dz1 =
        ((t.a1.array() > 0.0).cast<double>() * (dz2 * p.layer[1].w).array()).matrix();
    g.layer[0].w += dz1.transpose() * t.x;
    g.layer[0].b += dz1.colwise().sum().transpose();
    return dz1 * p.layer[0].w;
}

void zero_masked_rows(Eigen::MatrixXd& m, const Eigen::VectorXd& mask) {
    m.array().colwise() *= mask.array();
}

}  // namespace

PolicyParams make_params(int hidden, int n_layers) {
    if (hidden < 1 || n_layers < 1) throw std::invalid_argument("make_params: bad sizes");
    PolicyParams p;
    p.hidden = hidden;
    p.enc_op.w.setZero(hidden, kOpFeatureDim);
    p.enc_op.b.setZero(hidden);
    p.enc_mach.w.setZero(hidden, kMachineFeatureDim);
    p.enc_mach.b.setZero(hidden);
    p.layers.resize(n_layers);
    for (auto& l : p.layers) {
        l.mm = make_mlp(hidden, hidden, hidden);
        l.oo = make_mlp(hidden, hidden, hidden);
        l.om = make_mlp(hidden + kEdgeFeatureDim, hidden, hidden);
        l.mo = make_mlp(hidden + kEdgeFeatureDim, hidden, hidden);
    }
    p.score = make_mlp(2 * hidden, hidden, 1);
    return p;
}

PolicyParams init_params(Rng& rng, int hidden, int n_layers) {
    PolicyParams p = make_params(hidden, n_layers);
    // Fan-based uniform fill of each weight matrix, in the fixed visitation
    // order; biases and epsilons stay zero.
    for_each_param(p, [&](const std::string& name, double* data, long rows, long cols) {
        if (name.size() < 2 || name.compare(name.size() - 2, 2, ".w") != 0) return;
        const double limit = std::sqrt(6.0 / double(rows + cols));
        for (long i = 0; i < rows * cols; ++i) data[i] = (2.0 * rng.uniform01() - 1.0) * limit;
    });
    return p;
}

std::size_t param_count(const PolicyParams& params) {
    std::size_t n = 0;
    for_each_param(const_cast<PolicyParams&>(params),
                   [&](const std::string&, double*, long rows, long cols) {
                       n += std::size_t(rows) * std::size_t(cols);
                   });
    return n;
}

void add_scaled(PolicyParams& dst, const PolicyParams& src, double scale) {
    std::vector<std::pair<double*, std::size_t>> slots;
    for_each_param(dst, [&](const std::string&, double* data, long rows, long cols) {
        slots.emplace_back(data, std::size_t(rows) * std::size_t(cols));
    });
    std::size_t i = 0;
    for_each_param(const_cast<PolicyParams&>(src),
                   [&](const std::string&, double* data, long rows, long cols) {
                       const std::size_t n = std::size_t(rows) * std::size_t(cols);
                       if (i >= slots.size() || slots[i].second != n)
                           throw std::invalid_argument("add_scaled: parameter shapes differ");
                       double* out = slots[i].first;
                       for (std::size_t k = 0; k < n; ++k) out[k] += scale * data[k];
                       ++i;
                   });
    if (i != slots.size()) throw std::invalid_argument("add_scaled: parameter shapes differ");
}

void hgin_layer(const ResidualGraph& graph, const HginLayerParams& params,
                const Eigen::MatrixXd& h_op, const Eigen::MatrixXd& h_mach,
                Eigen::MatrixXd& h_op_out, Eigen::MatrixXd& h_mach_out,
                HginLayerTrace* trace) {
    const long d = h_op.cols();
    if (h_mach.cols() != d || params.mm.layer[0].w.cols() != d)
        throw std::invalid_argument("hgin_layer: embedding width mismatch");
    const int n = graph.n_ops;
    const int m = graph.n_machines;

    // Per-relation aggregated inputs. Cross relations concatenate the summed
    // edge feature after the summed neighbor embedding.
    Eigen::MatrixXd x_mm = (1.0 + params.eps_mm) * h_mach;

    Eigen::MatrixXd x_om = Eigen::MatrixXd::Zero(m, d + 1);
    Eigen::VectorXd om_mask = Eigen::VectorXd::Zero(m);
    for (int l = 0; l < m; ++l) {
        for (const auto& [u, e] : graph.om_in[l]) {
            x_om.row(l).head(d) += h_op.row(u);
            x_om(l, d) += e;
        }
        if (!graph.om_in[l].empty()) om_mask(l) = 1.0;
    }

    Eigen::MatrixXd x_oo = (1.0 + params.eps_oo) * h_op;
    for (int v = 0; v < n; ++v)
        for (int u : graph.oo_in[v]) x_oo.row(v) += h_op.row(u);

    Eigen::MatrixXd x_mo = Eigen::MatrixXd::Zero(n, d + 1);
    Eigen::VectorXd mo_mask = Eigen::VectorXd::Zero(n);
    for (int v = 0; v < n; ++v) {
        for (const auto& [l, e] : graph.mo_in[v]) {
            x_mo.row(v).head(d) += h_mach.row(l);
            x_mo(v, d) += e;
        }
        if (!graph.mo_in[v].empty()) mo_mask(v) = 1.0;
    }

    if (trace) {
        trace->h_op = h_op;
        trace->h_mach = h_mach;
        trace->om_mask = om_mask;
        trace->mo_mask = mo_mask;
    }

    // A node with no cross-relation neighbors gets no cross term at all (the
    // MLP of an empty sum would still leak its biases, so it is masked out).
    Eigen::MatrixXd om_out = mlp_forward(params.om, x_om, trace ? &trace->om : nullptr);
    zero_masked_rows(om_out, om_mask);
    h_mach_out = mlp_forward(params.mm, x_mm, trace ? &trace->mm : nullptr) + om_out;

    Eigen::MatrixXd mo_out = mlp_forward(params.mo, x_mo, trace ? &trace->mo : nullptr);
    zero_masked_rows(mo_out, mo_mask);
    h_op_out = mlp_forward(params.oo, x_oo, trace ? &trace->oo : nullptr) + mo_out;
}

namespace {

void forward_layers(const ResidualGraph& graph, const PolicyParams& params, ForwardTrace* trace,
                    Eigen::MatrixXd& h_op, Eigen::MatrixXd& h_mach) {
    if (graph.op_feat.cols() != params.enc_op.w.cols() ||
        graph.mach_feat.cols() != params.enc_mach.w.cols())
        throw std::invalid_argument("forward: feature width mismatch");

    h_op = (graph.op_feat * params.enc_op.w.transpose()).rowwise() + params.enc_op.b.transpose();
    h_mach =
        (graph.mach_feat * params.enc_mach.w.transpose()).rowwise() + params.enc_mach.b.transpose();

    if (trace) trace->layers.resize(params.layers.size());
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        Eigen::MatrixXd next_op, next_mach;
        hgin_layer(graph, params.layers[k], h_op, h_mach, next_op, next_mach,
                   trace ? &trace->layers[k] : nullptr);
        h_op = std::move(next_op);
        h_mach = std::move(next_mach);
    }
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> embed(const ResidualGraph& graph,
                                                  const PolicyParams& params) {
    Eigen::MatrixXd h_op, h_mach;
    forward_layers(graph, params, nullptr, h_op, h_mach);
    return {std::move(h_op), std::move(h_mach)};
}

ForwardTrace policy(const ResidualGraph& graph, const PolicyParams& params) {
    if (graph.candidate_index.empty()) throw std::invalid_argument("policy: no candidates");

    ForwardTrace t;
    t.graph = graph;
    forward_layers(graph, params, &t, t.h_op_out, t.h_mach_out);

    const long d = params.hidden;
    const long k = long(graph.candidate_index.size());
    Eigen::MatrixXd x(k, 2 * d);
    for (long i = 0; i < k; ++i) {
        const auto [l, v] = graph.candidate_index[std::size_t(i)];
        x.row(i).head(d) = t.h_mach_out.row(l);
        x.row(i).tail(d) = t.h_op_out.row(v);
    }
    t.scores = mlp_forward(params.score, x, &t.score).col(0);

    const double shift = t.scores.maxCoeff();
    Eigen::VectorXd z = (t.scores.array() - shift).exp();
    t.probs = z / z.sum();
    return t;
}

void backward(const PolicyParams& params, const ForwardTrace& trace, int action, double weight,
              double entropy_coef, PolicyGrads& grads) {
    const long k = trace.probs.size();
    if (action < 0 || action >= k) throw std::invalid_argument("backward: action out of range");
    const long d = params.hidden;
    const ResidualGraph& graph = trace.graph;

    // d(objective)/d(score_i) for  weight*log p[a] + c*H(p):
    //   weight*(1[i=a] - p_i) - c*p_i*(log p_i + H).
    double entropy = 0.0;
    for (long i = 0; i < k; ++i)
        if (trace.probs(i) > 0.0) entropy -= trace.probs(i) * std::log(trace.probs(i));
    Eigen::MatrixXd dscore(k, 1);
    for (long i = 0; i < k; ++i) {
        const double p = trace.probs(i);
        double ds = weight * ((i == action ? 1.0 : 0.0) - p);
        if (p > 0.0) ds -= entropy_coef * p * (std::log(p) + entropy);
        dscore(i, 0) = ds;
    }

    Eigen::MatrixXd dx_cand = mlp_backward(params.score, trace.score, dscore, grads.score);
    Eigen::MatrixXd d_op = Eigen::MatrixXd::Zero(graph.n_ops, d);
    Eigen::MatrixXd d_mach = Eigen::MatrixXd::Zero(graph.n_machines, d);
    for (long i = 0; i < k; ++i) {
        const auto [l, v] = graph.candidate_index[std::size_t(i)];
        d_mach.row(l) += dx_cand.row(i).head(d);
        d_op.row(v) += dx_cand.row(i).tail(d);
    }

    for (int kk = int(params.layers.size()) - 1; kk >= 0; --kk) {
        const HginLayerParams& lp = params.layers[kk];
        HginLayerParams& lg = grads.layers[kk];
        const HginLayerTrace& lt = trace.layers[kk];
        Eigen::MatrixXd d_op_in = Eigen::MatrixXd::Zero(graph.n_ops, d);
        Eigen::MatrixXd d_mach_in = Eigen::MatrixXd::Zero(graph.n_machines, d);

        // Machine output = MLP_MM((1+eps)h_mach) + mask . MLP_OM(sum).
        Eigen::MatrixXd dx_mm = mlp_backward(lp.mm, lt.mm, d_mach, lg.mm);
        d_mach_in += (1.0 + lp.eps_mm) * dx_mm;
        lg.eps_mm += (dx_mm.array() * lt.h_mach.array()).sum();

        Eigen::MatrixXd dy_om = d_mach;
        zero_masked_rows(dy_om, lt.om_mask);
        Eigen::MatrixXd dx_om = mlp_backward(lp.om, lt.om, dy_om, lg.om);
        for (int l = 0; l < graph.n_machines; ++l) {
            if (lt.om_mask(l) == 0.0) continue;
            for (const auto& [u, e] : graph.om_in[l]) d_op_in.row(u) += dx_om.row(l).head(d);
        }

        // Operation output = MLP_OO((1+eps)h_v + sum same-job) + mask . MLP_MO(sum).
        Eigen::MatrixXd dx_oo = mlp_backward(lp.oo, lt.oo, d_op, lg.oo);
        d_op_in += (1.0 + lp.eps_oo) * dx_oo;
        lg.eps_oo += (dx_oo.array() * lt.h_op.array()).sum();
        for (int v = 0; v < graph.n_ops; ++v)
            for (int u : graph.oo_in[v]) d_op_in.row(u) += dx_oo.row(v);

        Eigen::MatrixXd dy_mo = d_op;
        zero_masked_rows(dy_mo, lt.mo_mask);
        Eigen::MatrixXd dx_mo = mlp_backward(lp.mo, lt.mo, dy_mo, lg.mo);
        for (int v = 0; v < graph.n_ops; ++v) {
            if (lt.mo_mask(v) == 0.0) continue;
            for (const auto& [l, e] : graph.mo_in[v]) d_mach_in.row(l) += dx_mo.row(v).head(d);
        }

        d_op = std::move(d_op_in);
        d_mach = std::move(d_mach_in);
    }

    grads.enc_op.w += d_op.transpose() * graph.op_feat;
    grads.enc_op.b += d_op.colwise().sum().transpose();
    grads.enc_mach.w += d_mach.transpose() * graph.mach_feat;
    grads.enc_mach.b += d_mach.colwise().sum().transpose();
}

// ---- Checkpoints --------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'R', 'S', 'C', 'H', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw CheckpointError("checkpoint truncated");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

}  // namespace

void save_checkpoint(const PolicyParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + path + " for writing");

    std::uint32_t n_blocks = 0;
    auto& p = const_cast<PolicyParams&>(params);
    for_each_param(p, [&](const std::string&, double*, long, long) { ++n_blocks; });

    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, std::uint32_t(params.layers.size()));
    put_u32(out, std::uint32_t(params.hidden));
    put_u32(out, std::uint32_t(kOpFeatureDim));
    put_u32(out, std::uint32_t(kMachineFeatureDim));
    put_u32(out, n_blocks);

    for_each_param(p, [&](const std::string& name, double* data, long rows, long cols) {
        put_u32(out, std::uint32_t(name.size()));
        out.write(name.data(), long(name.size()));
        put_u32(out, std::uint32_t(rows));
        put_u32(out, std::uint32_t(cols));
        // Blocks are row-major in the file; Eigen storage is column-major.
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c)
                out.write(reinterpret_cast<const char*>(&data[c * rows + r]), 8);
    });
    if (!out) throw CheckpointError("write failed for " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open " + path);

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw CheckpointError("not a checkpoint file: bad magic");
    if (get_u32(in) != kVersion) throw CheckpointError("unsupported checkpoint version");
    const std::uint32_t n_layers = get_u32(in);
    const std::uint32_t hidden = get_u32(in);
    if (get_u32(in) != std::uint32_t(kOpFeatureDim) ||
        get_u32(in) != std::uint32_t(kMachineFeatureDim))
        throw CheckpointError("checkpoint feature widths do not match this build");
    const std::uint32_t n_blocks = get_u32(in);
    if (n_layers < 1 || hidden < 1) throw CheckpointError("checkpoint header has empty network");

    struct Block {
        std::uint32_t rows = 0, cols = 0;
        std::vector<double> data;  // row-major
    };
    std::map<std::string, Block> blocks;
    for (std::uint32_t i = 0; i < n_blocks; ++i) {
        const std::uint32_t name_len = get_u32(in);
        if (name_len == 0 || name_len > 256) throw CheckpointError("implausible block name");
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        Block b;
        b.rows = get_u32(in);
        b.cols = get_u32(in);
        b.data.resize(std::size_t(b.rows) * b.cols);
        in.read(reinterpret_cast<char*>(b.data.data()), long(b.data.size() * 8));
        if (!in) throw CheckpointError("checkpoint truncated in block " + name);
        if (!blocks.emplace(std::move(name), std::move(b)).second)
            throw CheckpointError("duplicate checkpoint block");
    }

    PolicyParams params = make_params(int(hidden), int(n_layers));
    for_each_param(params, [&](const std::string& name, double* data, long rows, long cols) {
        auto it = blocks.find(name);
        if (it == blocks.end()) throw CheckpointError("checkpoint misses block " + name);
        const Block& b = it->second;
        if (long(b.rows) != rows || long(b.cols) != cols)
            throw CheckpointError("checkpoint block " + name + " has wrong shape");
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c) data[c * rows + r] = b.data[std::size_t(r) * cols + c];
        blocks.erase(it);
    });
    if (!blocks.empty())
        throw CheckpointError("checkpoint carries unknown block " + blocks.begin()->first);
    return params;
}

}  // namespace resched
