#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/rng.hpp"

namespace resched {

// y = W x + b with W stored (out x in).
struct Linear {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
};

// Two rectified hidden layers of the shared width followed by a linear output.
struct MlpParams {
    std::array<Linear, 3> layer;
};

// One message-passing layer: a GIN-style update per relation. Machine nodes
// combine MM (self) with OM (incoming operation messages, edge feature
// concatenated); operation nodes combine OO (self + same-job operations) with
// MO (incoming machine messages, edge feature concatenated). The epsilons of
// the cross relations multiply a self term those relations do not have, so
// eps_om and eps_mo never enter the forward pass; they stay in the parameter
// set so every relation is shaped alike in checkpoints.
struct HginLayerParams {
    MlpParams mm, oo, om, mo;
    double eps_mm = 0.0, eps_oo = 0.0, eps_om = 0.0, eps_mo = 0.0;
};

struct PolicyParams {
    int hidden = 0;
    Linear enc_op;    // kOpFeatureDim -> hidden
    Linear enc_mach;  // kMachineFeatureDim -> hidden
    std::vector<HginLayerParams> layers;
    MlpParams score;  // 2*hidden -> hidden -> hidden -> 1
};

// Gradients use the exact same shapes.
using PolicyGrads = PolicyParams;

// All tensors allocated with the right shapes, every entry zero.
PolicyParams make_params(int hidden, int n_layers = 3);

// Fan-based uniform initialization for the weight matrices; biases and
// epsilons start at zero. Deterministic under the seed.
PolicyParams init_params(Rng& rng, int hidden = 256, int n_layers = 3);

// Visits every parameter tensor as (name, data pointer, rows, cols) in a fixed
// order shared by checkpoints, the optimizer, and the gradient check. Epsilons
// appear as 1x1 blocks. Eigen matrices are visited over their full storage,
// so rows*cols doubles live at the pointer.
template <class Params, class Fn>
void for_each_param(Params& p, Fn&& fn) {
    auto mat = [&](const std::string& name, Eigen::MatrixXd& m) {
        fn(name, m.data(), long(m.rows()), long(m.cols()));
    };
    auto vec = [&](const std::string& name, Eigen::VectorXd& v) {
        fn(name, v.data(), long(v.size()), 1L);
    };
    auto mlp = [&](const std::string& prefix, MlpParams& m) {
        for (int i = 0; i < 3; ++i) {
            mat(prefix + ".l" + std::to_string(i) + ".w", m.layer[i].w);
            vec(prefix + ".l" + std::to_string(i) + ".b", m.layer[i].b);
        }
    };
    mat("enc_op.w", p.enc_op.w);
    vec("enc_op.b", p.enc_op.b);
    mat("enc_mach.w", p.enc_mach.w);
    vec("enc_mach.b", p.enc_mach.b);
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        const std::string h = "hgin" + std::to_string(k);
        mlp(h + ".mm", p.layers[k].mm);
        mlp(h + ".oo", p.layers[k].oo);
        mlp(h + ".om", p.layers[k].om);
        mlp(h + ".mo", p.layers[k].mo);
        fn(h + ".eps_mm", &p.layers[k].eps_mm, 1L, 1L);
        fn(h + ".eps_oo", &p.layers[k].eps_oo, 1L, 1L);
        fn(h + ".eps_om", &p.layers[k].eps_om, 1L, 1L);
        fn(h + ".eps_mo", &p.layers[k].eps_mo, 1L, 1L);
    }
    mlp("score", p.score);
}

std::size_t param_count(const PolicyParams& p);

// dst += scale * src over every parameter; shapes must match.
void add_scaled(PolicyParams& dst, const PolicyParams& src, double scale);

// ---- Forward pass -------------------------------------------------------------

// Cached inputs and hidden activations of one MLP application (rows = nodes).
struct MlpTrace {
    Eigen::MatrixXd x, a1, a2;
};

struct HginLayerTrace {
    Eigen::MatrixXd h_op, h_mach;        // layer inputs
    MlpTrace mm, oo, om, mo;             // per-relation MLP caches
    Eigen::VectorXd om_mask, mo_mask;    // 1 where the cross relation has neighbors
};

// Everything backward() needs to replay the episode step exactly.
struct ForwardTrace {
    ResidualGraph graph;
    std::vector<HginLayerTrace> layers;
    Eigen::MatrixXd h_op_out, h_mach_out;  // final embeddings
    MlpTrace score;                        // rows = candidates, x = [h_mach | h_op]
    Eigen::VectorXd scores;
    Eigen::VectorXd probs;
};

// One message-passing step on explicit embeddings; exposed for the
// pencil-and-paper oracle tests. Outputs replace the inputs wholesale.
void hgin_layer(const ResidualGraph& graph, const HginLayerParams& params,
                const Eigen::MatrixXd& h_op, const Eigen::MatrixXd& h_mach,
                Eigen::MatrixXd& h_op_out, Eigen::MatrixXd& h_mach_out,
                HginLayerTrace* trace = nullptr);

// Input encoders followed by every message-passing layer; returns the final
// (operation, machine) embeddings.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> embed(const ResidualGraph& graph,
                                                  const PolicyParams& params);

// Scores every candidate pair through the score head and softmaxes them.
// Throws std::invalid_argument when the graph has no candidates.
ForwardTrace policy(const ResidualGraph& graph, const PolicyParams& params);

// Accumulates into `grads` the exact gradient of
//     weight * log p[action] + entropy_coef * H(p)
// with respect to every parameter, where p is trace.probs. Callers sum several
// steps by passing the same accumulator.
void backward(const PolicyParams& params, const ForwardTrace& trace, int action,
              double weight, double entropy_coef, PolicyGrads& grads);

// ---- Checkpoints --------------------------------------------------------------

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Versioned container: magic "RSCHKPT\0"; little-endian u32 header (version,
// layer count, hidden width, op/machine feature dims, block count); then per
// tensor a named block of row-major little-endian doubles.
void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);

}  // namespace resched
