#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "timelyrec/common.hpp"

namespace timelyrec {

// Eager reverse-mode tape over dense 64-bit vectors. Values are computed
// when an op is recorded; backward() replays the tape in reverse, which is
// already a topological order. One tape is confined to one thread.
class Tape {
public:
    using NodeId = int;

    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    bool grad_enabled() const { return grad_enabled_; }
    std::size_t size() const { return nodes_.size(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }

    const Vec& value(NodeId id) const { return nodes_[check(id)].value; }
    const Vec& grad(NodeId id) const;

    NodeId constant(Vec v);
    // Tracked input; the caller reads grad(id) after backward().
    NodeId leaf(const double* data, std::size_t n);
    NodeId leaf(const Vec& v) { return leaf(v.data(), v.size()); }

    NodeId matvec(NodeId m, NodeId v, int rows, int cols);
    NodeId hadamard(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId v, double c);
    NodeId scale_by(NodeId v, NodeId scalar);
    NodeId dot(NodeId a, NodeId b);
    NodeId concat(const std::vector<NodeId>& xs);
    NodeId softmax(NodeId v);
    NodeId sigmoid(NodeId v);
    NodeId relu(NodeId v);
    NodeId mean_of(const std::vector<NodeId>& xs);
    // Scalar cosine similarity; throws NumericError on a zero-norm input.
    NodeId cosine(NodeId a, NodeId b);
    // sum_k weights[k] * xs[k]; weights is a node of length xs.size().
    NodeId linear_comb(NodeId weights, const std::vector<NodeId>& xs);
    // W x + b with W stored row-major (out_dim x in_dim).
    NodeId affine(NodeId w, NodeId b, NodeId x, int out_dim, int in_dim);
    // Inverted dropout: zero with probability p, survivors scaled by 1/(1-p).
    // Identity when training is false.
    NodeId dropout(NodeId v, double p, bool training, Rng& rng);
    // Binary cross entropy of sigmoid(logit) against label y in {0,1}.
    // Forward value clamps the probability to [1e-12, 1-1e-12]; the gradient
    // w.r.t. the logit is sigmoid(logit) - y.
    NodeId bce_with_logit(NodeId logit, double y);

    // Reverse accumulation from a scalar output. Throws ContractError if the
    // output is not a scalar or gradients are disabled, NumericError if any
    // accumulated gradient is non-finite.
    void backward(NodeId out);

private:
    struct Node {
        Vec value;
        Vec grad;
        std::function<void(Tape&, const Node&)> back;
    };

    NodeId check(NodeId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw ContractError("Tape: invalid node id");
        return id;
    }

    NodeId push(Vec value, std::function<void(Tape&, const Node&)> back);

    Vec& grad_mut(NodeId id) { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::vector<Node> nodes_;
    bool grad_enabled_;
    bool backward_done_ = false;
};

// Clamped mean binary cross entropy on plain values (no gradients); the
// reference formula used by tests and reporting.
double bce_value(double y_hat, double y);

}  // namespace timelyrec
