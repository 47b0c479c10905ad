#include "timelyrec/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace timelyrec {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw ContractError(msg);
}

}  // namespace

const Vec& Tape::grad(NodeId id) const {
    if (!backward_done_)
        throw ContractError("Tape::grad: backward has not been run");
    return nodes_[check(id)].grad;
}

Tape::NodeId Tape::push(Vec value, std::function<void(Tape&, const Node&)> back) {
    Node n;
    n.value = std::move(value);
    if (grad_enabled_) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::constant(Vec v) { return push(std::move(v), nullptr); }

Tape::NodeId Tape::leaf(const double* data, std::size_t n) {
    return push(Vec(data, data + n), nullptr);
}

Tape::NodeId Tape::matvec(NodeId m, NodeId v, int rows, int cols) {
    check(m);
    check(v);
    const Vec& mv = nodes_[m].value;
    const Vec& vv = nodes_[v].value;
    require(static_cast<int>(mv.size()) == rows * cols &&
                static_cast<int>(vv.size()) == cols,
            "matvec: shape mismatch");
    Vec out(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        const double* row = mv.data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) s += row[c] * vv[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
    }
    return push(std::move(out), [m, v, rows, cols](Tape& t, const Node& self) {
        const Vec& g = self.grad;
        const Vec& mv = t.nodes_[m].value;
        const Vec& vv = t.nodes_[v].value;
        Vec& gm = t.grad_mut(m);
        Vec& gv = t.grad_mut(v);
        for (int r = 0; r < rows; ++r) {
            const double gr = g[static_cast<std::size_t>(r)];
            double* gmrow = gm.data() + static_cast<std::size_t>(r) * cols;
            const double* mrow = mv.data() + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) {
                gmrow[c] += gr * vv[static_cast<std::size_t>(c)];
                gv[static_cast<std::size_t>(c)] += gr * mrow[c];
            }
        }
    });
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
    check(a);
    check(b);
    const Vec& av = nodes_[a].value;
    const Vec& bv = nodes_[b].value;
    require(av.size() == bv.size(), "hadamard: shape mismatch");
    Vec out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
    return push(std::move(out), [a, b](Tape& t, const Node& self) {
        const Vec& av = t.nodes_[a].value;
        const Vec& bv = t.nodes_[b].value;
        Vec& ga = t.grad_mut(a);
        Vec& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < av.size(); ++i) {
            ga[i] += self.grad[i] * bv[i];
            gb[i] += self.grad[i] * av[i];
        }
    });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    check(a);
    check(b);
    const Vec& av = nodes_[a].value;
    const Vec& bv = nodes_[b].value;
    require(av.size() == bv.size(), "add: shape mismatch");
    Vec out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
    return push(std::move(out), [a, b](Tape& t, const Node& self) {
        Vec& ga = t.grad_mut(a);
        Vec& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            ga[i] += self.grad[i];
            gb[i] += self.grad[i];
        }
    });
}

Tape::NodeId Tape::scale(NodeId v, double c) {
    check(v);
    Vec out = nodes_[v].value;
    for (double& x : out) x *= c;
    return push(std::move(out), [v, c](Tape& t, const Node& self) {
        Vec& gv = t.grad_mut(v);
        for (std::size_t i = 0; i < self.grad.size(); ++i) gv[i] += c * self.grad[i];
    });
}

Tape::NodeId Tape::scale_by(NodeId v, NodeId scalar) {
    check(v);
    check(scalar);
    require(nodes_[scalar].value.size() == 1, "scale_by: scalar node expected");
    const double s = nodes_[scalar].value[0];
    Vec out = nodes_[v].value;
    for (double& x : out) x *= s;
    return push(std::move(out), [v, scalar, s](Tape& t, const Node& self) {
        const Vec& vv = t.nodes_[v].value;
        Vec& gv = t.grad_mut(v);
        Vec& gs = t.grad_mut(scalar);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            gv[i] += s * self.grad[i];
            gs[0] += vv[i] * self.grad[i];
        }
    });
}

Tape::NodeId Tape::dot(NodeId a, NodeId b) {
    check(a);
    check(b);
    const Vec& av = nodes_[a].value;
    const Vec& bv = nodes_[b].value;
    require(av.size() == bv.size(), "dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    return push(Vec{s}, [a, b](Tape& t, const Node& self) {
        const double g = self.grad[0];
        const Vec& av = t.nodes_[a].value;
        const Vec& bv = t.nodes_[b].value;
        Vec& ga = t.grad_mut(a);
        Vec& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < av.size(); ++i) {
            ga[i] += g * bv[i];
            gb[i] += g * av[i];
        }
    });
}

Tape::NodeId Tape::concat(const std::vector<NodeId>& xs) {
    require(!xs.empty(), "concat: empty input list");
    std::size_t total = 0;
    for (NodeId x : xs) total += nodes_[check(x)].value.size();
    Vec out;
    out.reserve(total);
    for (NodeId x : xs)
        out.insert(out.end(), nodes_[x].value.begin(), nodes_[x].value.end());
    return push(std::move(out), [xs](Tape& t, const Node& self) {
        std::size_t off = 0;
        for (NodeId x : xs) {
            Vec& gx = t.grad_mut(x);
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[off + i];
            off += gx.size();
        }
    });
}

Tape::NodeId Tape::softmax(NodeId v) {
    check(v);
    const Vec& vv = nodes_[v].value;
    require(!vv.empty(), "softmax: empty input");
    const double m = *std::max_element(vv.begin(), vv.end());
    Vec out(vv.size());
    double z = 0.0;
    for (std::size_t i = 0; i < vv.size(); ++i) {
        out[i] = std::exp(vv[i] - m);
        z += out[i];
    }
    for (double& x : out) x /= z;
    return push(std::move(out), [v](Tape& t, const Node& self) {
        const Vec& s = self.value;
        double inner = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) inner += self.grad[i] * s[i];
        Vec& gv = t.grad_mut(v);
        for (std::size_t i = 0; i < s.size(); ++i)
            gv[i] += s[i] * (self.grad[i] - inner);
    });
}

Tape::NodeId Tape::sigmoid(NodeId v) {
    check(v);
    Vec out = nodes_[v].value;
    for (double& x : out) x = 1.0 / (1.0 + std::exp(-x));
    return push(std::move(out), [v](Tape& t, const Node& self) {
        Vec& gv = t.grad_mut(v);
        for (std::size_t i = 0; i < self.value.size(); ++i)
            gv[i] += self.grad[i] * self.value[i] * (1.0 - self.value[i]);
    });
}

Tape::NodeId Tape::relu(NodeId v) {
    check(v);
    Vec out = nodes_[v].value;
    for (double& x : out) x = x > 0.0 ? x : 0.0;
    return push(std::move(out), [v](Tape& t, const Node& self) {
        const Vec& vv = t.nodes_[v].value;
        Vec& gv = t.grad_mut(v);
        for (std::size_t i = 0; i < vv.size(); ++i)
            if (vv[i] > 0.0) gv[i] += self.grad[i];
    });
}

Tape::NodeId Tape::mean_of(const std::vector<NodeId>& xs) {
    require(!xs.empty(), "mean_of: empty input list");
    const std::size_t n = nodes_[check(xs[0])].value.size();
    Vec out(n, 0.0);
    for (NodeId x : xs) {
        const Vec& xv = nodes_[check(x)].value;
        require(xv.size() == n, "mean_of: shape mismatch");
        for (std::size_t i = 0; i < n; ++i) out[i] += xv[i];
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (double& x : out) x *= inv;
    return push(std::move(out), [xs, inv](Tape& t, const Node& self) {
        for (NodeId x : xs) {
            Vec& gx = t.grad_mut(x);
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += inv * self.grad[i];
        }
    });
}

Tape::NodeId Tape::cosine(NodeId a, NodeId b) {
    check(a);
    check(b);
    const Vec& av = nodes_[a].value;
    const Vec& bv = nodes_[b].value;
    require(av.size() == bv.size(), "cosine: shape mismatch");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        ab += av[i] * bv[i];
        aa += av[i] * av[i];
        bb += bv[i] * bv[i];
    }
    if (aa == 0.0 || bb == 0.0)
        throw NumericError("cosine: zero-norm input vector");
    const double na = std::sqrt(aa), nb = std::sqrt(bb);
    const double c = ab / (na * nb);
    return push(Vec{c}, [a, b, na, nb, c](Tape& t, const Node& self) {
        const double g = self.grad[0];
        const Vec& av = t.nodes_[a].value;
        const Vec& bv = t.nodes_[b].value;
        Vec& ga = t.grad_mut(a);
        Vec& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < av.size(); ++i) {
            ga[i] += g * (bv[i] / (na * nb) - c * av[i] / (na * na));
            gb[i] += g * (av[i] / (na * nb) - c * bv[i] / (nb * nb));
        }
    });
}

Tape::NodeId Tape::linear_comb(NodeId weights, const std::vector<NodeId>& xs) {
    check(weights);
    require(!xs.empty(), "linear_comb: empty input list");
    const Vec& wv = nodes_[weights].value;
    require(wv.size() == xs.size(), "linear_comb: weight count mismatch");
    const std::size_t n = nodes_[check(xs[0])].value.size();
    Vec out(n, 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const Vec& xv = nodes_[check(xs[k])].value;
        require(xv.size() == n, "linear_comb: shape mismatch");
        for (std::size_t i = 0; i < n; ++i) out[i] += wv[k] * xv[i];
    }
    return push(std::move(out), [weights, xs](Tape& t, const Node& self) {
        const Vec& wv = t.nodes_[weights].value;
        Vec& gw = t.grad_mut(weights);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const Vec& xv = t.nodes_[xs[k]].value;
            Vec& gx = t.grad_mut(xs[k]);
            double s = 0.0;
            for (std::size_t i = 0; i < xv.size(); ++i) {
                s += self.grad[i] * xv[i];
                gx[i] += self.grad[i] * wv[k];
            }
            gw[k] += s;
        }
    });
}

Tape::NodeId Tape::affine(NodeId w, NodeId b, NodeId x, int out_dim, int in_dim) {
    check(w);
    check(b);
    check(x);
    const Vec& wv = nodes_[w].value;
    const Vec& bv = nodes_[b].value;
    const Vec& xv = nodes_[x].value;
    require(static_cast<int>(wv.size()) == out_dim * in_dim &&
                static_cast<int>(bv.size()) == out_dim &&
                static_cast<int>(xv.size()) == in_dim,
            "affine: shape mismatch");
    Vec out(static_cast<std::size_t>(out_dim));
    for (int r = 0; r < out_dim; ++r) {
        double s = bv[static_cast<std::size_t>(r)];
        const double* row = wv.data() + static_cast<std::size_t>(r) * in_dim;
        for (int c = 0; c < in_dim; ++c) s += row[c] * xv[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
    }
    return push(std::move(out), [w, b, x, out_dim, in_dim](Tape& t, const Node& self) {
        const Vec& wv = t.nodes_[w].value;
        const Vec& xv = t.nodes_[x].value;
        Vec& gw = t.grad_mut(w);
        Vec& gb = t.grad_mut(b);
        Vec& gx = t.grad_mut(x);
        for (int r = 0; r < out_dim; ++r) {
            const double gr = self.grad[static_cast<std::size_t>(r)];
            gb[static_cast<std::size_t>(r)] += gr;
            double* gwrow = gw.data() + static_cast<std::size_t>(r) * in_dim;
            const double* wrow = wv.data() + static_cast<std::size_t>(r) * in_dim;
            for (int c = 0; c < in_dim; ++c) {
                gwrow[c] += gr * xv[static_cast<std::size_t>(c)];
                gx[static_cast<std::size_t>(c)] += gr * wrow[c];
            }
        }
    });
}

Tape::NodeId Tape::dropout(NodeId v, double p, bool training, Rng& rng) {
    check(v);
    if (p < 0.0 || p >= 1.0)
        throw ContractError("dropout: p must satisfy 0 <= p < 1");
    if (!training || p == 0.0) {
        Vec out = nodes_[v].value;
        return push(std::move(out), [v](Tape& t, const Node& self) {
            Vec& gv = t.grad_mut(v);
            for (std::size_t i = 0; i < self.grad.size(); ++i) gv[i] += self.grad[i];
        });
    }
    const double keep_scale = 1.0 / (1.0 - p);
    const Vec& vv = nodes_[v].value;
    auto mask = std::make_shared<Vec>(vv.size());
    Vec out(vv.size());
    for (std::size_t i = 0; i < vv.size(); ++i) {
        (*mask)[i] = rng.next_unit() < p ? 0.0 : keep_scale;
        out[i] = vv[i] * (*mask)[i];
    }
    return push(std::move(out), [v, mask](Tape& t, const Node& self) {
        Vec& gv = t.grad_mut(v);
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            gv[i] += self.grad[i] * (*mask)[i];
    });
}

double bce_value(double y_hat, double y) {
    const double clamped = std::min(std::max(y_hat, 1e-12), 1.0 - 1e-12);
    return -(y * std::log(clamped) + (1.0 - y) * std::log(1.0 - clamped));
}

Tape::NodeId Tape::bce_with_logit(NodeId logit, double y) {
    check(logit);
    require(nodes_[logit].value.size() == 1, "bce_with_logit: scalar logit expected");
    if (y != 0.0 && y != 1.0)
        throw ContractError("bce_with_logit: label must be 0 or 1");
    const double z = nodes_[logit].value[0];
    const double y_hat = 1.0 / (1.0 + std::exp(-z));
    return push(Vec{bce_value(y_hat, y)}, [logit, y_hat, y](Tape& t, const Node& self) {
        t.grad_mut(logit)[0] += self.grad[0] * (y_hat - y);
    });
}

void Tape::backward(NodeId out) {
    if (!grad_enabled_)
        throw ContractError("Tape::backward: gradients disabled on this tape");
    check(out);
    if (nodes_[out].value.size() != 1)
        throw ContractError("Tape::backward: output must be a scalar");
    for (Node& n : nodes_) n.grad.assign(n.value.size(), 0.0);
    nodes_[out].grad[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.back) n.back(*this, n);
    }
    for (const Node& n : nodes_)
        for (double g : n.grad)
            if (!std::isfinite(g))
                throw NumericError("Tape::backward: non-finite gradient");
    backward_done_ = true;
}

}  // namespace timelyrec
