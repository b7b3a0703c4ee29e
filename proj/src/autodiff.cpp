// Copyright 2026 The MGAug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mgaug/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mgaug/errors.hpp"

namespace mgaug {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const std::vector<std::size_t>& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
    for (std::size_t d : shape)
        if (d == 0) throw DimensionError("tensor dimensions must be positive");
}

void require_matrix(const Tensor& t, const char* what) {
    if (t.rank() != 2) throw DimensionError(std::string(what) + " must be rank 2, got " + t.shape_string());
}

void ensure_finite(const Tensor& t, const char* op) {
    if (!t.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(product(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (product(shape_) != data_.size())
        throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                             shape_string());
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

const Tensor& Adjoints::grad(Var v) const {
    if (v.id >= adj_.size()) throw ContractError("variable does not belong to this tape");
    return adj_[v.id];
}

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
    if (v.id >= nodes_.size()) throw ContractError("variable does not belong to this tape");
    return nodes_[v.id];
}

Var Tape::leaf(Tensor value) {
    ensure_finite(value, "leaf");
    Node n;
    n.op = OpKind::Leaf;
    n.needs_grad = true;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = OpKind::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::linear(Var x, Var w, Var bias) {
    const Tensor& X = node(x).value;
    const Tensor& W = node(w).value;
    const Tensor& B = node(bias).value;
    require_matrix(X, "linear input");
    require_matrix(W, "linear weight");
    const std::size_t nb = X.rows(), ni = X.cols(), no = W.cols();
    if (W.rows() != ni || B.size() != no)
        throw DimensionError("linear: input " + X.shape_string() + ", weight " + W.shape_string() + ", bias " +
                             B.shape_string());
    Tensor out({nb, no});
    const double* xd = X.data().data();
    const double* wd = W.data().data();
    const double* bd = B.data().data();
    double* od = out.data().data();
    for (std::size_t r = 0; r < nb; ++r) {
        double* orow = od + r * no;
        for (std::size_t o = 0; o < no; ++o) orow[o] = 0.0;
        for (std::size_t i = 0; i < ni; ++i) {
            const double xv = xd[r * ni + i];
            const double* wrow = wd + i * no;
            for (std::size_t o = 0; o < no; ++o) orow[o] += xv * wrow[o];
        }
        for (std::size_t o = 0; o < no; ++o) orow[o] += bd[o];
    }
    ensure_finite(out, "linear");
    Node n;
    n.op = OpKind::Linear;
    n.a = x.id;
    n.b = w.id;
    n.c = bias.id;
    n.needs_grad = needs(x) || needs(w) || needs(bias);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::relu(Var x) {
    Tensor out = node(x).value;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    Node n;
    n.op = OpKind::Relu;
    n.a = x.id;
    n.needs_grad = needs(x);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (!A.same_shape(B)) throw DimensionError("mul: " + A.shape_string() + " vs " + B.shape_string());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
    ensure_finite(out, "mul");
    Node n;
    n.op = OpKind::Mul;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = needs(a) || needs(b);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (!A.same_shape(B)) throw DimensionError("add: " + A.shape_string() + " vs " + B.shape_string());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
    ensure_finite(out, "add");
    Node n;
    n.op = OpKind::Add;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = needs(a) || needs(b);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
    Tensor out = node(a).value;
    for (double& v : out.data()) v *= s;
    ensure_finite(out, "scale");
    Node n;
    n.op = OpKind::Scale;
    n.a = a.id;
    n.scalar = s;
    n.needs_grad = needs(a);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    require_matrix(A, "matmul lhs");
    require_matrix(B, "matmul rhs");
    const std::size_t m = A.rows(), k = A.cols(), p = B.cols();
    if (B.rows() != k) throw DimensionError("matmul: " + A.shape_string() + " x " + B.shape_string());
    Tensor out({m, p});
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < k; ++i) {
            const double av = A.at(r, i);
            for (std::size_t c = 0; c < p; ++c) out.at(r, c) += av * B.at(i, c);
        }
    ensure_finite(out, "matmul");
    Node n;
    n.op = OpKind::MatMul;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = needs(a) || needs(b);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::neg_sq_dist(Var q, Var p) {
    const Tensor& Q = node(q).value;
    const Tensor& P = node(p).value;
    require_matrix(Q, "neg_sq_dist queries");
    require_matrix(P, "neg_sq_dist prototypes");
    if (Q.cols() != P.cols()) throw DimensionError("neg_sq_dist: " + Q.shape_string() + " vs " + P.shape_string());
    const std::size_t m = Q.rows(), np = P.rows(), e = Q.cols();
    Tensor out({m, np});
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < np; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < e; ++j) {
                const double d = Q.at(r, j) - P.at(c, j);
                s += d * d;
            }
            out.at(r, c) = -s;
        }
    ensure_finite(out, "neg_sq_dist");
    Node n;
    n.op = OpKind::NegSqDist;
    n.a = q.id;
    n.b = p.id;
    n.needs_grad = needs(q) || needs(p);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::sum_squares(Var a) {
    double s = 0.0;
    for (double v : node(a).value.data()) s += v * v;
    Tensor out = Tensor::scalar(s);
    ensure_finite(out, "sum_squares");
    Node n;
    n.op = OpKind::SumSquares;
    n.a = a.id;
    n.needs_grad = needs(a);
    n.value = std::move(out);
    return push(std::move(n));
}

Var Tape::cross_entropy(Var logits, std::span<const int> labels) {
    const Tensor& L = node(logits).value;
    require_matrix(L, "cross_entropy logits");
    const std::size_t nb = L.rows(), nc = L.cols();
    if (labels.size() != nb)
        throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(nb) + " rows");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= nc)
            throw DomainError("cross_entropy: label " + std::to_string(y) + " outside [0, " + std::to_string(nc) +
                              ")");
    Tensor probs({nb, nc});
    double total = 0.0;
    for (std::size_t r = 0; r < nb; ++r) {
        double mx = L.at(r, 0);
        for (std::size_t c = 1; c < nc; ++c) mx = std::max(mx, L.at(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const double e = std::exp(L.at(r, c) - mx);
            probs.at(r, c) = e;
            z += e;
        }
        for (std::size_t c = 0; c < nc; ++c) probs.at(r, c) /= z;
        total += std::log(z) + mx - L.at(r, static_cast<std::size_t>(labels[r]));
    }
    Tensor out = Tensor::scalar(total / static_cast<double>(nb));
    ensure_finite(out, "cross_entropy");
    Node n;
    n.op = OpKind::CrossEntropy;
    n.a = logits.id;
    n.needs_grad = needs(logits);
    n.value = std::move(out);
    n.saved = std::move(probs);
    n.labels.assign(labels.begin(), labels.end());
    return push(std::move(n));
}

Var Tape::squared_error(Var pred, Var target) {
    const Tensor& P = node(pred).value;
    const Tensor& T = node(target).value;
    if (!P.same_shape(T)) throw DimensionError("squared_error: " + P.shape_string() + " vs " + T.shape_string());
    double s = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        const double d = P[i] - T[i];
        s += d * d;
    }
    Tensor out = Tensor::scalar(s / static_cast<double>(P.size()));
    ensure_finite(out, "squared_error");
    Node n;
    n.op = OpKind::SquaredError;
    n.a = pred.id;
    n.b = target.id;
    n.needs_grad = needs(pred) || needs(target);
    n.value = std::move(out);
    return push(std::move(n));
}

Adjoints Tape::backward(Var root) const {
    const Node& r = node(root);
    if (r.value.size() != 1) throw ContractError("backward: root must be scalar, got " + r.value.shape_string());
    Adjoints out;
    out.adj_.reserve(nodes_.size());
    for (const Node& n : nodes_) out.adj_.emplace_back(n.value.shape(), 0.0);
    auto& adj = out.adj_;
    adj[root.id][0] = 1.0;

    for (std::size_t idx = root.id + 1; idx-- > 0;) {
        const Node& n = nodes_[idx];
        if (!n.needs_grad) continue;
        const Tensor& g = adj[idx];
        switch (n.op) {
            case OpKind::Leaf:
            case OpKind::Constant:
                break;
            case OpKind::Linear: {
                const Tensor& X = nodes_[n.a].value;
                const Tensor& W = nodes_[n.b].value;
                const std::size_t nb = X.rows(), ni = X.cols(), no = W.cols();
                const double* gd = g.data().data();
                if (nodes_[n.a].needs_grad) {
                    double* dx = adj[n.a].data().data();
                    const double* wd = W.data().data();
                    for (std::size_t b = 0; b < nb; ++b)
                        for (std::size_t i = 0; i < ni; ++i) {
                            double s = 0.0;
                            const double* wrow = wd + i * no;
                            const double* grow = gd + b * no;
                            for (std::size_t o = 0; o < no; ++o) s += grow[o] * wrow[o];
                            dx[b * ni + i] += s;
                        }
                }
                if (nodes_[n.b].needs_grad) {
                    double* dw = adj[n.b].data().data();
                    const double* xd = X.data().data();
                    for (std::size_t b = 0; b < nb; ++b)
                        for (std::size_t i = 0; i < ni; ++i) {
                            const double xv = xd[b * ni + i];
                            double* dwrow = dw + i * no;
                            const double* grow = gd + b * no;
                            for (std::size_t o = 0; o < no; ++o) dwrow[o] += xv * grow[o];
                        }
                }
                if (nodes_[n.c].needs_grad) {
                    double* db = adj[n.c].data().data();
                    for (std::size_t b = 0; b < nb; ++b)
                        for (std::size_t o = 0; o < no; ++o) db[o] += gd[b * no + o];
                }
                break;
            }
            case OpKind::Relu: {
                const Tensor& X = nodes_[n.a].value;
                Tensor& dx = adj[n.a];
                for (std::size_t i = 0; i < X.size(); ++i)
                    if (X[i] > 0.0) dx[i] += g[i];
                break;
            }
            case OpKind::Mul: {
                const Tensor& A = nodes_[n.a].value;
                const Tensor& B = nodes_[n.b].value;
                if (nodes_[n.a].needs_grad)
                    for (std::size_t i = 0; i < A.size(); ++i) adj[n.a][i] += g[i] * B[i];
                if (nodes_[n.b].needs_grad)
                    for (std::size_t i = 0; i < B.size(); ++i) adj[n.b][i] += g[i] * A[i];
                break;
            }
            case OpKind::Add: {
                if (nodes_[n.a].needs_grad)
                    for (std::size_t i = 0; i < g.size(); ++i) adj[n.a][i] += g[i];
                if (nodes_[n.b].needs_grad)
                    for (std::size_t i = 0; i < g.size(); ++i) adj[n.b][i] += g[i];
                break;
            }
            case OpKind::Scale: {
                for (std::size_t i = 0; i < g.size(); ++i) adj[n.a][i] += n.scalar * g[i];
                break;
            }
            case OpKind::MatMul: {
                const Tensor& A = nodes_[n.a].value;
                const Tensor& B = nodes_[n.b].value;
                const std::size_t m = A.rows(), k = A.cols(), p = B.cols();
                if (nodes_[n.a].needs_grad)
                    for (std::size_t r = 0; r < m; ++r)
                        for (std::size_t i = 0; i < k; ++i) {
                            double s = 0.0;
                            for (std::size_t c = 0; c < p; ++c) s += g.at(r, c) * B.at(i, c);
                            adj[n.a].at(r, i) += s;
                        }
                if (nodes_[n.b].needs_grad)
                    for (std::size_t r = 0; r < m; ++r)
                        for (std::size_t i = 0; i < k; ++i) {
                            const double av = A.at(r, i);
                            for (std::size_t c = 0; c < p; ++c) adj[n.b].at(i, c) += av * g.at(r, c);
                        }
                break;
            }
            case OpKind::NegSqDist: {
                const Tensor& Q = nodes_[n.a].value;
                const Tensor& P = nodes_[n.b].value;
                const std::size_t m = Q.rows(), np = P.rows(), e = Q.cols();
                const bool gq = nodes_[n.a].needs_grad, gp = nodes_[n.b].needs_grad;
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < np; ++c) {
                        const double w = g.at(r, c);
                        for (std::size_t j = 0; j < e; ++j) {
                            const double d = Q.at(r, j) - P.at(c, j);
                            if (gq) adj[n.a].at(r, j) -= 2.0 * w * d;
                            if (gp) adj[n.b].at(c, j) += 2.0 * w * d;
                        }
                    }
                break;
            }
            case OpKind::SumSquares: {
                const Tensor& A = nodes_[n.a].value;
                for (std::size_t i = 0; i < A.size(); ++i) adj[n.a][i] += 2.0 * A[i] * g[0];
                break;
            }
            case OpKind::CrossEntropy: {
                const Tensor& probs = n.saved;
                const std::size_t nb = probs.rows(), nc = probs.cols();
                const double w = g[0] / static_cast<double>(nb);
                Tensor& dl = adj[n.a];
                for (std::size_t r = 0; r < nb; ++r)
                    for (std::size_t c = 0; c < nc; ++c) {
                        const double onehot = static_cast<std::size_t>(n.labels[r]) == c ? 1.0 : 0.0;
                        dl.at(r, c) += w * (probs.at(r, c) - onehot);
                    }
                break;
            }
            case OpKind::SquaredError: {
                const Tensor& P = nodes_[n.a].value;
                const Tensor& T = nodes_[n.b].value;
                const double w = 2.0 * g[0] / static_cast<double>(P.size());
                for (std::size_t i = 0; i < P.size(); ++i) {
                    const double d = P[i] - T[i];
                    if (nodes_[n.a].needs_grad) adj[n.a][i] += w * d;
                    if (nodes_[n.b].needs_grad) adj[n.b][i] -= w * d;
                }
                break;
            }
        }
    }
    return out;
}

double accuracy(const Tensor& logits, std::span<const int> labels) {
    if (logits.rank() != 2 || logits.rows() != labels.size())
        throw DimensionError("accuracy: logits " + logits.shape_string() + " vs " + std::to_string(labels.size()) +
                             " labels");
    std::size_t hits = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c)
            if (logits.at(r, c) > logits.at(r, best)) best = c;
        if (static_cast<int>(best) == labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace mgaug
