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

#pragma once

// Dense row-major f64 tensors and a reverse-mode tape that covers exactly
// what the MLP learners need: affine layers, ReLU, elementwise masking,
// prototype distances and the two losses.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mgaug {

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
        return Tensor({rows, cols}, std::move(data));
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    /// Leading dimension for rank-2 tensors.
    std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_.front(); }
    /// Trailing extent (product of all non-leading dimensions).
    std::size_t cols() const noexcept { return rows() == 0 ? 0 : data_.size() / rows(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }

    bool same_shape(const Tensor& o) const noexcept { return shape_ == o.shape_; }
    bool all_finite() const noexcept;
    std::string shape_string() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
    std::uint32_t id = 0;
};

enum class OpKind : std::uint8_t {
    Leaf,
    Constant,
    Linear,
    Relu,
    Mul,
    Add,
    Scale,
    MatMul,
    NegSqDist,
    SumSquares,
    CrossEntropy,
    SquaredError,
};

class Tape;

/// Adjoints for every node of a tape, produced by Tape::backward.
class Adjoints {
public:
    /// Gradient of the root with respect to `v`; zeros when `v` does not
    /// influence the root or is a constant.
    const Tensor& grad(Var v) const;

private:
    friend class Tape;
    std::vector<Tensor> adj_;
};

/// Single-writer record of one forward pass. Rebuilt for every pass.
class Tape {
public:
    Var leaf(Tensor value);
    Var constant(Tensor value);

    const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
    std::size_t size() const noexcept { return nodes_.size(); }
    OpKind kind(Var v) const { return nodes_.at(v.id).op; }

    /// Reverse sweep from a scalar root. Each node is visited once, in
    /// reverse insertion order. Throws ContractError for a non-scalar root.
    Adjoints backward(Var root) const;

    // Operations ---------------------------------------------------------

    /// out[b,o] = sum_i x[b,i] * w[i,o] + bias[o]
    Var linear(Var x, Var w, Var bias);
    Var relu(Var x);
    /// Elementwise product of equally shaped tensors.
    Var mul(Var a, Var b);
    Var add(Var a, Var b);
    Var scale(Var a, double s);
    Var matmul(Var a, Var b);
    /// out[m,n] = -||q[m,:] - p[n,:]||^2
    Var neg_sq_dist(Var q, Var p);
    /// Scalar sum of squares.
    Var sum_squares(Var a);
    /// Mean over rows of -log softmax(logits)[label], max-stabilized.
    Var cross_entropy(Var logits, std::span<const int> labels);
    /// Mean over elements of (pred - target)^2.
    Var squared_error(Var pred, Var target);

private:
    struct Node {
        OpKind op = OpKind::Constant;
        std::uint32_t a = 0, b = 0, c = 0;
        bool needs_grad = false;
        double scalar = 0.0;
        Tensor value;
        Tensor saved;  // softmax probabilities for CrossEntropy
        std::vector<int> labels;
    };

    Var push(Node n);
    const Node& node(Var v) const;
    bool needs(Var v) const { return node(v).needs_grad; }

    std::vector<Node> nodes_;
};

/// Fraction of rows whose argmax equals the label (first maximum wins).
double accuracy(const Tensor& logits, std::span<const int> labels);

}  // namespace mgaug
