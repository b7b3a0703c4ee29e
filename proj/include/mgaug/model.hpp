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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mgaug/autodiff.hpp"

namespace mgaug {

/// Layer widths of an MLP: input, hidden..., output.
class Arch {
public:
    Arch() = default;
    explicit Arch(std::vector<std::size_t> widths);

    const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    std::size_t num_layers() const noexcept { return widths_.empty() ? 0 : widths_.size() - 1; }
    std::size_t in(std::size_t layer) const { return widths_.at(layer); }
    std::size_t out(std::size_t layer) const { return widths_.at(layer + 1); }
    std::size_t input_dim() const { return widths_.front(); }
    std::size_t output_dim() const { return widths_.back(); }
    /// n_(l): weights plus biases of one layer.
    std::size_t layer_params(std::size_t layer) const { return in(layer) * out(layer) + out(layer); }
    std::size_t num_params() const;

    friend bool operator==(const Arch&, const Arch&) = default;

private:
    std::vector<std::size_t> widths_;
};

struct LayerTensors {
    Tensor weight;  // [in x out]
    Tensor bias;    // [out]

    std::size_t size() const noexcept { return weight.size() + bias.size(); }
    /// Flat index j over (weight row-major, then bias).
    double get(std::size_t j) const noexcept { return j < weight.size() ? weight[j] : bias[j - weight.size()]; }
    double& ref(std::size_t j) noexcept { return j < weight.size() ? weight[j] : bias[j - weight.size()]; }

    friend bool operator==(const LayerTensors&, const LayerTensors&) = default;
};

/// Tensors laid out layer by layer like the parameters of an Arch.
struct LayeredTensors {
    std::vector<LayerTensors> layers;

    static LayeredTensors filled(const Arch& arch, double value);
    std::size_t size() const noexcept;
    bool congruent(const Arch& arch) const noexcept;
    bool congruent(const LayeredTensors& other) const noexcept;

    friend bool operator==(const LayeredTensors&, const LayeredTensors&) = default;
};

/// Meta or base parameters of an MLP. Value type; updates return new sets.
class ParamSet {
public:
    ParamSet() = default;
    ParamSet(Arch arch, LayeredTensors tensors);

    const Arch& arch() const noexcept { return arch_; }
    const LayeredTensors& tensors() const noexcept { return tensors_; }
    const std::vector<LayerTensors>& layers() const noexcept { return tensors_.layers; }
    const LayerTensors& layer(std::size_t l) const { return tensors_.layers.at(l); }
    std::size_t num_params() const noexcept { return tensors_.size(); }
    double squared_norm() const noexcept;

    friend bool operator==(const ParamSet&, const ParamSet&) = default;

private:
    Arch arch_;
    LayeredTensors tensors_;
};

/// Per-parameter gradients aligned with a ParamSet.
struct Gradients {
    LayeredTensors tensors;

    static Gradients zeros(const Arch& arch) { return {LayeredTensors::filled(arch, 0.0)}; }
    const std::vector<LayerTensors>& layers() const noexcept { return tensors.layers; }
    std::vector<LayerTensors>& layers() noexcept { return tensors.layers; }

    Gradients& operator+=(const Gradients& o);
    Gradients& operator*=(double s);

    friend bool operator==(const Gradients&, const Gradients&) = default;
};

/// Binary keep (1) / prune (0) pattern congruent to a ParamSet.
struct Mask {
    LayeredTensors tensors;
    double pruned_fraction = 0.0;

    static Mask ones(const Arch& arch) { return {LayeredTensors::filled(arch, 1.0), 0.0}; }
    const std::vector<LayerTensors>& layers() const noexcept { return tensors.layers; }
    std::size_t zeros() const noexcept;
    std::size_t zeros(std::size_t layer) const;
    /// Recomputes pruned_fraction from the stored pattern.
    void refresh_fraction() noexcept;

    friend bool operator==(const Mask&, const Mask&) = default;
};

ParamSet init_params(const Arch& arch, std::uint64_t seed);

/// m (.) theta, i.e. the pruned parameter values.
ParamSet apply_mask(const ParamSet& params, const Mask& mask);

/// Recorded forward pass. Hidden layers use ReLU; the final layer is affine.
struct ForwardPass {
    Tape tape;
    std::vector<Var> weights;
    std::vector<Var> biases;
    Var output;

    /// Gradient of `root` with respect to every parameter leaf.
    Gradients gradients(Var root) const;
};

/// Forward with parameters replaced by m (.) theta. The mask enters the tape
/// as a constant, so masked coordinates get exactly zero gradient.
ForwardPass forward_masked(const ParamSet& params, const Mask* mask, const Tensor& input);
inline ForwardPass forward(const ParamSet& params, const Tensor& input) { return forward_masked(params, nullptr, input); }

/// Output values only.
Tensor predict(const ParamSet& params, const Mask* mask, const Tensor& input);

/// Widths after removing a fraction rho of every hidden layer's units
/// (ceil((1 - rho) * d); input and output unchanged).
Arch slim_arch(const Arch& arch, double rho);

/// Keeps the first units of each hidden layer and the matching weight
/// rows/columns and biases.
ParamSet slim(const ParamSet& params, double rho);

/// Mask over the full arch that zeroes exactly what slim() removes.
Mask structured_mask(const Arch& full, const Arch& slimmed);

/// Embeds gradients of a slimmed network into the full layout, zeros at the
/// removed coordinates.
Gradients scatter_slim(const Gradients& slim_grad, const Arch& slimmed, const Arch& full);

/// Throws DomainError unless 0 <= rho < 1.
void check_rho(double rho);

}  // namespace mgaug
