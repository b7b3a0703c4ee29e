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

#include "mgaug/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgaug/errors.hpp"
#include "mgaug/rng.hpp"

namespace mgaug {

Arch::Arch(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw DomainError("arch needs at least an input and an output width");
    for (std::size_t w : widths_)
        if (w == 0) throw DomainError("arch widths must be positive");
}

std::size_t Arch::num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < num_layers(); ++l) n += layer_params(l);
    return n;
}

LayeredTensors LayeredTensors::filled(const Arch& arch, double value) {
    LayeredTensors t;
    t.layers.reserve(arch.num_layers());
    for (std::size_t l = 0; l < arch.num_layers(); ++l)
        t.layers.push_back({Tensor({arch.in(l), arch.out(l)}, value), Tensor({arch.out(l)}, value)});
    return t;
}

std::size_t LayeredTensors::size() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
}

bool LayeredTensors::congruent(const Arch& arch) const noexcept {
    if (layers.size() != arch.num_layers()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& w = layers[l].weight.shape();
        const auto& b = layers[l].bias.shape();
        if (w.size() != 2 || w[0] != arch.in(l) || w[1] != arch.out(l)) return false;
        if (b.size() != 1 || b[0] != arch.out(l)) return false;
    }
    return true;
}

bool LayeredTensors::congruent(const LayeredTensors& other) const noexcept {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l)
        if (!layers[l].weight.same_shape(other.layers[l].weight) || !layers[l].bias.same_shape(other.layers[l].bias))
            return false;
    return true;
}

ParamSet::ParamSet(Arch arch, LayeredTensors tensors) : arch_(std::move(arch)), tensors_(std::move(tensors)) {
    if (!tensors_.congruent(arch_)) throw DimensionError("parameter tensors do not match arch");
}

double ParamSet::squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& l : tensors_.layers) {
        for (double v : l.weight.data()) s += v * v;
        for (double v : l.bias.data()) s += v * v;
    }
    return s;
}

Gradients& Gradients::operator+=(const Gradients& o) {
    if (!tensors.congruent(o.tensors)) throw ContractError("adding incongruent gradients");
    for (std::size_t l = 0; l < tensors.layers.size(); ++l) {
        auto& a = tensors.layers[l];
        const auto& b = o.tensors.layers[l];
        for (std::size_t i = 0; i < a.weight.size(); ++i) a.weight[i] += b.weight[i];
        for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += b.bias[i];
    }
    return *this;
}

Gradients& Gradients::operator*=(double s) {
    for (auto& l : tensors.layers) {
        for (double& v : l.weight.data()) v *= s;
        for (double& v : l.bias.data()) v *= s;
    }
    return *this;
}

std::size_t Mask::zeros(std::size_t layer) const {
    const auto& l = tensors.layers.at(layer);
    std::size_t z = 0;
    for (std::size_t j = 0; j < l.size(); ++j) z += l.get(j) == 0.0 ? 1 : 0;
    return z;
}

std::size_t Mask::zeros() const noexcept {
    std::size_t z = 0;
    for (std::size_t l = 0; l < tensors.layers.size(); ++l) z += zeros(l);
    return z;
}

void Mask::refresh_fraction() noexcept {
    const std::size_t n = tensors.size();
    pruned_fraction = n == 0 ? 0.0 : static_cast<double>(zeros()) / static_cast<double>(n);
}

ParamSet init_params(const Arch& arch, std::uint64_t seed) {
    Rng rng(seed);
    LayeredTensors t = LayeredTensors::filled(arch, 0.0);
    for (std::size_t l = 0; l < arch.num_layers(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(arch.in(l) + arch.out(l)));
        for (double& w : t.layers[l].weight.data()) w = rng.uniform(-bound, bound);
    }
    return ParamSet(arch, std::move(t));
}

ParamSet apply_mask(const ParamSet& params, const Mask& mask) {
    if (!mask.tensors.congruent(params.arch())) throw ContractError("mask is not congruent with parameters");
    LayeredTensors t = params.tensors();
    for (std::size_t l = 0; l < t.layers.size(); ++l) {
        auto& dst = t.layers[l];
        const auto& m = mask.tensors.layers[l];
        for (std::size_t i = 0; i < dst.weight.size(); ++i) dst.weight[i] *= m.weight[i];
        for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] *= m.bias[i];
    }
    return ParamSet(params.arch(), std::move(t));
}

Gradients ForwardPass::gradients(Var root) const {
    const Adjoints adj = tape.backward(root);
    Gradients g;
    g.tensors.layers.reserve(weights.size());
    for (std::size_t l = 0; l < weights.size(); ++l) g.tensors.layers.push_back({adj.grad(weights[l]), adj.grad(biases[l])});
    return g;
}

ForwardPass forward_masked(const ParamSet& params, const Mask* mask, const Tensor& input) {
    const Arch& arch = params.arch();
    if (mask && !mask->tensors.congruent(arch)) throw ContractError("mask is not congruent with parameters");
    if (input.rank() != 2 || input.cols() != arch.input_dim())
        throw DimensionError("input " + input.shape_string() + " does not match arch input width " +
                             std::to_string(arch.input_dim()));
    ForwardPass fp;
    Var h = fp.tape.constant(input);
    for (std::size_t l = 0; l < arch.num_layers(); ++l) {
        const auto& layer = params.layer(l);
        Var w = fp.tape.leaf(layer.weight);
        Var b = fp.tape.leaf(layer.bias);
        fp.weights.push_back(w);
        fp.biases.push_back(b);
        if (mask) {
            w = fp.tape.mul(w, fp.tape.constant(mask->tensors.layers[l].weight));
            b = fp.tape.mul(b, fp.tape.constant(mask->tensors.layers[l].bias));
        }
        h = fp.tape.linear(h, w, b);
        if (l + 1 < arch.num_layers()) h = fp.tape.relu(h);
    }
    fp.output = h;
    return fp;
}

Tensor predict(const ParamSet& params, const Mask* mask, const Tensor& input) {
    ForwardPass fp = forward_masked(params, mask, input);
    return fp.tape.value(fp.output);
}

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("pruning rate must lie in [0, 1), got " + std::to_string(rho));
}

Arch slim_arch(const Arch& arch, double rho) {
    check_rho(rho);
    std::vector<std::size_t> w = arch.widths();
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        // Guard against (1 - rho) * d landing a rounding error above an integer.
        const double kept = std::ceil((1.0 - rho) * static_cast<double>(w[i]) - 1e-9);
        w[i] = std::max<std::size_t>(1, static_cast<std::size_t>(kept));
    }
    return Arch(std::move(w));
}

ParamSet slim(const ParamSet& params, double rho) {
    const Arch small = slim_arch(params.arch(), rho);
    LayeredTensors t = LayeredTensors::filled(small, 0.0);
    for (std::size_t l = 0; l < small.num_layers(); ++l) {
        const auto& src = params.layer(l);
        auto& dst = t.layers[l];
        for (std::size_t i = 0; i < small.in(l); ++i)
            for (std::size_t o = 0; o < small.out(l); ++o) dst.weight.at(i, o) = src.weight.at(i, o);
        for (std::size_t o = 0; o < small.out(l); ++o) dst.bias[o] = src.bias[o];
    }
    return ParamSet(small, std::move(t));
}

namespace {

void check_slim_pair(const Arch& full, const Arch& slimmed) {
    if (full.num_layers() != slimmed.num_layers() || full.input_dim() != slimmed.input_dim() ||
        full.output_dim() != slimmed.output_dim())
        throw ContractError("slimmed arch is not derived from the full arch");
    for (std::size_t i = 0; i < full.widths().size(); ++i)
        if (slimmed.widths()[i] > full.widths()[i]) throw ContractError("slimmed arch wider than full arch");
}

}  // namespace

Mask structured_mask(const Arch& full, const Arch& slimmed) {
    check_slim_pair(full, slimmed);
    Mask m{LayeredTensors::filled(full, 0.0), 0.0};
    for (std::size_t l = 0; l < full.num_layers(); ++l) {
        auto& dst = m.tensors.layers[l];
        for (std::size_t i = 0; i < slimmed.in(l); ++i)
            for (std::size_t o = 0; o < slimmed.out(l); ++o) dst.weight.at(i, o) = 1.0;
        for (std::size_t o = 0; o < slimmed.out(l); ++o) dst.bias[o] = 1.0;
    }
    m.refresh_fraction();
    return m;
}

Gradients scatter_slim(const Gradients& slim_grad, const Arch& slimmed, const Arch& full) {
    check_slim_pair(full, slimmed);
    if (!slim_grad.tensors.congruent(slimmed)) throw ContractError("gradient does not match slimmed arch");
    Gradients g = Gradients::zeros(full);
    for (std::size_t l = 0; l < full.num_layers(); ++l) {
        const auto& src = slim_grad.tensors.layers[l];
        auto& dst = g.tensors.layers[l];
        for (std::size_t i = 0; i < slimmed.in(l); ++i)
            for (std::size_t o = 0; o < slimmed.out(l); ++o) dst.weight.at(i, o) = src.weight.at(i, o);
        for (std::size_t o = 0; o < slimmed.out(l); ++o) dst.bias[o] = src.bias[o];
    }
    return g;
}

}  // namespace mgaug
