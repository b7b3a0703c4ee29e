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

// Shared helpers for the unit tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "mgaug/model.hpp"
#include "mgaug/rng.hpp"
#include "mgaug/tasks.hpp"

namespace mgaug::testing {

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-scale, scale);
    return t;
}

inline ParamSet random_params(const Arch& arch, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    LayeredTensors t = LayeredTensors::filled(arch, 0.0);
    for (auto& l : t.layers)
        for (std::size_t j = 0; j < l.size(); ++j) l.ref(j) = rng.uniform(-scale, scale);
    return ParamSet(arch, std::move(t));
}

inline double rel_err(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline ClassBank small_bank(std::uint64_t seed = 7, std::size_t dim = 6) {
    BankSpec s;
    s.num_train = 12;
    s.num_val = 6;
    s.num_test = 6;
    s.dim = dim;
    s.spread = 0.4;
    s.seed = seed;
    return make_bank(s);
}

inline ParamSet with_coord(const ParamSet& p, std::size_t l, std::size_t j, double v) {
    LayeredTensors t = p.tensors();
    t.layers[l].ref(j) = v;
    return ParamSet(p.arch(), std::move(t));
}

// Sign pattern of the first hidden layer's pre-activations; a change between
// two parameter settings means a ReLU kink lies between them.
inline std::vector<bool> hidden_signs(const ParamSet& p, const Tensor& x) {
    const LayerTensors& L = p.layer(0);
    const std::size_t in = p.arch().in(0), out = p.arch().out(0);
    std::vector<bool> s;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t k = 0; k < out; ++k) {
            double z = L.bias[k];
            for (std::size_t i = 0; i < in; ++i) z += x.at(r, i) * L.weight[i * out + k];
            s.push_back(z > 0.0);
        }
    return s;
}

}  // namespace mgaug::testing
