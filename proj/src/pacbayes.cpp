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

#include "mgaug/pacbayes.hpp"

#include <cmath>
#include <map>
#include <string>

#include "mgaug/errors.hpp"
#include "mgaug/kv.hpp"

namespace mgaug {

void BoundInputs::validate() const {
    const std::size_t t = tasks();
    if (t <= 1) throw DomainError("bound needs T >= 2 tasks");
    if (theta_norms_sq.size() != t || empirical_errors.size() != t)
        throw DomainError("bound inputs: per-task lists must all have length T");
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0, 1]");
    if (!(kl_hyper >= 0.0) || !std::isfinite(kl_hyper)) throw DomainError("D(Q||P) must be finite and >= 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
    for (std::size_t i = 0; i < t; ++i) {
        if (samples[i] <= 1) throw DomainError("every task needs m_i >= 2 samples");
        if (!(theta_norms_sq[i] >= 0.0) || !std::isfinite(theta_norms_sq[i]))
            throw DomainError("||Theta_i||^2 must be finite and >= 0");
        if (!(empirical_errors[i] >= 0.0 && empirical_errors[i] <= 1.0))
            throw DomainError("empirical errors must lie in [0, 1]");
    }
}

double kl_term(double kl_hyper, double rho, double theta_norm_sq) {
    if (!(kl_hyper >= 0.0) || !(theta_norm_sq >= 0.0) || !(rho >= 0.0 && rho <= 1.0))
        throw DomainError("kl_term: inputs must be non-negative with rho in [0, 1]");
    return kl_hyper + 0.5 * (1.0 - rho) * theta_norm_sq;
}

BoundTerms bound_terms(const BoundInputs& in) {
    in.validate();
    const double t = static_cast<double>(in.tasks());
    BoundTerms b;
    double err = 0.0, task = 0.0;
    for (std::size_t i = 0; i < in.tasks(); ++i) {
        const double m = static_cast<double>(in.samples[i]);
        err += in.empirical_errors[i];
        const double num = kl_term(in.kl_hyper, in.rho, in.theta_norms_sq[i]) + std::log(2.0 * t * m / in.delta);
        task += std::sqrt(num / (2.0 * (m - 1.0)));
    }
    b.empirical = err / t;
    b.environment = std::sqrt((in.kl_hyper + std::log(2.0 * t / in.delta)) / (2.0 * (t - 1.0)));
    b.task = task / t;
    b.total = b.empirical + b.environment + b.task;
    return b;
}

BoundInputs read_bound_inputs(std::istream& stream) {
    std::map<std::string, std::string> keys;
    for (auto& [k, v] : kv::parse(stream)) {
        if (k != "T" && k != "m" && k != "delta" && k != "kl_hyper" && k != "theta_norms_sq" && k != "rho" &&
            k != "empirical_errors")
            throw ConfigError("unknown bound key '" + k + "'");
        keys[k] = v;
    }
    for (const char* required : {"T", "m", "kl_hyper", "theta_norms_sq", "empirical_errors"})
        if (!keys.count(required)) throw ConfigError(std::string("bound config is missing '") + required + "'");

    const auto t = static_cast<std::size_t>(kv::to_u64("T", keys["T"]));
    auto expand = [t](const std::string& key, const std::string& text) {
        std::vector<std::string> items = kv::split_list(text);
        if (items.size() == 1) items.assign(t, items.front());
        if (items.size() != t)
            throw ConfigError(key + ": expected 1 or " + std::to_string(t) + " values, got " +
                              std::to_string(items.size()));
        return items;
    };
    BoundInputs in;
    for (const auto& s : expand("m", keys["m"])) in.samples.push_back(static_cast<std::size_t>(kv::to_u64("m", s)));
    for (const auto& s : expand("theta_norms_sq", keys["theta_norms_sq"]))
        in.theta_norms_sq.push_back(kv::to_double("theta_norms_sq", s));
    for (const auto& s : expand("empirical_errors", keys["empirical_errors"]))
        in.empirical_errors.push_back(kv::to_double("empirical_errors", s));
    in.kl_hyper = kv::to_double("kl_hyper", keys["kl_hyper"]);
    if (keys.count("delta")) in.delta = kv::to_double("delta", keys["delta"]);
    if (keys.count("rho")) in.rho = kv::to_double("rho", keys["rho"]);
    in.validate();
    return in;
}

}  // namespace mgaug
