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

// Meta-learning PAC-Bayes bound with inner-loop pruning. Diagnostic only:
// the hyper-posterior divergence D(Q||P) must be supplied by the caller.

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace mgaug {

struct BoundInputs {
    /// Samples per observed task, one entry per task (T = size()).
    std::vector<std::size_t> samples;
    double delta = 0.1;
    /// D(Q || P) >= 0.
    double kl_hyper = 0.0;
    /// ||Theta_i||^2 per task.
    std::vector<double> theta_norms_sq;
    double rho = 0.0;
    /// Empirical error per task, in [0, 1].
    std::vector<double> empirical_errors;

    std::size_t tasks() const noexcept { return samples.size(); }
    /// Throws DomainError on any violated precondition.
    void validate() const;
};

struct BoundTerms {
    double empirical = 0.0;    // mean empirical error
    double environment = 0.0;  // sqrt((D + ln(2T/delta)) / (2(T-1)))
    double task = 0.0;         // mean over tasks of the per-task complexity
    double total = 0.0;
};

/// Per-task divergence with pruning rate rho: D + (1 - rho)/2 * ||Theta||^2.
double kl_term(double kl_hyper, double rho, double theta_norm_sq);

BoundTerms bound_terms(const BoundInputs& in);
inline double bound(const BoundInputs& in) { return bound_terms(in).total; }

/// Flat `key = value` text with keys T, m, delta, kl_hyper, theta_norms_sq,
/// rho, empirical_errors. List values are comma separated; a single value is
/// broadcast to all T tasks. kl_hyper has no default.
BoundInputs read_bound_inputs(std::istream& in);

}  // namespace mgaug
