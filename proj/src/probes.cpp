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

#include "mgaug/probes.hpp"

#include <cstdio>
#include <ostream>

#include "mgaug/errors.hpp"
#include "mgaug/meta.hpp"
#include "mgaug/rng.hpp"

namespace mgaug {

namespace {

HatRow aggregate(const std::string& variant, double rho, const std::vector<std::vector<double>>& per_task) {
    HatRow row;
    row.variant = variant;
    row.rho = rho;
    row.n_tasks = per_task.size();
    const std::size_t steps = per_task.front().size();
    for (std::size_t s = 0; s < steps; ++s) {
        std::vector<double> col;
        col.reserve(per_task.size());
        for (const auto& t : per_task) col.push_back(t[s]);
        const EvalResult e = summarize(std::move(col));
        row.mean_acc.push_back(e.mean);
        row.stderr_.push_back(e.stderr_);
    }
    return row;
}

std::vector<Episode> probe_episodes(const ClassBank& bank, const ProbeConfig& cfg) {
    if (cfg.tasks == 0) throw DomainError("probe needs at least one task");
    std::vector<Episode> eps;
    eps.reserve(cfg.tasks);
    for (std::size_t i = 0; i < cfg.tasks; ++i)
        eps.push_back(sample_episode(bank, cfg.split, cfg.shape, cfg.mode, derive_seed(cfg.seed, {i})));
    return eps;
}

}  // namespace

HatProfile memorization_probe(const ParamSet& omega, const ClassBank& bank, const ProbeConfig& cfg,
                              const std::string& variant) {
    for (double rho : cfg.rhos) check_rho(rho);
    const std::vector<Episode> eps = probe_episodes(bank, cfg);

    std::vector<InnerResult> base;
    base.reserve(eps.size());
    std::vector<std::vector<double>> curves;
    for (const auto& ep : eps) {
        base.push_back(inner_fomaml(omega, ep, nullptr, cfg.steps, cfg.alpha, true));
        curves.push_back(base.back().step_accuracies);
    }
    HatProfile prof;
    prof.tasks = eps.size();
    prof.baseline = aggregate(variant, 0.0, curves);

    for (std::size_t r = 0; r < cfg.rhos.size(); ++r) {
        const double rho = cfg.rhos[r];
        curves.clear();
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const Episode& ep = eps[i];
            switch (cfg.strategy) {
                case Strategy::None:
                    curves.push_back(base[i].step_accuracies);
                    break;
                case Strategy::WP: {
                    const ParamSet small = slim(omega, rho);
                    curves.push_back(inner_fomaml(small, ep, nullptr, cfg.steps, cfg.alpha, true).step_accuracies);
                    break;
                }
                case Strategy::PP: {
                    const Mask m = build_mask_pp(omega.arch(), rho, derive_seed(cfg.seed, {i, r, 1}));
                    curves.push_back(inner_fomaml(omega, ep, &m, cfg.steps, cfg.alpha, true).step_accuracies);
                    break;
                }
                case Strategy::CP: {
                    // Scored like a training-time sub-network: full-network query
                    // gradient after fine-tuning, times the initial parameters.
                    const Mask m = build_mask_cp(mmca(omega, base[i].meta_grad, i), rho);
                    curves.push_back(inner_fomaml(omega, ep, &m, cfg.steps, cfg.alpha, true).step_accuracies);
                    break;
                }
            }
        }
        prof.pruned.push_back(aggregate(variant, rho, curves));
    }
    return prof;
}

std::vector<ReactivationRow> reactivation_probe(const std::vector<std::pair<std::string, ParamSet>>& variants,
                                                const ClassBank& bank, const ProbeConfig& cfg) {
    const std::vector<Episode> eps = probe_episodes(bank, cfg);
    std::vector<ReactivationRow> out;
    for (const auto& [name, omega] : variants) {
        std::vector<std::vector<double>> curves;
        for (const auto& ep : eps) curves.push_back(inner_fomaml(omega, ep, nullptr, cfg.steps, cfg.alpha, true).step_accuracies);
        ReactivationRow row;
        row.curve = aggregate(name, 0.0, curves);
        row.step0 = row.curve.mean_acc.front();
        row.final_acc = row.curve.mean_acc.back();
        row.gain = row.final_acc - row.step0;
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<HatRow> profile_rows(const HatProfile& p) {
    std::vector<HatRow> rows{p.baseline};
    rows.insert(rows.end(), p.pruned.begin(), p.pruned.end());
    return rows;
}

void write_probe_csv(std::ostream& out, const std::vector<HatRow>& rows) {
    out << "variant,rho,step,mean_acc,stderr,n_tasks\n";
    char buf[160];
    for (const auto& r : rows)
        for (std::size_t s = 0; s < r.mean_acc.size(); ++s) {
            std::snprintf(buf, sizeof buf, ",%.9g,%zu,%.9g,%.9g,%zu\n", r.rho, s, r.mean_acc[s], r.stderr_[s],
                          r.n_tasks);
            out << r.variant << buf;
        }
}

}  // namespace mgaug
