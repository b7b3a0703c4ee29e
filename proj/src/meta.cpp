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

#include "mgaug/meta.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "mgaug/errors.hpp"
#include "mgaug/rng.hpp"

namespace mgaug {

std::string to_string(Method m) { return m == Method::FoMAML ? "fomaml" : "protonet"; }
std::string to_string(Variant v) { return v == Variant::Sum ? "sum" : "maxup"; }

Method parse_method(const std::string& s) {
    if (s == "fomaml") return Method::FoMAML;
    if (s == "protonet") return Method::ProtoNet;
    throw DomainError("unknown method '" + s + "' (expected fomaml|protonet)");
}

Variant parse_variant(const std::string& s) {
    if (s == "sum") return Variant::Sum;
    if (s == "maxup") return Variant::MaxUp;
    throw DomainError("unknown variant '" + s + "' (expected sum|maxup)");
}

namespace {

void axpy_inplace(LayeredTensors& dst, double a, const LayeredTensors& x) {
    for (std::size_t l = 0; l < dst.layers.size(); ++l) {
        auto& d = dst.layers[l];
        const auto& s = x.layers[l];
        for (std::size_t i = 0; i < d.weight.size(); ++i) d.weight[i] += a * s.weight[i];
        for (std::size_t i = 0; i < d.bias.size(); ++i) d.bias[i] += a * s.bias[i];
    }
}

void mask_inplace(LayeredTensors& g, const Mask& m) {
    for (std::size_t l = 0; l < g.layers.size(); ++l) {
        auto& d = g.layers[l];
        const auto& s = m.tensors.layers[l];
        for (std::size_t i = 0; i < d.weight.size(); ++i) d.weight[i] *= s.weight[i];
        for (std::size_t i = 0; i < d.bias.size(); ++i) d.bias[i] *= s.bias[i];
    }
}

Gradients query_gradient(const ParamSet& theta, const Mask* mask, const Episode& ep, double* loss, double* acc) {
    ForwardPass fp = forward_masked(theta, mask, ep.query_x);
    const Var l = fp.tape.cross_entropy(fp.output, ep.query_y);
    if (loss) *loss = fp.tape.value(l)[0];
    if (acc) *acc = accuracy(fp.tape.value(fp.output), ep.query_y);
    return fp.gradients(l);
}

}  // namespace

ParamSet gradient_descent(const ParamSet& init, const Mask* mask, int steps, double alpha,
                          const std::function<Gradients(const ParamSet&)>& grad_fn,
                          const std::function<void(int, const ParamSet&)>& on_step) {
    if (steps < 0) throw DomainError("inner steps must be non-negative");
    ParamSet theta = mask ? apply_mask(init, *mask) : init;
    for (int i = 0; i < steps; ++i) {
        if (on_step) on_step(i, theta);
        Gradients g = grad_fn(theta);
        if (!g.tensors.congruent(theta.arch())) throw ContractError("gradient not congruent with parameters");
        if (mask) mask_inplace(g.tensors, *mask);
        LayeredTensors next = theta.tensors();
        axpy_inplace(next, -alpha, g.tensors);
        theta = ParamSet(theta.arch(), std::move(next));
    }
    return theta;
}

InnerResult inner_fomaml(const ParamSet& omega, const Episode& ep, const Mask* mask, int steps, double alpha,
                         bool record_steps) {
    if (steps < 1) throw DomainError("FoMAML needs at least one inner step");
    if (!(alpha >= 0.0)) throw DomainError("inner learning rate must be non-negative");
    InnerResult r;
    auto support_grad = [&](const ParamSet& th) {
        ForwardPass fp = forward_masked(th, mask, ep.support_x);
        const Var l = fp.tape.cross_entropy(fp.output, ep.support_y);
        return fp.gradients(l);
    };
    std::function<void(int, const ParamSet&)> on_step;
    if (record_steps)
        on_step = [&](int, const ParamSet& th) {
            r.step_accuracies.push_back(accuracy(predict(th, mask, ep.query_x), ep.query_y));
        };
    ParamSet theta = gradient_descent(omega, mask, steps, alpha, support_grad, on_step);
    r.meta_grad = query_gradient(theta, mask, ep, &r.query_loss, &r.query_accuracy);
    if (mask) mask_inplace(r.meta_grad.tensors, *mask);
    if (record_steps) r.step_accuracies.push_back(r.query_accuracy);
    r.fine_tuned = std::move(theta);
    if (mask) r.mask = *mask;
    return r;
}

ProtoPass protonet_forward(const ParamSet& params, const Mask* mask, const Episode& ep) {
    const std::size_t ns = ep.support_x.rows(), nq = ep.query_x.rows(), d = ep.support_x.cols();
    const std::size_t n = ep.n_way, total = ns + nq;
    if (ep.query_x.cols() != d) throw DimensionError("support and query dimensions differ");
    Tensor x({total, d});
    std::copy(ep.support_x.data().begin(), ep.support_x.data().end(), x.data().begin());
    std::copy(ep.query_x.data().begin(), ep.query_x.data().end(), x.data().begin() + static_cast<std::ptrdiff_t>(ns * d));

    std::vector<std::size_t> counts(n, 0);
    for (int y : ep.support_y) {
        if (y < 0 || static_cast<std::size_t>(y) >= n) throw DomainError("support label out of range");
        ++counts[static_cast<std::size_t>(y)];
    }
    Tensor averaging({n, total});
    for (std::size_t s = 0; s < ns; ++s) {
        const auto way = static_cast<std::size_t>(ep.support_y[s]);
        averaging.at(way, s) = 1.0 / static_cast<double>(counts[way]);
    }
    Tensor select({nq, total});
    for (std::size_t q = 0; q < nq; ++q) select.at(q, ns + q) = 1.0;

    ProtoPass p{forward_masked(params, mask, x), {}, {}, {}};
    Tape& t = p.fp.tape;
    p.prototypes = t.matmul(t.constant(std::move(averaging)), p.fp.output);
    const Var queries = t.matmul(t.constant(std::move(select)), p.fp.output);
    p.logits = t.neg_sq_dist(queries, p.prototypes);
    p.loss = t.cross_entropy(p.logits, ep.query_y);
    return p;
}

InnerResult inner_protonet(const ParamSet& omega, const Episode& ep, const Mask* mask) {
    ProtoPass p = protonet_forward(omega, mask, ep);
    InnerResult r;
    r.query_loss = p.fp.tape.value(p.loss)[0];
    r.query_accuracy = accuracy(p.fp.tape.value(p.logits), ep.query_y);
    r.meta_grad = p.fp.gradients(p.loss);
    if (mask) {
        mask_inplace(r.meta_grad.tensors, *mask);
        r.mask = *mask;
        r.fine_tuned = apply_mask(omega, *mask);
    } else {
        r.fine_tuned = omega;
    }
    return r;
}

void MetaConfig::validate() const {
    if (steps < 1) throw DomainError("inner steps must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be a finite non-negative number");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be a finite positive number");
    if (!(rho_min >= 0.0) || !(rho_max < 1.0) || rho_min > rho_max)
        throw DomainError("pruning rates must satisfy 0 <= rho_min <= rho_max < 1");
    if (subnets > 0 && strategy == Strategy::None)
        throw DomainError("sub-networks (U > 0) need a pruning strategy");
    if (threads == 0) throw DomainError("threads must be >= 1");
}

double MetaUpdateReport::mean_full_loss() const {
    double s = 0.0;
    for (const auto& t : tasks) s += t.full.query_loss;
    return tasks.empty() ? 0.0 : s / static_cast<double>(tasks.size());
}

double MetaUpdateReport::mean_full_accuracy() const {
    double s = 0.0;
    for (const auto& t : tasks) s += t.full.query_accuracy;
    return tasks.empty() ? 0.0 : s / static_cast<double>(tasks.size());
}

namespace {

InnerResult run_inner(Method method, const ParamSet& params, const Episode& ep, const Mask* mask,
                      const MetaConfig& cfg) {
    return method == Method::FoMAML ? inner_fomaml(params, ep, mask, cfg.steps, cfg.alpha, cfg.record_steps)
                                    : inner_protonet(params, ep, mask);
}

TaskReport run_task(const ParamSet& omega, const Episode& ep, const MetaConfig& cfg, std::uint64_t prune_seed,
                    std::size_t t) {
    TaskReport rep;
    rep.full = run_inner(cfg.method, omega, ep, nullptr, cfg);

    std::optional<MMCAScores> scores;
    if (cfg.strategy == Strategy::CP && cfg.subnets > 0) {
        if (cfg.mmca_at_init && cfg.method == Method::FoMAML)
            scores = mmca(omega, query_gradient(omega, nullptr, ep, nullptr, nullptr), t);
        else
            scores = mmca(omega, rep.full.meta_grad, t);
    }

    for (std::size_t u = 0; u < cfg.subnets; ++u) {
        const double rho = sample_rho(cfg.rho_min, cfg.rho_max, derive_seed(prune_seed, {t, u, 0}));
        rep.rhos.push_back(rho);
        InnerResult sub;
        switch (cfg.strategy) {
            case Strategy::WP: {
                const ParamSet small = slim(omega, rho);
                sub = run_inner(cfg.method, small, ep, nullptr, cfg);
                sub.meta_grad = scatter_slim(sub.meta_grad, small.arch(), omega.arch());
                sub.slim_arch = small.arch();
                break;
            }
            case Strategy::PP: {
                const Mask m = build_mask_pp(omega.arch(), rho, derive_seed(prune_seed, {t, u, 1}));
                sub = run_inner(cfg.method, omega, ep, &m, cfg);
                break;
            }
            case Strategy::CP: {
                const Mask m = build_mask_cp(*scores, rho);
                sub = run_inner(cfg.method, omega, ep, &m, cfg);
                break;
            }
            case Strategy::None:
                sub = run_inner(cfg.method, omega, ep, nullptr, cfg);
                break;
        }
        rep.subs.push_back(std::move(sub));
    }

    if (cfg.variant == Variant::Sum) {
        rep.task_grad = rep.full.meta_grad;
        for (const auto& s : rep.subs) rep.task_grad += s.meta_grad;
    } else {
        std::size_t best = 0;
        double best_loss = rep.full.query_loss;
        for (std::size_t u = 0; u < rep.subs.size(); ++u)
            if (rep.subs[u].query_loss > best_loss) {
                best_loss = rep.subs[u].query_loss;
                best = u + 1;
            }
        rep.contributor = best;
        rep.task_grad = best == 0 ? rep.full.meta_grad : rep.subs[best - 1].meta_grad;
    }
    return rep;
}

}  // namespace

MetaUpdateReport compute_meta_update(const ParamSet& omega, std::span<const Episode> episodes, const MetaConfig& cfg,
                                     std::uint64_t prune_seed) {
    cfg.validate();
    if (episodes.empty()) throw DomainError("a meta-step needs at least one task");
    MetaUpdateReport rep;
    rep.beta = cfg.beta;
    rep.variant = cfg.variant;
    rep.tasks.resize(episodes.size());

    const std::size_t workers = std::min<std::size_t>(cfg.threads, episodes.size());
    if (workers <= 1) {
        for (std::size_t t = 0; t < episodes.size(); ++t) rep.tasks[t] = run_task(omega, episodes[t], cfg, prune_seed, t);
    } else {
        std::vector<std::exception_ptr> errors(episodes.size());
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < episodes.size(); t += workers) {
                    try {
                        rep.tasks[t] = run_task(omega, episodes[t], cfg, prune_seed, t);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                }
            });
        pool.clear();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Fixed task order keeps the reduction bit-reproducible under any scheduling.
    rep.aggregated = Gradients::zeros(omega.arch());
    for (const auto& t : rep.tasks) rep.aggregated += t.task_grad;
    double scale = 1.0 / static_cast<double>(episodes.size());
    if (cfg.normalize_by_copies && cfg.variant == Variant::Sum) scale /= static_cast<double>(cfg.subnets + 1);
    rep.aggregated *= scale;
    return rep;
}

ParamSet Optimizer::step(const ParamSet& omega, const Gradients& g, double beta) {
    if (!g.tensors.congruent(omega.arch())) throw ContractError("optimizer: gradient not congruent with parameters");
    LayeredTensors next = omega.tensors();
    if (kind_ == OptimizerKind::SGD) {
        axpy_inplace(next, -beta, g.tensors);
        return ParamSet(omega.arch(), std::move(next));
    }
    const std::size_t n = omega.num_params();
    if (m_.size() != n) {
        m_.assign(n, 0.0);
        v_.assign(n, 0.0);
        t_ = 0;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    std::size_t k = 0;
    for (std::size_t l = 0; l < next.layers.size(); ++l) {
        auto& dst = next.layers[l];
        const auto& src = g.tensors.layers[l];
        for (std::size_t j = 0; j < dst.size(); ++j, ++k) {
            const double gj = src.get(j);
            m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * gj;
            v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * gj * gj;
            dst.ref(j) -= beta * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + kEps);
        }
    }
    return ParamSet(omega.arch(), std::move(next));
}

void Optimizer::export_state(TrainingState& s) const {
    s.optimizer = kind_ == OptimizerKind::Adam ? 1 : 0;
    s.adam_t = t_;
    s.adam_m = m_;
    s.adam_v = v_;
}

void Optimizer::import_state(const TrainingState& s, std::size_t num_params) {
    kind_ = s.optimizer == 1 ? OptimizerKind::Adam : OptimizerKind::SGD;
    t_ = s.adam_t;
    m_ = s.adam_m;
    v_ = s.adam_v;
    if (kind_ == OptimizerKind::Adam && t_ > 0 && (m_.size() != num_params || v_.size() != num_params))
        throw ContractError("optimizer moments do not match parameter count");
}

std::pair<ParamSet, MetaUpdateReport> meta_step_mgaug(const ParamSet& omega, std::span<const Episode> episodes,
                                                      const MetaConfig& cfg, std::uint64_t prune_seed,
                                                      Optimizer& opt) {
    MetaUpdateReport rep = compute_meta_update(omega, episodes, cfg, prune_seed);
    ParamSet next = opt.step(omega, rep.aggregated, cfg.beta);
    return {std::move(next), std::move(rep)};
}

EvalResult summarize(std::vector<double> accuracies) {
    EvalResult r;
    r.accuracies = std::move(accuracies);
    const double n = static_cast<double>(r.accuracies.size());
    if (r.accuracies.empty()) return r;
    double s = 0.0;
    for (double a : r.accuracies) s += a;
    r.mean = s / n;
    if (r.accuracies.size() > 1) {
        double ss = 0.0;
        for (double a : r.accuracies) ss += (a - r.mean) * (a - r.mean);
        r.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return r;
}

EvalResult evaluate(const ParamSet& omega, std::span<const Episode> episodes, Method method, int steps, double alpha) {
    std::vector<double> acc;
    acc.reserve(episodes.size());
    for (const auto& ep : episodes)
        acc.push_back(method == Method::FoMAML ? inner_fomaml(omega, ep, nullptr, steps, alpha).query_accuracy
                                               : inner_protonet(omega, ep, nullptr).query_accuracy);
    return summarize(std::move(acc));
}

}  // namespace mgaug
