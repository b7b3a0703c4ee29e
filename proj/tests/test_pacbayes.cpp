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


#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <sstream>

#include "mgaug/errors.hpp"
#include "mgaug/pacbayes.hpp"
#include "mgaug/rng.hpp"

namespace mgaug {
namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

// 50-digit evaluation of the bound, written from the formula directly.
Big big_bound(const BoundInputs& in) {
    const Big T = static_cast<double>(in.tasks());
    const Big D = in.kl_hyper, delta = in.delta, rho = in.rho;
    Big err = 0, task = 0;
    for (std::size_t i = 0; i < in.tasks(); ++i) {
        const Big m = static_cast<double>(in.samples[i]);
        err += Big(in.empirical_errors[i]);
        const Big kl = D + (Big(1) - rho) / 2 * Big(in.theta_norms_sq[i]);
        task += sqrt((kl + log(2 * T * m / delta)) / (2 * (m - 1)));
    }
    return err / T + sqrt((D + log(2 * T / delta)) / (2 * (T - 1))) + task / T;
}

BoundInputs random_inputs(Rng& rng) {
    BoundInputs in;
    const std::size_t t = 2 + rng.below(30);
    for (std::size_t i = 0; i < t; ++i) {
        in.samples.push_back(2 + rng.below(500));
        in.theta_norms_sq.push_back(rng.uniform(0.0, 200.0));
        in.empirical_errors.push_back(rng.uniform());
    }
    in.delta = rng.uniform(0.001, 1.0);
    in.kl_hyper = rng.uniform(0.0, 50.0);
    in.rho = rng.uniform();
    return in;
}

TEST(Bound, KnownValue) {
    // T = 2, m = 2, delta = 1, D = 0, rho = 1, zero norms and errors:
    //   env = sqrt(ln 4 / 2), task = sqrt(ln 8 / 2).
    BoundInputs in;
    in.samples = {2, 2};
    in.delta = 1.0;
    in.rho = 1.0;
    in.theta_norms_sq = {0, 0};
    in.empirical_errors = {0, 0};
    const BoundTerms b = bound_terms(in);
    EXPECT_NEAR(b.environment, std::sqrt(std::log(4.0) / 2), 1e-15);
    EXPECT_NEAR(b.task, std::sqrt(std::log(8.0) / 2), 1e-15);
    EXPECT_NEAR(b.total, b.environment + b.task, 1e-15);
}

TEST(Bound, MatchesHighPrecisionOracle) {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const BoundInputs in = random_inputs(rng);
        const double want = big_bound(in).convert_to<double>();
        const double got = bound(in);
        EXPECT_LE(std::abs(got - want) / want, 1e-12) << trial;
    }
}

TEST(Bound, TermsAddUp) {
    Rng rng(5);
    const BoundInputs in = random_inputs(rng);
    const BoundTerms b = bound_terms(in);
    EXPECT_DOUBLE_EQ(b.total, b.empirical + b.environment + b.task);
}

TEST(Bound, KlTerm) {
    EXPECT_DOUBLE_EQ(kl_term(1.5, 0.2, 10.0), 1.5 + 0.4 * 10.0);
    EXPECT_DOUBLE_EQ(kl_term(2.0, 1.0, 10.0), 2.0);
    EXPECT_THROW(kl_term(-1.0, 0.2, 1.0), DomainError);
}

TEST(Bound, Monotonicity) {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const BoundInputs in = random_inputs(rng);
        const double b0 = bound(in);
        BoundInputs r = in;
        r.rho = std::min(1.0, in.rho + rng.uniform(0.01, 0.5));
        if (r.rho > in.rho) EXPECT_LT(bound(r), b0);
        BoundInputs d = in;
        d.kl_hyper += rng.uniform(0.01, 5.0);
        EXPECT_GT(bound(d), b0);
        BoundInputs e = in;
        const std::size_t i = rng.below(in.tasks());
        e.empirical_errors[i] = std::min(1.0, in.empirical_errors[i] + 0.05);
        if (e.empirical_errors[i] > in.empirical_errors[i]) EXPECT_GT(bound(e), b0);
        BoundInputs m = in;
        m.samples[i] += 1 + rng.below(100);
        EXPECT_LT(bound(m), b0);
    }
}

TEST(Bound, RejectsInvalidInputs) {
    BoundInputs ok;
    ok.samples = {5, 5};
    ok.theta_norms_sq = {1, 1};
    ok.empirical_errors = {0.1, 0.2};
    EXPECT_NO_THROW(ok.validate());
    auto broken = [&](auto f) {
        BoundInputs b = ok;
        f(b);
        EXPECT_THROW(bound(b), DomainError);
    };
    broken([](BoundInputs& b) { b.samples = {5}, b.theta_norms_sq = {1}, b.empirical_errors = {0.1}; });
    broken([](BoundInputs& b) { b.samples[0] = 1; });
    broken([](BoundInputs& b) { b.delta = 0.0; });
    broken([](BoundInputs& b) { b.delta = 1.5; });
    broken([](BoundInputs& b) { b.kl_hyper = -0.1; });
    broken([](BoundInputs& b) { b.rho = 1.1; });
    broken([](BoundInputs& b) { b.empirical_errors[1] = 1.2; });
    broken([](BoundInputs& b) { b.theta_norms_sq[0] = std::nan(""); });
    broken([](BoundInputs& b) { b.theta_norms_sq.pop_back(); });
}

TEST(BoundFile, ParsesAndBroadcasts) {
    std::istringstream in("T = 3\nm = 20\ndelta = 0.05\nkl_hyper = 2\ntheta_norms_sq = 1, 2, 3\n"
                          "rho = 0.1\nempirical_errors = 0.2 # all tasks\n");
    const BoundInputs b = read_bound_inputs(in);
    EXPECT_EQ(b.samples, (std::vector<std::size_t>{20, 20, 20}));
    EXPECT_EQ(b.theta_norms_sq, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(b.empirical_errors, (std::vector<double>{0.2, 0.2, 0.2}));
    EXPECT_DOUBLE_EQ(b.delta, 0.05);
    EXPECT_DOUBLE_EQ(b.rho, 0.1);
}

TEST(BoundFile, RequiresDivergenceAndKnownKeys) {
    std::istringstream no_kl("T = 2\nm = 5\ntheta_norms_sq = 1\nempirical_errors = 0.1\n");
    EXPECT_THROW(read_bound_inputs(no_kl), ConfigError);
    std::istringstream unknown("T = 2\nm = 5\nkl_hyper = 0\ntheta_norms_sq = 1\nempirical_errors = 0.1\nlr = 3\n");
    EXPECT_THROW(read_bound_inputs(unknown), ConfigError);
    std::istringstream wrong_len("T = 3\nm = 5, 6\nkl_hyper = 0\ntheta_norms_sq = 1\nempirical_errors = 0.1\n");
    EXPECT_THROW(read_bound_inputs(wrong_len), ConfigError);
    std::istringstream bad_num("T = 2\nm = 5\nkl_hyper = abc\ntheta_norms_sq = 1\nempirical_errors = 0.1\n");
    EXPECT_THROW(read_bound_inputs(bad_num), ConfigError);
}

}  // namespace
}  // namespace mgaug
