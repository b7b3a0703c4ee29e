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

// Synthetic Gaussian-cluster class banks and N-way K-shot episodes.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mgaug/autodiff.hpp"

namespace mgaug {

enum class Split : std::uint8_t { Train, Val, Test };

/// Mutually-exclusive (fresh label permutation per episode) or
/// non-mutually-exclusive (fixed label = class id mod N).
enum class LabelMode : std::uint8_t { ME, NME };

std::string to_string(Split s);
std::string to_string(LabelMode m);
Split parse_split(const std::string& s);
LabelMode parse_label_mode(const std::string& s);

struct ClassSpec {
    int id = 0;
    Split split = Split::Train;
    std::vector<double> mean;
    double std = 0.0;

    friend bool operator==(const ClassSpec&, const ClassSpec&) = default;
};

struct BankSpec {
    std::size_t num_train = 20;
    std::size_t num_val = 10;
    std::size_t num_test = 10;
    std::size_t dim = 16;
    /// Isotropic standard deviation of every class.
    double spread = 0.3;
    std::uint64_t seed = 0;
};

class ClassBank {
public:
    ClassBank() = default;
    ClassBank(std::size_t dim, std::vector<ClassSpec> classes);

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<ClassSpec>& classes() const noexcept { return classes_; }
    const ClassSpec& cls(int id) const { return classes_.at(static_cast<std::size_t>(id)); }
    /// Class ids of one split, ascending.
    std::vector<int> ids(Split split) const;

    friend bool operator==(const ClassBank&, const ClassBank&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<ClassSpec> classes_;
};

/// Class means uniform in [-1, 1]^dim. Ids are assigned train, then val, then test.
ClassBank make_bank(const BankSpec& spec);

/// One record per class: `id split std m_0 m_1 ...`, preceded by a
/// `# mgaug-bank v1 dim=<d>` header line.
void write_bank(std::ostream& out, const ClassBank& bank);
ClassBank read_bank(std::istream& in);

struct Episode {
    Tensor support_x;  // [N*K x d]
    std::vector<int> support_y;
    Tensor query_x;  // [N*Q x d]
    std::vector<int> query_y;
    /// Bank class used for way i = class_ids[i] (way order is label order).
    std::vector<int> class_ids;
    std::map<int, int> label_map;
    std::size_t n_way = 0;
};

struct EpisodeShape {
    std::size_t n_way = 5;
    std::size_t k_shot = 1;
    std::size_t q_query = 15;
};

/// Draws an episode with its own RNG seeded by `seed`. Samples in both sets
/// are grouped by label, K (resp. Q) per label.
Episode sample_episode(const ClassBank& bank, Split split, const EpisodeShape& shape, LabelMode mode,
                       std::uint64_t seed);

}  // namespace mgaug
