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

#include "mgaug/tasks.hpp"

#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mgaug/errors.hpp"
#include "mgaug/rng.hpp"

namespace mgaug {

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

std::string to_string(LabelMode m) { return m == LabelMode::ME ? "ME" : "NME"; }

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw DomainError("unknown split '" + s + "'");
}

LabelMode parse_label_mode(const std::string& s) {
    if (s == "ME" || s == "me") return LabelMode::ME;
    if (s == "NME" || s == "nme") return LabelMode::NME;
    throw DomainError("unknown label mode '" + s + "' (expected ME or NME)");
}

ClassBank::ClassBank(std::size_t dim, std::vector<ClassSpec> classes) : dim_(dim), classes_(std::move(classes)) {
    if (dim_ == 0) throw DomainError("bank dimension must be positive");
    std::set<std::vector<double>> means;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        const auto& c = classes_[i];
        if (c.id != static_cast<int>(i)) throw DomainError("bank class ids must be 0..n-1 in order");
        if (c.mean.size() != dim_) throw DimensionError("class mean has wrong dimension");
        if (!(c.std >= 0.0)) throw DomainError("class std must be non-negative");
        if (!means.insert(c.mean).second) throw DomainError("class means must be pairwise distinct");
    }
}

std::vector<int> ClassBank::ids(Split split) const {
    std::vector<int> out;
    for (const auto& c : classes_)
        if (c.split == split) out.push_back(c.id);
    return out;
}

ClassBank make_bank(const BankSpec& spec) {
    Rng rng(spec.seed);
    std::vector<ClassSpec> classes;
    const std::size_t total = spec.num_train + spec.num_val + spec.num_test;
    classes.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        ClassSpec c;
        c.id = static_cast<int>(i);
        c.split = i < spec.num_train ? Split::Train : (i < spec.num_train + spec.num_val ? Split::Val : Split::Test);
        c.mean.resize(spec.dim);
        for (double& v : c.mean) v = rng.uniform(-1.0, 1.0);
        c.std = spec.spread;
        classes.push_back(std::move(c));
    }
    return ClassBank(spec.dim, std::move(classes));
}

void write_bank(std::ostream& out, const ClassBank& bank) {
    out << "# mgaug-bank v1 dim=" << bank.dim() << "\n";
    out << std::setprecision(17);
    for (const auto& c : bank.classes()) {
        out << c.id << ' ' << to_string(c.split) << ' ' << c.std;
        for (double v : c.mean) out << ' ' << v;
        out << '\n';
    }
}

ClassBank read_bank(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty bank file");
    const std::string prefix = "# mgaug-bank v1 dim=";
    if (line.rfind(prefix, 0) != 0) throw IoError("missing bank header");
    std::size_t dim = 0;
    {
        const std::string d = line.substr(prefix.size());
        auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), dim);
        if (ec != std::errc() || dim == 0) throw IoError("bad bank dimension");
    }
    std::vector<ClassSpec> classes;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ClassSpec c;
        std::string split;
        if (!(ls >> c.id >> split >> c.std)) throw IoError("malformed bank record: " + line);
        c.split = parse_split(split);
        c.mean.resize(dim);
        for (double& v : c.mean)
            if (!(ls >> v)) throw IoError("bank record has too few mean components: " + line);
        std::string extra;
        if (ls >> extra) throw IoError("bank record has too many fields: " + line);
        classes.push_back(std::move(c));
    }
    return ClassBank(dim, std::move(classes));
}

namespace {

void fill_samples(const ClassBank& bank, const std::vector<int>& class_ids, std::size_t per_way, Rng& rng,
                  Tensor& x, std::vector<int>& y) {
    const std::size_t d = bank.dim();
    x = Tensor({class_ids.size() * per_way, d});
    y.clear();
    std::size_t row = 0;
    for (std::size_t way = 0; way < class_ids.size(); ++way) {
        const ClassSpec& c = bank.cls(class_ids[way]);
        for (std::size_t k = 0; k < per_way; ++k, ++row) {
            for (std::size_t j = 0; j < d; ++j) x.at(row, j) = c.mean[j] + c.std * rng.normal();
            y.push_back(static_cast<int>(way));
        }
    }
}

}  // namespace

Episode sample_episode(const ClassBank& bank, Split split, const EpisodeShape& shape, LabelMode mode,
                       std::uint64_t seed) {
    const std::size_t n = shape.n_way;
    if (n < 2) throw DomainError("episodes need at least two ways");
    if (shape.k_shot == 0 || shape.q_query == 0) throw DomainError("K and Q must be positive");
    Rng rng(seed);
    const std::vector<int> pool = bank.ids(split);
    Episode ep;
    ep.n_way = n;
    ep.class_ids.assign(n, -1);

    if (mode == LabelMode::NME) {
        std::vector<std::vector<int>> by_label(n);
        for (int id : pool) by_label[static_cast<std::size_t>(id) % n].push_back(id);
        for (std::size_t label = 0; label < n; ++label) {
            if (by_label[label].empty())
                throw DomainError("split " + to_string(split) + " has no class with label " + std::to_string(label) +
                                  " under the fixed assignment");
            ep.class_ids[label] = by_label[label][rng.below(by_label[label].size())];
        }
    } else {
        if (pool.size() < n)
            throw DomainError("split " + to_string(split) + " has " + std::to_string(pool.size()) +
                              " classes, episode needs " + std::to_string(n));
        // Partial Fisher-Yates: the first n entries are a uniform draw without
        // replacement in uniformly random order, which is the label permutation.
        std::vector<int> p = pool;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + rng.below(p.size() - i);
            std::swap(p[i], p[j]);
        }
        for (std::size_t label = 0; label < n; ++label) ep.class_ids[label] = p[label];
    }
    for (std::size_t label = 0; label < n; ++label) ep.label_map[ep.class_ids[label]] = static_cast<int>(label);

    fill_samples(bank, ep.class_ids, shape.k_shot, rng, ep.support_x, ep.support_y);
    fill_samples(bank, ep.class_ids, shape.q_query, rng, ep.query_x, ep.query_y);
    return ep;
}

}  // namespace mgaug
