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

#include "mgaug/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "mgaug/errors.hpp"

namespace mgaug {

namespace {

constexpr std::uint32_t kFlagState = 1u << 0;
constexpr std::uint32_t kFlagMask = 1u << 1;

class Writer {
public:
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw IoError("checkpoint truncated");
    }
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

template <class Fn>
void for_each_flat(const LayeredTensors& t, Fn&& fn) {
    for (const auto& l : t.layers)
        for (std::size_t j = 0; j < l.size(); ++j) fn(l.get(j));
}

}  // namespace

MaskRuns encode_mask_runs(const Mask& mask) {
    MaskRuns r;
    bool started = false;
    std::uint8_t current = 1;
    for_each_flat(mask.tensors, [&](double v) {
        const std::uint8_t bit = v != 0.0 ? 1 : 0;
        if (!started) {
            r.first = bit;
            current = bit;
            r.runs.push_back(0);
            started = true;
        }
        if (bit != current) {
            r.runs.push_back(0);
            current = bit;
        }
        ++r.runs.back();
    });
    return r;
}

Mask decode_mask_runs(const MaskRuns& runs, const Arch& arch) {
    Mask m{LayeredTensors::filled(arch, 0.0), 0.0};
    std::uint64_t total = 0;
    for (std::uint32_t n : runs.runs) total += n;
    if (total != arch.num_params()) throw IoError("mask run lengths do not cover the arch");
    std::size_t run = 0;
    std::uint32_t left = runs.runs.empty() ? 0 : runs.runs[0];
    double value = runs.first ? 1.0 : 0.0;
    for (auto& l : m.tensors.layers)
        for (std::size_t j = 0; j < l.size(); ++j) {
            while (left == 0) {
                ++run;
                left = runs.runs.at(run);
                value = 1.0 - value;
            }
            l.ref(j) = value;
            --left;
        }
    m.refresh_fraction();
    return m;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
    Writer w;
    for (char c : {'M', 'G', 'C', 'K'}) w.u8(static_cast<std::uint8_t>(c));
    w.u32(kCheckpointVersion);
    w.u32((ck.state ? kFlagState : 0u) | (ck.mask ? kFlagMask : 0u));
    const auto& widths = ck.params.arch().widths();
    w.u32(static_cast<std::uint32_t>(widths.size()));
    for (std::size_t v : widths) w.u32(static_cast<std::uint32_t>(v));
    for_each_flat(ck.params.tensors(), [&](double v) { w.f64(v); });
    if (ck.state) {
        const TrainingState& s = *ck.state;
        w.u64(s.epochs_done);
        w.u64(s.meta_steps_done);
        w.u8(s.optimizer);
        if (s.optimizer == 1) {
            if (s.adam_m.size() != ck.params.num_params() || s.adam_v.size() != ck.params.num_params())
                throw ContractError("optimizer moments do not match parameter count");
            w.u64(s.adam_t);
            for (double v : s.adam_m) w.f64(v);
            for (double v : s.adam_v) w.f64(v);
        }
    }
    if (ck.mask) {
        if (!ck.mask->tensors.congruent(ck.params.arch())) throw ContractError("checkpoint mask incongruent");
        const MaskRuns r = encode_mask_runs(*ck.mask);
        w.u8(r.first);
        w.u32(static_cast<std::uint32_t>(r.runs.size()));
        for (std::uint32_t n : r.runs) w.u32(n);
    }
    return std::move(w.bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    for (char c : {'M', 'G', 'C', 'K'})
        if (r.u8() != static_cast<std::uint8_t>(c)) throw IoError("not an MGCK checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t flags = r.u32();
    const std::uint32_t nw = r.u32();
    if (nw < 2 || nw > 64) throw IoError("implausible arch in checkpoint");
    std::vector<std::size_t> widths(nw);
    for (auto& v : widths) v = r.u32();
    Arch arch(widths);
    LayeredTensors t = LayeredTensors::filled(arch, 0.0);
    for (auto& l : t.layers)
        for (std::size_t j = 0; j < l.size(); ++j) l.ref(j) = r.f64();
    Checkpoint ck{ParamSet(arch, std::move(t)), std::nullopt, std::nullopt};
    if (flags & kFlagState) {
        TrainingState s;
        s.epochs_done = r.u64();
        s.meta_steps_done = r.u64();
        s.optimizer = r.u8();
        if (s.optimizer > 1) throw IoError("unknown optimizer tag in checkpoint");
        if (s.optimizer == 1) {
            s.adam_t = r.u64();
            const std::size_t n = arch.num_params();
            s.adam_m.resize(n);
            s.adam_v.resize(n);
            for (double& v : s.adam_m) v = r.f64();
            for (double& v : s.adam_v) v = r.f64();
        }
        ck.state = std::move(s);
    }
    if (flags & kFlagMask) {
        MaskRuns runs;
        runs.first = r.u8();
        const std::uint32_t n = r.u32();
        if (n > arch.num_params()) throw IoError("implausible mask run count");
        runs.runs.resize(n);
        for (auto& v : runs.runs) v = r.u32();
        ck.mask = decode_mask_runs(runs, arch);
    }
    if (!r.done()) throw IoError("trailing bytes after checkpoint");
    return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    const auto bytes = encode_checkpoint(ck);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace mgaug
