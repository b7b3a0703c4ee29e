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

#include "mgaug/harness.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "mgaug/checkpoint.hpp"
#include "mgaug/errors.hpp"
#include "mgaug/kv.hpp"
#include "mgaug/pacbayes.hpp"
#include "mgaug/rng.hpp"

namespace mgaug {

namespace fs = std::filesystem;

namespace {

std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "sgd") return OptimizerKind::SGD;
    if (s == "adam") return OptimizerKind::Adam;
    throw ConfigError("optimizer: expected sgd or adam, got '" + s + "'");
}

std::size_t to_size(const std::string& k, const std::string& v) { return static_cast<std::size_t>(kv::to_u64(k, v)); }

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + kv::format_double(v[i]);
    return out;
}

std::optional<std::uint64_t> parse_opt_seed(const std::string& k, const std::string& v) {
    if (v == "auto" || v.empty()) return std::nullopt;
    return kv::to_u64(k, v);
}

std::string opt_seed(const std::optional<std::uint64_t>& s) { return s ? std::to_string(*s) : "auto"; }

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define MG_SIZE(name)                                                                             \
    {#name, {[](RunConfig& c, const std::string& k, const std::string& v) { c.name = to_size(k, v); }, \
             [](const RunConfig& c) { return std::to_string(c.name); }}}
#define MG_DOUBLE(name)                                                                                 \
    {#name, {[](RunConfig& c, const std::string& k, const std::string& v) { c.name = kv::to_double(k, v); }, \
             [](const RunConfig& c) { return kv::format_double(c.name); }}}
#define MG_BOOL(name)                                                                                 \
    {#name, {[](RunConfig& c, const std::string& k, const std::string& v) { c.name = kv::to_bool(k, v); }, \
             [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }}}
#define MG_SEED(name)                                                                                      \
    {#name, {[](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_opt_seed(k, v); }, \
             [](const RunConfig& c) { return opt_seed(c.name); }}}

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"method", {[](RunConfig& c, const std::string&, const std::string& v) { c.method = parse_method(v); },
                    [](const RunConfig& c) { return to_string(c.method); }}},
        {"strategy", {[](RunConfig& c, const std::string&, const std::string& v) { c.strategy = parse_strategy(v); },
                      [](const RunConfig& c) { return to_string(c.strategy); }}},
        {"variant", {[](RunConfig& c, const std::string&, const std::string& v) { c.variant = parse_variant(v); },
                     [](const RunConfig& c) { return to_string(c.variant); }}},
        MG_SIZE(U),
        MG_DOUBLE(rho_min),
        MG_DOUBLE(rho_max),
        MG_SIZE(N),
        MG_SIZE(K),
        MG_SIZE(Q),
        {"mode", {[](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_label_mode(v); },
                  [](const RunConfig& c) { return to_string(c.mode); }}},
        MG_SIZE(T),
        MG_SIZE(epochs),
        MG_SIZE(episodes_per_epoch),
        MG_DOUBLE(alpha),
        MG_DOUBLE(beta),
        {"inner_steps",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              const long long s = kv::to_int(k, v);
              if (s < 0 || s > 1000000) throw ConfigError("inner_steps out of range");
              c.inner_steps = static_cast<int>(s);
          },
          [](const RunConfig& c) { return std::to_string(c.inner_steps); }}},
        {"optimizer", {[](RunConfig& c, const std::string&, const std::string& v) { c.optimizer = parse_optimizer(v); },
                       [](const RunConfig& c) { return optimizer_name(c.optimizer); }}},
        MG_BOOL(normalize_by_copies),
        MG_BOOL(mmca_at_init),
        {"hidden",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              c.hidden.clear();
              for (const auto& s : kv::split_list(v)) c.hidden.push_back(to_size(k, s));
          },
          [](const RunConfig& c) { return join_sizes(c.hidden); }}},
        MG_SIZE(embed_dim),
        MG_SIZE(bank_train),
        MG_SIZE(bank_val),
        MG_SIZE(bank_test),
        MG_SIZE(dim),
        MG_DOUBLE(spread),
        {"seed", {[](RunConfig& c, const std::string& k, const std::string& v) { c.seed = kv::to_u64(k, v); },
                  [](const RunConfig& c) { return std::to_string(c.seed); }}},
        MG_SEED(bank_seed),
        MG_SEED(episode_seed),
        MG_SEED(init_seed),
        MG_SEED(prune_seed),
        MG_SEED(eval_seed),
        MG_SIZE(val_episodes),
        MG_SIZE(eval_episodes),
        {"threads",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              const auto t = kv::to_u64(k, v);
              if (t > 1024) throw ConfigError("threads out of range");
              c.threads = static_cast<unsigned>(t);
          },
          [](const RunConfig& c) { return std::to_string(c.threads); }}},
        MG_BOOL(probe),
        MG_SIZE(probe_tasks),
        {"probe_rhos",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              c.probe_rhos.clear();
              for (const auto& s : kv::split_list(v)) c.probe_rhos.push_back(kv::to_double(k, s));
          },
          [](const RunConfig& c) { return join_doubles(c.probe_rhos); }}},
        {"probe_strategy",
         {[](RunConfig& c, const std::string&, const std::string& v) { c.probe_strategy = parse_strategy(v); },
          [](const RunConfig& c) { return to_string(c.probe_strategy); }}},
        {"probe_split", {[](RunConfig& c, const std::string&, const std::string& v) { c.probe_split = parse_split(v); },
                         [](const RunConfig& c) { return to_string(c.probe_split); }}},
        {"bound_kl",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "none" || v.empty())
                  c.bound_kl.reset();
              else
                  c.bound_kl = kv::to_double(k, v);
          },
          [](const RunConfig& c) { return c.bound_kl ? kv::format_double(*c.bound_kl) : std::string("none"); }}},
        MG_DOUBLE(bound_delta),
        {"out", {[](RunConfig& c, const std::string&, const std::string& v) { c.out = v; },
                 [](const RunConfig& c) { return c.out; }}},
    };
    return table;
}

#undef MG_SIZE
#undef MG_DOUBLE
#undef MG_BOOL
#undef MG_SEED

const Field& field(const std::string& key) {
    for (const auto& [k, f] : fields())
        if (k == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [name, f] : fields()) out.push_back(name);
        return out;
    }();
    return k;
}

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, key, value); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

std::string RunConfig::echo() const {
    std::string out;
    for (const auto& [k, f] : fields()) out += k + " = " + f.get(*this) + "\n";
    return out;
}

void RunConfig::validate() const {
    require(N >= 2, "N must be >= 2");
    require(K >= 1 && Q >= 1, "K and Q must be >= 1");
    require(T >= 1, "T must be >= 1");
    require(epochs >= 1, "epochs must be >= 1");
    require(episodes_per_epoch >= T && episodes_per_epoch % T == 0,
            "episodes_per_epoch must be a positive multiple of T");
    require(alpha > 0.0 && std::isfinite(alpha), "alpha must be > 0");
    require(beta > 0.0 && std::isfinite(beta), "beta must be > 0");
    require(method == Method::ProtoNet || inner_steps >= 1, "inner_steps must be >= 1 for fomaml");
    require(rho_min >= 0.0 && rho_max < 1.0 && rho_min <= rho_max, "need 0 <= rho_min <= rho_max < 1");
    require(dim >= 1, "dim must be >= 1");
    require(spread >= 0.0 && std::isfinite(spread), "spread must be finite and >= 0");
    require(bank_train >= N && bank_val >= N && bank_test >= N, "every bank split needs at least N classes");
    require(!hidden.empty(), "hidden must list at least one width");
    for (auto h : hidden) require(h >= 1, "hidden widths must be >= 1");
    require(embed_dim >= 1, "embed_dim must be >= 1");
    require(val_episodes >= 1, "val_episodes must be >= 1");
    require(eval_episodes >= 2, "eval_episodes must be >= 2");
    require(threads >= 1, "threads must be >= 1");
    require(!out.empty(), "out must be non-empty");
    require(bound_delta > 0.0 && bound_delta <= 1.0, "bound_delta must lie in (0, 1]");
    if (bound_kl) require(*bound_kl >= 0.0, "bound_kl must be >= 0");
    require(!bound_kl || episodes_per_epoch >= 2, "the bound needs at least two tasks per epoch");
    if (probe) {
        require(method == Method::FoMAML, "probes fine-tune with the fomaml inner loop");
        require(probe_tasks >= 2, "probe_tasks must be >= 2");
        require(!probe_rhos.empty(), "probe_rhos must list at least one value");
        for (double r : probe_rhos) require(r >= 0.0 && r < 1.0, "probe rhos must lie in [0, 1)");
    }
    try {
        meta().validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

std::uint64_t RunConfig::bank_stream() const { return bank_seed.value_or(stream_seed(seed, Stream::Bank)); }
std::uint64_t RunConfig::episode_stream() const { return episode_seed.value_or(stream_seed(seed, Stream::Episode)); }
std::uint64_t RunConfig::init_stream() const { return init_seed.value_or(stream_seed(seed, Stream::Init)); }
std::uint64_t RunConfig::prune_stream() const { return prune_seed.value_or(stream_seed(seed, Stream::Prune)); }
std::uint64_t RunConfig::eval_stream() const { return eval_seed.value_or(stream_seed(seed, Stream::Eval)); }

Arch RunConfig::arch() const {
    std::vector<std::size_t> w{dim};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(method == Method::FoMAML ? N : embed_dim);
    return Arch(std::move(w));
}

BankSpec RunConfig::bank_spec() const {
    BankSpec b;
    b.num_train = bank_train;
    b.num_val = bank_val;
    b.num_test = bank_test;
    b.dim = dim;
    b.spread = spread;
    b.seed = bank_stream();
    return b;
}

EpisodeShape RunConfig::shape() const { return EpisodeShape{N, K, Q}; }

MetaConfig RunConfig::meta() const {
    MetaConfig m;
    m.method = method;
    m.strategy = strategy;
    m.variant = variant;
    m.subnets = U;
    m.rho_min = rho_min;
    m.rho_max = rho_max;
    m.steps = inner_steps;
    m.alpha = alpha;
    m.beta = beta;
    m.normalize_by_copies = normalize_by_copies;
    m.mmca_at_init = mmca_at_init;
    m.threads = threads;
    return m;
}

ProbeConfig RunConfig::probe_config() const {
    ProbeConfig p;
    p.mode = mode;
    p.split = probe_split;
    p.shape = shape();
    p.rhos = probe_rhos;
    p.strategy = probe_strategy;
    p.tasks = probe_tasks;
    p.steps = inner_steps;
    p.alpha = alpha;
    p.seed = derive_seed(eval_stream(), {static_cast<std::uint64_t>(Stream::Probe)});
    return p;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    RunConfig cfg;
    for (const auto& [k, v] : kv::parse(in)) cfg.set(k, v);
    return cfg;
}

// ---------------------------------------------------------------------------
// CSV persistence

CsvAppender::CsvAppender(const std::string& path, const std::string& header) : path_(path) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
    if (fresh) append(header);
}

CsvAppender::~CsvAppender() {
    if (fd_ >= 0) ::close(fd_);
}

void CsvAppender::append(const std::string& row) {
    const std::string line = row + "\n";
    const ssize_t n = ::write(fd_, line.data(), line.size());
    if (n != static_cast<ssize_t>(line.size())) throw IoError("short write to '" + path_ + "'");
    if (::fsync(fd_) != 0) throw IoError("fsync failed on '" + path_ + "'");
}

std::string metrics_header(bool with_bound) {
    return with_bound ? "epoch,train_loss,train_acc,val_loss,val_acc,bound" : "epoch,train_loss,train_acc,val_loss,val_acc";
}

std::string format_metrics_row(const MetricsRow& r, bool with_bound) {
    std::string s = std::to_string(r.epoch) + "," + fmt9(r.train_loss) + "," + fmt9(r.train_acc) + "," +
                    fmt9(r.val_loss) + "," + fmt9(r.val_acc);
    if (with_bound) s += "," + (r.bound ? fmt9(*r.bound) : std::string());
    return s;
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::vector<MetricsRow> rows;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string::npos) break;  // incomplete trailing line
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (header) {
            header = false;
            if (line.rfind("epoch,", 0) != 0) throw IoError("'" + path + "' has no metrics header");
            continue;
        }
        std::vector<std::string> cells;
        std::size_t s = 0;
        while (true) {
            const auto c = line.find(',', s);
            cells.push_back(line.substr(s, c == std::string::npos ? std::string::npos : c - s));
            if (c == std::string::npos) break;
            s = c + 1;
        }
        if (cells.size() < 5) throw IoError("malformed metrics row: '" + line + "'");
        MetricsRow r;
        try {
            r.epoch = to_size("epoch", cells[0]);
            r.train_loss = kv::to_double("train_loss", cells[1]);
            r.train_acc = kv::to_double("train_acc", cells[2]);
            r.val_loss = kv::to_double("val_loss", cells[3]);
            r.val_acc = kv::to_double("val_acc", cells[4]);
            if (cells.size() > 5 && !cells[5].empty()) r.bound = kv::to_double("bound", cells[5]);
        } catch (const ConfigError& e) {
            throw IoError(std::string("malformed metrics row: ") + e.what());
        }
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Training

RunData make_run_data(const RunConfig& cfg) {
    RunData d;
    d.bank = make_bank(cfg.bank_spec());
    const std::uint64_t vs = derive_seed(cfg.eval_stream(), {static_cast<std::uint64_t>(Split::Val)});
    for (std::size_t i = 0; i < cfg.val_episodes; ++i)
        d.val.push_back(sample_episode(d.bank, Split::Val, cfg.shape(), cfg.mode, derive_seed(vs, {i})));
    return d;
}

Episode train_episode(const RunConfig& cfg, const ClassBank& bank, std::uint64_t index) {
    return sample_episode(bank, Split::Train, cfg.shape(), cfg.mode, derive_seed(cfg.episode_stream(), {index}));
}

namespace {

InnerResult adapt(const ParamSet& omega, const Episode& ep, const RunConfig& cfg) {
    return cfg.method == Method::FoMAML ? inner_fomaml(omega, ep, nullptr, cfg.inner_steps, cfg.alpha)
                                        : inner_protonet(omega, ep, nullptr);
}

struct Sink {
    std::unique_ptr<CsvAppender> metrics;
    std::unique_ptr<CsvAppender> timing;
    std::string checkpoint;
};

struct TrainState {
    ParamSet omega;
    Optimizer opt;
    std::uint64_t epochs_done = 0;
    std::uint64_t steps_done = 0;
};

void save_state(const std::string& path, const TrainState& s) {
    Checkpoint ck;
    ck.params = s.omega;
    TrainingState ts;
    ts.epochs_done = s.epochs_done;
    ts.meta_steps_done = s.steps_done;
    s.opt.export_state(ts);
    ck.state = ts;
    save_checkpoint(path, ck);
}

std::vector<MetricsRow> train_loop(const RunConfig& cfg, const RunData& data, TrainState& st, Sink* sink,
                                   const RunHooks& hooks) {
    using clock = std::chrono::steady_clock;
    const MetaConfig mc = cfg.meta();
    const std::size_t steps_per_epoch = cfg.episodes_per_epoch / cfg.T;
    const bool with_bound = cfg.bound_kl.has_value();
    std::vector<MetricsRow> rows;

    while (st.epochs_done < cfg.epochs) {
        const auto t0 = clock::now();
        double loss = 0.0, acc = 0.0;
        std::vector<double> errs, norms;
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            std::vector<Episode> batch;
            for (std::size_t t = 0; t < cfg.T; ++t)
                batch.push_back(train_episode(cfg, data.bank, st.steps_done * cfg.T + t));
            auto [next, rep] = meta_step_mgaug(st.omega, batch, mc, derive_seed(cfg.prune_stream(), {st.steps_done}),
                                               st.opt);
            loss += rep.mean_full_loss();
            acc += rep.mean_full_accuracy();
            if (with_bound)
                for (const auto& tr : rep.tasks) {
                    errs.push_back(1.0 - tr.full.query_accuracy);
                    norms.push_back(tr.full.fine_tuned.squared_norm());
                }
            st.omega = std::move(next);
            ++st.steps_done;
            if (hooks.on_step) hooks.on_step(st.steps_done, rep);
        }
        const auto t1 = clock::now();

        MetricsRow row;
        row.epoch = st.epochs_done + 1;
        row.train_loss = loss / static_cast<double>(steps_per_epoch);
        row.train_acc = acc / static_cast<double>(steps_per_epoch);
        double vl = 0.0, va = 0.0;
        for (const auto& ep : data.val) {
            const InnerResult r = adapt(st.omega, ep, cfg);
            vl += r.query_loss;
            va += r.query_accuracy;
        }
        row.val_loss = vl / static_cast<double>(data.val.size());
        row.val_acc = va / static_cast<double>(data.val.size());
        if (with_bound) {
            BoundInputs bi;
            bi.samples.assign(errs.size(), cfg.N * cfg.Q);
            bi.delta = cfg.bound_delta;
            bi.kl_hyper = *cfg.bound_kl;
            bi.theta_norms_sq = norms;
            bi.rho = cfg.strategy == Strategy::None ? 0.0 : cfg.rho_max;
            bi.empirical_errors = errs;
            row.bound = bound(bi);
        }
        const auto t2 = clock::now();
        ++st.epochs_done;
        rows.push_back(row);

        if (sink) {
            // Row before checkpoint: a crash between the two leaves one row
            // past the checkpoint, which resume drops and regenerates.
            sink->metrics->append(format_metrics_row(row, with_bound));
            save_state(sink->checkpoint, st);
            const std::chrono::duration<double> tr = t1 - t0, tv = t2 - t1;
            sink->timing->append(std::to_string(row.epoch) + "," + to_string(cfg.strategy) + "," +
                                 to_string(cfg.variant) + "," + fmt9(tr.count()) + "," + fmt9(tv.count()));
        }
    }
    return rows;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + tmp + "'");
        f << text;
        f.flush();
        if (!f) throw IoError("write failed on '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp + "': " + ec.message());
}

void prepare_out(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw IoError("cannot create '" + cfg.out + "': " + ec.message());
    write_text_atomic((fs::path(cfg.out) / "config.txt").string(), cfg.echo());
}

Sink open_sink(const RunConfig& cfg) {
    const fs::path dir(cfg.out);
    Sink s;
    s.metrics = std::make_unique<CsvAppender>((dir / "metrics.csv").string(), metrics_header(cfg.bound_kl.has_value()));
    s.timing = std::make_unique<CsvAppender>((dir / "timing.csv").string(),
                                             "epoch,strategy,variant,train_seconds,val_seconds");
    s.checkpoint = (dir / "checkpoint.mgck").string();
    return s;
}

void finish(const RunConfig& cfg, const RunData& data, const ParamSet& omega) {
    if (!cfg.probe) return;
    const HatProfile prof = memorization_probe(omega, data.bank, cfg.probe_config(), to_string(cfg.strategy));
    std::ostringstream os;
    write_probe_csv(os, profile_rows(prof));
    write_text_atomic((fs::path(cfg.out) / "probe.csv").string(), os.str());
}

}  // namespace

RunResult train_in_memory(const RunConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    const RunData data = make_run_data(cfg);
    TrainState st{init_params(cfg.arch(), cfg.init_stream()), Optimizer(cfg.optimizer)};
    auto rows = train_loop(cfg, data, st, nullptr, hooks);
    return {std::move(st.omega), std::move(rows)};
}

RunResult run(const RunConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    prepare_out(cfg);
    const fs::path dir(cfg.out);
    for (const char* f : {"metrics.csv", "timing.csv", "probe.csv"}) fs::remove(dir / f);
    const RunData data = make_run_data(cfg);
    TrainState st{init_params(cfg.arch(), cfg.init_stream()), Optimizer(cfg.optimizer)};
    Sink sink = open_sink(cfg);
    auto rows = train_loop(cfg, data, st, &sink, hooks);
    finish(cfg, data, st.omega);
    return {std::move(st.omega), std::move(rows)};
}

RunResult resume(const std::string& checkpoint_path, const RunConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    Checkpoint ck = load_checkpoint(checkpoint_path);
    if (!ck.state) throw ContractError("checkpoint has no training state; cannot resume");
    if (!(ck.params.arch() == cfg.arch()))
        throw ContractError("checkpoint architecture does not match the configuration");

    TrainState st{std::move(ck.params), Optimizer(cfg.optimizer)};
    st.epochs_done = ck.state->epochs_done;
    st.steps_done = ck.state->meta_steps_done;
    const bool same_opt = (ck.state->optimizer == 1) == (cfg.optimizer == OptimizerKind::Adam);
    if (same_opt) st.opt.import_state(*ck.state, st.omega.num_params());
    if (st.steps_done != st.epochs_done * (cfg.episodes_per_epoch / cfg.T))
        throw ContractError("checkpoint step count is inconsistent with episodes_per_epoch / T");

    prepare_out(cfg);
    const fs::path dir(cfg.out);
    const bool with_bound = cfg.bound_kl.has_value();
    // Keep only rows the checkpoint covers; drop a torn trailing line.
    std::string kept = metrics_header(with_bound) + "\n";
    if (fs::exists(dir / "metrics.csv"))
        for (const auto& r : read_metrics((dir / "metrics.csv").string()))
            if (r.epoch <= st.epochs_done) kept += format_metrics_row(r, with_bound) + "\n";
    write_text_atomic((dir / "metrics.csv").string(), kept);
    fs::remove(dir / "probe.csv");

    const RunData data = make_run_data(cfg);
    Sink sink = open_sink(cfg);
    sink.checkpoint = (dir / "checkpoint.mgck").string();
    auto rows = train_loop(cfg, data, st, &sink, hooks);
    finish(cfg, data, st.omega);
    return {std::move(st.omega), std::move(rows)};
}

EvalResult evaluate_split(const ParamSet& omega, const RunConfig& cfg, Split split, std::size_t episodes) {
    const ClassBank bank = make_bank(cfg.bank_spec());
    const std::uint64_t s = derive_seed(cfg.eval_stream(), {static_cast<std::uint64_t>(split), 0xE7A1});
    std::vector<Episode> eps;
    for (std::size_t i = 0; i < episodes; ++i)
        eps.push_back(sample_episode(bank, split, cfg.shape(), cfg.mode, derive_seed(s, {i})));
    return evaluate(omega, eps, cfg.method, cfg.inner_steps, cfg.alpha);
}

}  // namespace mgaug
