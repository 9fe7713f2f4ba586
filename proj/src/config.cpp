#include "plab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace plab {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("bad numeric value: '" + s + "'");
    }
}

std::int64_t parse_int(const std::string& s) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("bad integer value: '" + s + "'");
    }
}

std::uint64_t parse_uint(const std::string& s) {
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("bad unsigned value: '" + s + "'");
    }
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("bad boolean value: '" + s + "'");
}

struct Field {
    const char* name;
    std::function<void(TrainConfig&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

std::vector<Field> field_table() {
    std::vector<Field> f;
    auto str = [&](const char* n, std::string TrainConfig::* p,
                   std::vector<std::string> allowed) {
        f.push_back({n,
                     [p, n, allowed](TrainConfig& c, const std::string& v) {
                         if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
                             throw std::invalid_argument(std::string(n) + ": bad value '" + v +
                                                         "'");
                         c.*p = v;
                     },
                     [p](const TrainConfig& c) { return c.*p; }});
    };
    auto dbl = [&](const char* n, double TrainConfig::* p) {
        f.push_back({n, [p](TrainConfig& c, const std::string& v) { c.*p = parse_double(v); },
                     [p](const TrainConfig& c) { return fmt_double(c.*p); }});
    };
    auto i32 = [&](const char* n, int TrainConfig::* p) {
        f.push_back({n, [p](TrainConfig& c, const std::string& v) {
                         c.*p = static_cast<int>(parse_int(v));
                     },
                     [p](const TrainConfig& c) { return std::to_string(c.*p); }});
    };
    auto i64 = [&](const char* n, std::int64_t TrainConfig::* p) {
        f.push_back({n, [p](TrainConfig& c, const std::string& v) { c.*p = parse_int(v); },
                     [p](const TrainConfig& c) { return std::to_string(c.*p); }});
    };
    auto u64 = [&](const char* n, std::uint64_t TrainConfig::* p) {
        f.push_back({n, [p](TrainConfig& c, const std::string& v) { c.*p = parse_uint(v); },
                     [p](const TrainConfig& c) { return std::to_string(c.*p); }});
    };
    auto bol = [&](const char* n, bool TrainConfig::* p) {
        f.push_back({n, [p](TrainConfig& c, const std::string& v) { c.*p = parse_bool(v); },
                     [p](const TrainConfig& c) { return c.*p ? "true" : "false"; }});
    };

    str("env", &TrainConfig::env, {"pointnav", "chain"});
    i32("chain_n_states", &TrainConfig::chain_n_states);
    i32("chain_episode_cap", &TrainConfig::chain_episode_cap);
    dbl("chain_slip_prob", &TrainConfig::chain_slip_prob);
    i32("pointnav_episode_cap", &TrainConfig::pointnav_episode_cap);
    f.push_back({"hidden",
                 [](TrainConfig& c, const std::string& v) {
                     c.hidden.clear();
                     std::stringstream ss(v);
                     std::string tok;
                     while (std::getline(ss, tok, ','))
                         c.hidden.push_back(static_cast<int>(parse_int(tok)));
                     if (c.hidden.empty()) throw std::invalid_argument("hidden: empty list");
                 },
                 [](const TrainConfig& c) {
                     std::string s;
                     for (std::size_t i = 0; i < c.hidden.size(); ++i)
                         s += (i ? "," : "") + std::to_string(c.hidden[i]);
                     return s;
                 }});
    str("activation", &TrainConfig::activation, {"tanh", "relu"});
    dbl("gamma", &TrainConfig::gamma);
    dbl("lam", &TrainConfig::lam);
    f.push_back({"eps_clip",
                 [](TrainConfig& c, const std::string& v) {
                     c.eps_clip = (v == "inf") ? std::numeric_limits<double>::infinity()
                                               : parse_double(v);
                 },
                 [](const TrainConfig& c) {
                     return std::isinf(c.eps_clip) ? "inf" : fmt_double(c.eps_clip);
                 }});
    dbl("c1", &TrainConfig::c1);
    dbl("c2", &TrainConfig::c2);
    i32("n_envs", &TrainConfig::n_envs);
    i32("k_steps", &TrainConfig::k_steps);
    i32("n_epochs", &TrainConfig::n_epochs);
    i32("n_minibatches", &TrainConfig::n_minibatches);
    dbl("lr", &TrainConfig::lr);
    dbl("max_grad_norm", &TrainConfig::max_grad_norm);
    str("mode", &TrainConfig::mode, {"ppo", "ppo_ewma"});
    dbl("com", &TrainConfig::com);
    bol("value_clip", &TrainConfig::value_clip);
    bol("lr_anneal", &TrainConfig::lr_anneal);
    bol("adv_norm", &TrainConfig::adv_norm);
    i64("total_env_steps", &TrainConfig::total_env_steps);
    i32("eval_levels", &TrainConfig::eval_levels);
    i32("eval_episodes_per_level", &TrainConfig::eval_episodes_per_level);
    i32("eval_period", &TrainConfig::eval_period);
    i32("checkpoint_period", &TrainConfig::checkpoint_period);
    bol("curriculum", &TrainConfig::curriculum);
    i32("sfl_rollout_length", &TrainConfig::sfl_rollout_length);
    dbl("sfl_rho", &TrainConfig::sfl_rho);
    i32("sfl_filter_batch", &TrainConfig::sfl_filter_batch);
    i32("sfl_buffer_size", &TrainConfig::sfl_buffer_size);
    i32("sfl_update_period", &TrainConfig::sfl_update_period);
    i32("sfl_episodes_per_level", &TrainConfig::sfl_episodes_per_level);
    str("strategy", &TrainConfig::strategy,
        {"none", "more_minibatches", "bigger_minibatches_fixed_lr", "bigger_minibatches_sqrt_lr"});
    i32("minibatch_size", &TrainConfig::minibatch_size);
    i32("strategy_n_minibatches", &TrainConfig::strategy_n_minibatches);
    i32("base_minibatch_size", &TrainConfig::base_minibatch_size);
    dbl("base_lr", &TrainConfig::base_lr);
    u64("seed", &TrainConfig::seed);
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = field_table();
    return f;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value) {
    for (const Field& f : fields()) {
        if (key == f.name) {
            f.set(cfg, value);
            return;
        }
    }
    throw std::invalid_argument("unknown config key: '" + key + "'");
}

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        apply_override(cfg, key, value);
    }
    return cfg;
}

TrainConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const TrainConfig& cfg) {
    std::string out;
    for (const Field& f : fields()) {
        out += f.name;
        out += " = ";
        out += f.get(cfg);
        out += "\n";
    }
    return out;
}

std::uint64_t config_hash(const TrainConfig& cfg) {
    std::string s = serialize_config(cfg);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

SflConfig TrainConfig::sfl() const {
    SflConfig s;
    s.rollout_length = sfl_rollout_length;
    s.sample_ratio = sfl_rho;
    s.filter_batch = sfl_filter_batch;
    s.buffer_size = sfl_buffer_size;
    s.update_period = sfl_update_period;
    s.episodes_per_level = sfl_episodes_per_level;
    return s;
}

PpoConfig TrainConfig::ppo(int effective_n_minibatches, double effective_lr) const {
    PpoConfig p;
    p.gamma = gamma;
    p.lambda = lam;
    p.eps_clip = eps_clip;
    p.c1 = c1;
    p.c2 = c2;
    p.n_envs = n_envs;
    p.k_steps = k_steps;
    p.n_epochs = n_epochs;
    p.n_minibatches = effective_n_minibatches;
    p.lr = effective_lr;
    p.max_grad_norm = max_grad_norm;
    if (mode == "ppo")
        p.mode = PpoMode::standard_ppo;
    else if (mode == "ppo_ewma")
        p.mode = PpoMode::ppo_ewma;
    else
        throw std::invalid_argument("mode must be 'ppo' or 'ppo_ewma'");
    p.com = com;
    p.value_clip = value_clip;
    p.lr_anneal = lr_anneal;
    p.advantage_norm = adv_norm;
    return p;
}

MlpSpec TrainConfig::mlp_spec() const {
    MlpSpec spec;
    spec.hidden = hidden;
    if (activation == "tanh")
        spec.act = Activation::tanh;
    else if (activation == "relu")
        spec.act = Activation::relu;
    else
        throw std::invalid_argument("activation must be 'tanh' or 'relu'");
    if (env == "pointnav") {
        spec.input_dim = kPointNavObsDim;
        spec.head = HeadKind::diagonal_gaussian;
        spec.head_dim = kPointNavActDim;
    } else if (env == "chain") {
        spec.input_dim = chain_n_states;
        spec.head = HeadKind::categorical;
        spec.head_dim = 2;
    } else {
        throw std::invalid_argument("env must be 'pointnav' or 'chain'");
    }
    return spec;
}

std::int64_t TrainConfig::total_updates() const {
    return total_env_steps / (static_cast<std::int64_t>(n_envs) * k_steps);
}

DerivedSchedule derive_schedule(const TrainConfig& cfg) {
    const std::int64_t nk = static_cast<std::int64_t>(cfg.n_envs) * cfg.k_steps;
    DerivedSchedule d;
    if (cfg.strategy == "none") {
        d.n_minibatches = cfg.n_minibatches;
        if (nk % d.n_minibatches != 0)
            throw std::invalid_argument("derive_schedule: n_envs*k_steps not divisible by n_minibatches");
        d.minibatch_size = static_cast<int>(nk / d.n_minibatches);
        d.lr = cfg.lr;
    } else if (cfg.strategy == "more_minibatches") {
        if (cfg.minibatch_size < 1)
            throw std::invalid_argument("derive_schedule: more_minibatches needs minibatch_size");
        if (nk % cfg.minibatch_size != 0)
            throw std::invalid_argument("derive_schedule: n_envs*k_steps not divisible by minibatch_size");
        d.minibatch_size = cfg.minibatch_size;
        d.n_minibatches = static_cast<int>(nk / cfg.minibatch_size);
        d.lr = cfg.lr;
    } else if (cfg.strategy == "bigger_minibatches_fixed_lr" ||
               cfg.strategy == "bigger_minibatches_sqrt_lr") {
        if (cfg.strategy_n_minibatches < 1)
            throw std::invalid_argument("derive_schedule: strategy needs strategy_n_minibatches");
        if (nk % cfg.strategy_n_minibatches != 0)
            throw std::invalid_argument("derive_schedule: n_envs*k_steps not divisible by strategy_n_minibatches");
        d.n_minibatches = cfg.strategy_n_minibatches;
        d.minibatch_size = static_cast<int>(nk / d.n_minibatches);
        if (cfg.strategy == "bigger_minibatches_fixed_lr") {
            d.lr = cfg.lr;
        } else {
            if (cfg.base_minibatch_size < 1 || cfg.base_lr <= 0)
                throw std::invalid_argument(
                    "derive_schedule: sqrt rule needs base_minibatch_size and base_lr");
            d.lr = cfg.base_lr * std::sqrt(static_cast<double>(d.minibatch_size) /
                                           cfg.base_minibatch_size);
        }
    } else {
        throw std::invalid_argument("unknown strategy: '" + cfg.strategy + "'");
    }
    return d;
}

}  // namespace plab
