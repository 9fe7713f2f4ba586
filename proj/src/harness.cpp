#include "plab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plab {

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_field(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

int chain_obs_cap(const TrainConfig& cfg) {
    return cfg.env == "chain" ? cfg.chain_episode_cap : cfg.pointnav_episode_cap;
}

}  // namespace

std::vector<std::uint64_t> eval_level_seeds(int n) {
    std::vector<std::uint64_t> seeds(n);
    for (int i = 0; i < n; ++i)
        seeds[i] = mix64(0x4556414C00000000ULL + static_cast<std::uint64_t>(i));
    return seeds;
}

TrainerState init_trainer(const TrainConfig& cfg) {
    TrainerState st;
    st.cfg = cfg;
    st.sched = derive_schedule(cfg);
    PpoConfig pcfg = cfg.ppo(st.sched.n_minibatches, st.sched.lr);
    pcfg.validate();

    MlpSpec spec = cfg.mlp_spec();
    st.params = init_params(spec, cfg.seed);
    st.adam = AdamState::make(st.params.layout.total, st.sched.lr);
    if (pcfg.mode == PpoMode::ppo_ewma) st.ewma = make_ewma(st.params, cfg.com);

    std::uint64_t env_key = mix64(cfg.seed + 0x11);
    if (cfg.env == "pointnav") {
        st.venv = make_pointnav_venv(cfg.n_envs, env_key, cfg.pointnav_episode_cap);
    } else {
        ChainParams cp{cfg.chain_n_states, cfg.chain_episode_cap, cfg.chain_slip_prob};
        st.venv = make_chain_venv(cfg.n_envs, cp, env_key);
    }
    st.policy_rng = make_policy_streams(mix64(cfg.seed + 0x22), cfg.n_envs);
    st.update_rng = substream(cfg.seed, 0x33);
    st.level_rng = substream(cfg.seed, 0x44);
    return st;
}

Checkpoint to_checkpoint(const TrainerState& st) {
    Checkpoint ck;
    ck.config_text = serialize_config(st.cfg);
    ck.cfg_hash = config_hash(st.cfg);
    ck.update_index = st.update_index;
    ck.env_steps = st.env_steps;
    ck.params = st.params.data;
    if (st.ewma) {
        ck.prox = st.ewma->prox;
        ck.ewma_beta = st.ewma->beta;
    }
    ck.adam = st.adam;
    ck.venv = st.venv;
    ck.venv.completed.clear();
    ck.policy_rng = st.policy_rng;
    ck.update_rng = st.update_rng;
    ck.level_rng = st.level_rng;
    ck.buffer = st.buffer;
    ck.metrics_rows = st.metrics_rows;
    ck.last_mean_return = st.last_mean_return;
    ck.last_solve_rate = st.last_solve_rate;
    return ck;
}

TrainerState trainer_from_checkpoint(const Checkpoint& ck) {
    TrainConfig cfg = parse_config_text(ck.config_text);
    if (config_hash(cfg) != ck.cfg_hash)
        throw std::runtime_error("checkpoint: config hash mismatch");
    TrainerState st;
    st.cfg = cfg;
    st.sched = derive_schedule(cfg);
    st.params.spec = cfg.mlp_spec();
    st.params.layout = make_layout(st.params.spec);
    if (ck.params.size() != st.params.layout.total)
        throw std::runtime_error("checkpoint: parameter size mismatch");
    st.params.data = ck.params;
    st.adam = ck.adam;
    if (!ck.prox.empty()) {
        EwmaState e;
        e.prox = ck.prox;
        e.beta = ck.ewma_beta;
        st.ewma = std::move(e);
    }
    st.venv = ck.venv;
    st.policy_rng = ck.policy_rng;
    st.update_rng = ck.update_rng;
    st.level_rng = ck.level_rng;
    st.buffer = ck.buffer;
    st.update_index = ck.update_index;
    st.env_steps = ck.env_steps;
    st.metrics_rows = ck.metrics_rows;
    st.last_mean_return = ck.last_mean_return;
    st.last_solve_rate = ck.last_solve_rate;
    return st;
}

namespace {

void write_eval(const TrainerState& st, const std::filesystem::path& file) {
    const TrainConfig& cfg = st.cfg;
    ChainParams cp{cfg.chain_n_states, cfg.chain_episode_cap, cfg.chain_slip_prob};
    auto levels = eval_level_seeds(cfg.eval_levels);
    double mean_ret = 0;
    double sr = evaluate_solve_rate(st.params,
                                    cfg.env == "pointnav" ? EnvKind::pointnav : EnvKind::chain,
                                    cp, levels, cfg.eval_episodes_per_level,
                                    mix64(cfg.seed + 0x55), chain_obs_cap(cfg), &mean_ret);
    std::ofstream out(file);
    out << "solve_rate = " << fmt(sr) << "\n";
    out << "mean_return = " << fmt(mean_ret) << "\n";
}

}  // namespace

void run_loop(TrainerState& st, const std::filesystem::path& run_dir) {
    const TrainConfig& cfg = st.cfg;
    std::filesystem::create_directories(run_dir);
    {
        std::ofstream cf(run_dir / "config.txt");
        cf << serialize_config(cfg);
    }
    const std::int64_t total_updates = cfg.total_updates();
    const std::filesystem::path csv_path = run_dir / "metrics.csv";
    const std::filesystem::path ckpt_path = run_dir / "checkpoint.bin";

    std::ofstream csv(csv_path, std::ios::trunc);
    csv << kCsvHeader << "\n";

    std::ofstream eval_csv;
    if (cfg.eval_period > 0) {
        eval_csv.open(run_dir / "eval.csv", std::ios::trunc);
        eval_csv << "update,solve_rate,mean_return\n";
    }
    std::ofstream buffer_log;
    if (cfg.curriculum) buffer_log.open(run_dir / "buffer.log", std::ios::trunc);

    PpoConfig pcfg = cfg.ppo(st.sched.n_minibatches, st.sched.lr);
    SflConfig sfl = cfg.sfl();
    const std::int64_t nk = static_cast<std::int64_t>(cfg.n_envs) * cfg.k_steps;

    for (std::int64_t u = st.update_index; u < total_updates; ++u) {
        if (cfg.curriculum && u % sfl.update_period == 0) {
            st.buffer = refresh_buffer(st.params, sfl, st.level_rng, u);
            auto levels = sample_training_levels(st.buffer, cfg.n_envs, sfl.sample_ratio,
                                                 st.level_rng);
            venv_set_levels(st.venv, levels);
            buffer_log << "update=" << u;
            for (const LevelEntry& e : st.buffer.entries)
                buffer_log << " " << e.level_seed << ":" << fmt(e.score);
            buffer_log << "\n" << std::flush;
        }

        RolloutBatch batch = collect(st.params, st.venv, cfg.k_steps, st.policy_rng);
        if (!st.venv.completed.empty()) {
            double ret = 0;
            int succ = 0;
            for (const EpisodeRecord& e : st.venv.completed) {
                ret += e.ret;
                succ += e.success ? 1 : 0;
            }
            st.last_mean_return = ret / static_cast<double>(st.venv.completed.size());
            st.last_solve_rate =
                static_cast<double>(succ) / static_cast<double>(st.venv.completed.size());
            st.venv.completed.clear();
        }
        compute_gae(batch, cfg.gamma, cfg.lam);

        double lr_scale = cfg.lr_anneal ? anneal_scale(u, total_updates - 1) : 1.0;
        UpdateMetrics m;
        try {
            m = update(batch, st.params, st.adam, st.ewma ? &*st.ewma : nullptr, pcfg,
                       st.update_rng, lr_scale);
        } catch (...) {
            // preserve the last consistent state for post-mortem resume
            save_checkpoint(ckpt_path, to_checkpoint(st));
            throw;
        }
        double kl = kl_to_behavior(batch, st.params);
        double ent = mean_entropy(batch, st.params);
        st.env_steps += nk;
        st.update_index = u + 1;

        csv << u << "," << st.env_steps << "," << fmt(st.last_mean_return) << ","
            << fmt(st.last_solve_rate) << "," << fmt(kl) << "," << fmt(ddr(nk, kl)) << ","
            << fmt(m.mean_pre_clip_grad_norm) << "," << fmt(m.mean_post_clip_grad_norm) << ","
            << fmt(m.param_update_l2) << "," << fmt(ent) << "," << fmt(m.lr_effective) << "\n";
        csv.flush();
        st.metrics_rows += 1;

        if (cfg.eval_period > 0 && (u + 1) % cfg.eval_period == 0) {
            ChainParams cp{cfg.chain_n_states, cfg.chain_episode_cap, cfg.chain_slip_prob};
            auto levels = eval_level_seeds(cfg.eval_levels);
            double mean_ret = 0;
            double sr = evaluate_solve_rate(
                st.params, cfg.env == "pointnav" ? EnvKind::pointnav : EnvKind::chain, cp,
                levels, cfg.eval_episodes_per_level, mix64(cfg.seed + 0x55),
                chain_obs_cap(cfg), &mean_ret);
            eval_csv << (u + 1) << "," << fmt(sr) << "," << fmt(mean_ret) << "\n";
            eval_csv.flush();
        }
        if (cfg.checkpoint_period > 0 && (u + 1) % cfg.checkpoint_period == 0)
            save_checkpoint(ckpt_path, to_checkpoint(st));
    }

    save_checkpoint(ckpt_path, to_checkpoint(st));
    write_eval(st, run_dir / "final_eval.txt");
}

void train_run(const TrainConfig& cfg, const std::filesystem::path& run_dir) {
    TrainerState st = init_trainer(cfg);
    run_loop(st, run_dir);
}

void resume_run(const std::filesystem::path& ckpt_path, const ResumeOverrides& ov,
                const std::filesystem::path& run_dir) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    TrainerState st = trainer_from_checkpoint(ck);
    if (ov.com) {
        if (st.cfg.mode != "ppo_ewma")
            throw std::invalid_argument("resume: com override requires ppo_ewma mode");
        st.cfg.com = *ov.com;
        st.ewma->beta = com_to_beta(*ov.com);  // theta_prox retained as-is
    }
    if (ov.eps_clip) st.cfg.eps_clip = *ov.eps_clip;
    if (ov.lr) st.cfg.lr = *ov.lr;
    if (ov.total_env_steps) st.cfg.total_env_steps = *ov.total_env_steps;
    st.sched = derive_schedule(st.cfg);
    run_loop(st, run_dir);
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics csv: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty metrics csv");
    if (line != kCsvHeader) throw std::runtime_error("unexpected metrics csv header");
    std::vector<MetricsRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 11) throw std::runtime_error("bad metrics csv row");
        MetricsRecord r;
        r.update_index = std::stoll(f[0]);
        r.env_steps = std::stoll(f[1]);
        r.mean_return = parse_field(f[2]);
        r.solve_rate = parse_field(f[3]);
        r.mean_kl_behavior = parse_field(f[4]);
        r.ddr = parse_field(f[5]);
        r.grad_norm_pre = parse_field(f[6]);
        r.grad_norm_post = parse_field(f[7]);
        r.param_update_l2 = parse_field(f[8]);
        r.entropy = parse_field(f[9]);
        r.lr = parse_field(f[10]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<SweepRunSummary> sweep(const TrainConfig& base, const std::vector<SweepAxis>& axes,
                                   const std::vector<std::uint64_t>& seeds,
                                   const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    std::vector<std::vector<std::string>> cells{{}};
    for (const SweepAxis& ax : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& cell : cells)
            for (const std::string& v : ax.values) {
                auto c = cell;
                c.push_back(v);
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }

    std::vector<SweepRunSummary> out;
    for (const auto& cell : cells) {
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg = base;
            std::string name = "run";
            for (std::size_t a = 0; a < axes.size(); ++a) {
                apply_override(cfg, axes[a].key, cell[a]);
                name += "_" + axes[a].key + "=" + cell[a];
            }
            cfg.seed = seed;
            name += "_s" + std::to_string(seed);
            std::filesystem::path dir = root / name;
            train_run(cfg, dir);

            auto rows = read_metrics_csv(dir / "metrics.csv");
            SweepRunSummary s;
            s.run_dir = dir;
            s.axis_values = cell;
            s.seed = seed;
            std::vector<double> ddrs;
            for (const MetricsRecord& r : rows) {
                s.max_solve_rate = std::max(s.max_solve_rate, r.solve_rate);
                s.final_solve_rate = r.solve_rate;
                ddrs.push_back(r.ddr);
            }
            // with periodic held-out evaluation on, rank runs by the
            // fixed-level eval solve rate rather than the noisy
            // training-episode estimate
            if (cfg.eval_period > 0) {
                std::ifstream ev(dir / "eval.csv");
                std::string line;
                std::getline(ev, line);  // header
                s.max_solve_rate = 0;
                while (std::getline(ev, line)) {
                    if (line.empty()) continue;
                    std::size_t a = line.find(','), b = line.find(',', a + 1);
                    double sr = parse_field(line.substr(a + 1, b - a - 1));
                    s.max_solve_rate = std::max(s.max_solve_rate, sr);
                    s.final_solve_rate = sr;
                }
            }
            s.ddr_aggregate = ddrs.empty() ? 0 : run_ddr_aggregate(ddrs);
            out.push_back(std::move(s));
        }
    }

    std::ofstream sum(root / "summary.csv", std::ios::trunc);
    sum << "run_dir";
    for (const SweepAxis& ax : axes) sum << "," << ax.key;
    sum << ",seed,max_solve_rate,final_solve_rate,ddr_aggregate\n";
    for (const SweepRunSummary& s : out) {
        sum << s.run_dir.filename().string();
        for (const std::string& v : s.axis_values) sum << "," << v;
        sum << "," << s.seed << "," << fmt(s.max_solve_rate) << "," << fmt(s.final_solve_rate)
            << "," << fmt(s.ddr_aggregate) << "\n";
    }
    return out;
}

}  // namespace plab
