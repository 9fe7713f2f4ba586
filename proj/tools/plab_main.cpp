#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "plab/harness.hpp"
#include "plab/sgd_analog.hpp"

namespace {

using namespace plab;

// "--key=value" tokens left over after CLI11 parsing become config overrides
void apply_extra_overrides(TrainConfig& cfg, const std::vector<std::string>& extras) {
    for (const std::string& tok : extras) {
        if (tok.rfind("--", 0) != 0)
            throw std::invalid_argument("unexpected argument: '" + tok + "'");
        std::size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config override must be --key=value: '" + tok + "'");
        apply_override(cfg, tok.substr(2, eq - 2), tok.substr(eq + 1));
    }
}

TrainConfig load_base(const std::string& config_path) {
    return config_path.empty() ? TrainConfig{} : load_config_file(config_path);
}

int cmd_plot(const std::string& input, const std::string& output,
             const std::string& x_col, std::vector<std::string> y_cols) {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open csv: " + input);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
    }
    auto col_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        throw std::invalid_argument("no such column: '" + name + "'");
    };
    int xi = col_index(x_col);
    if (y_cols.empty()) y_cols = {cols[1]};
    std::vector<int> yi;
    for (const auto& c : y_cols) yi.push_back(col_index(c));

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> r;
        while (std::getline(ss, tok, ',')) {
            if (tok == "inf")
                r.push_back(std::numeric_limits<double>::infinity());
            else if (tok == "-inf")
                r.push_back(-std::numeric_limits<double>::infinity());
            else
                r.push_back(std::stod(tok));
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error("csv has no data rows");

    const double W = 800, H = 500, ml = 60, mr = 20, mt = 20, mb = 40;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : rows) {
        xmin = std::min(xmin, r[xi]);
        xmax = std::max(xmax, r[xi]);
        for (int c : yi)
            if (std::isfinite(r[c])) {
                ymin = std::min(ymin, r[c]);
                ymax = std::max(ymax, r[c]);
            }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b"};
    std::ofstream svg(output);
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    svg << "<text x='" << W / 2 << "' y='" << H - 8 << "' text-anchor='middle' font-size='14'>"
        << x_col << "</text>\n";
    for (std::size_t k = 0; k < yi.size(); ++k) {
        svg << "<polyline fill='none' stroke='" << palette[k % 6] << "' points='";
        for (const auto& r : rows)
            if (std::isfinite(r[yi[k]])) svg << sx(r[xi]) << "," << sy(r[yi[k]]) << " ";
        svg << "'/>\n";
        svg << "<text x='" << W - mr - 5 << "' y='" << mt + 16 * (k + 1)
            << "' text-anchor='end' font-size='13' fill='" << palette[k % 6] << "'>"
            << y_cols[k] << "</text>\n";
    }
    svg << "</svg>\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plab: vectorized on-policy RL training lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "runs/run", ckpt_path, input, output;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> axis_specs, y_cols;
    std::string x_col = "update";

    auto* train = app.add_subcommand("train", "train a policy");
    train->add_option("--config", config_path, "config file");
    train->add_option("--out", out_dir, "run directory");
    train->add_option("--seed", seeds, "seed (repeatable: one run per seed)");
    train->allow_extras();

    auto* resume = app.add_subcommand("resume", "continue from a checkpoint");
    resume->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    resume->add_option("--out", out_dir, "run directory");
    double ov_com = NAN, ov_eps = NAN, ov_lr = NAN;
    std::int64_t ov_steps = -1;
    resume->add_option("--com", ov_com, "override EWMA center of mass");
    resume->add_option("--eps-clip", ov_eps, "override clipping epsilon");
    resume->add_option("--lr", ov_lr, "override learning rate");
    resume->add_option("--total-env-steps", ov_steps, "override env-step budget");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpointed policy");
    eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();

    auto* sw = app.add_subcommand("sweep", "grid sweep over config axes");
    sw->add_option("--config", config_path, "base config file");
    sw->add_option("--out", out_dir, "sweep root directory");
    sw->add_option("--axis", axis_specs, "axis as key=v1,v2,... (repeatable)");
    sw->add_option("--seed", seeds, "seed (repeatable)");
    sw->allow_extras();

    auto* sgd = app.add_subcommand("sgd-analog", "noisy quadratic descent trace");
    QuadConfig qc;
    std::string sched_spec;
    sgd->add_option("--dim", qc.dim, "dimension");
    sgd->add_option("--noise-std", qc.noise_std, "gradient noise std");
    sgd->add_option("--steps", qc.total_steps, "total steps");
    sgd->add_option("--seed", qc.seed, "rng seed");
    sgd->add_option("--x0-norm", qc.x0_norm, "initial norm");
    sgd->add_option("--lr", sched_spec, "eta or piecewise step:eta,step:eta,...");
    sgd->add_option("--out", output, "trace csv path")->required();

    auto* plot = app.add_subcommand("plot", "render a csv to an svg line chart");
    plot->add_option("--input", input, "csv file")->required();
    plot->add_option("--output", output, "svg file")->required();
    plot->add_option("--x", x_col, "x column");
    plot->add_option("--y", y_cols, "y columns (repeatable)");

    try {
        app.parse(argc, argv);

        if (train->parsed()) {
            TrainConfig cfg = load_base(config_path);
            apply_extra_overrides(cfg, train->remaining());
            if (seeds.empty()) seeds.push_back(cfg.seed);
            for (std::uint64_t s : seeds) {
                TrainConfig c = cfg;
                c.seed = s;
                std::filesystem::path dir =
                    seeds.size() == 1 ? std::filesystem::path(out_dir)
                                      : std::filesystem::path(out_dir + "_s" + std::to_string(s));
                train_run(c, dir);
                std::cout << "run complete: " << dir.string() << "\n";
            }
        } else if (resume->parsed()) {
            ResumeOverrides ov;
            if (!std::isnan(ov_com)) ov.com = ov_com;
            if (!std::isnan(ov_eps)) ov.eps_clip = ov_eps;
            if (!std::isnan(ov_lr)) ov.lr = ov_lr;
            if (ov_steps >= 0) ov.total_env_steps = ov_steps;
            resume_run(ckpt_path, ov, out_dir);
            std::cout << "run complete: " << out_dir << "\n";
        } else if (eval->parsed()) {
            Checkpoint ck = load_checkpoint(ckpt_path);
            TrainerState st = trainer_from_checkpoint(ck);
            ChainParams cp{st.cfg.chain_n_states, st.cfg.chain_episode_cap,
                           st.cfg.chain_slip_prob};
            auto levels = eval_level_seeds(st.cfg.eval_levels);
            double mean_ret = 0;
            double sr = evaluate_solve_rate(
                st.params, st.cfg.env == "pointnav" ? EnvKind::pointnav : EnvKind::chain, cp,
                levels, st.cfg.eval_episodes_per_level, mix64(st.cfg.seed + 0x55),
                st.cfg.env == "chain" ? st.cfg.chain_episode_cap : st.cfg.pointnav_episode_cap,
                &mean_ret);
            std::cout << "solve_rate = " << sr << "\nmean_return = " << mean_ret << "\n";
        } else if (sw->parsed()) {
            TrainConfig cfg = load_base(config_path);
            apply_extra_overrides(cfg, sw->remaining());
            std::vector<SweepAxis> axes;
            for (const std::string& spec : axis_specs) {
                std::size_t eq = spec.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("axis must be key=v1,v2,...: '" + spec + "'");
                SweepAxis ax;
                ax.key = spec.substr(0, eq);
                std::stringstream ss(spec.substr(eq + 1));
                std::string tok;
                while (std::getline(ss, tok, ',')) ax.values.push_back(tok);
                axes.push_back(std::move(ax));
            }
            if (seeds.empty()) seeds.push_back(cfg.seed);
            auto summaries = sweep(cfg, axes, seeds, out_dir);
            std::cout << summaries.size() << " runs complete; summary at " << out_dir
                      << "/summary.csv\n";
        } else if (sgd->parsed()) {
            if (!sched_spec.empty()) {
                qc.lr_schedule.clear();
                std::stringstream ss(sched_spec);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    std::size_t colon = tok.find(':');
                    if (colon == std::string::npos)
                        qc.lr_schedule.push_back({0, std::stod(tok)});
                    else
                        qc.lr_schedule.push_back(
                            {std::stoll(tok.substr(0, colon)), std::stod(tok.substr(colon + 1))});
                }
            }
            auto trace = run_quad(qc);
            std::ofstream out(output);
            out << "step,x_norm\n";
            for (const QuadSample& s : trace) out << s.step << "," << s.x_norm << "\n";
            std::cout << "trace written: " << output << "\n";
        } else if (plot->parsed()) {
            return cmd_plot(input, output, x_col, y_cols);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
