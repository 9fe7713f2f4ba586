#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plab/checkpoint.hpp"
#include "plab/config.hpp"
#include "plab/metrics.hpp"
#include "plab/ppo.hpp"
#include "plab/rollout.hpp"

namespace plab {

// Whole mutable training state; round-trips through Checkpoint bitwise.
struct TrainerState {
    TrainConfig cfg;
    DerivedSchedule sched;
    ParamTree params;
    AdamState adam;
    std::optional<EwmaState> ewma;
    VecEnv venv;
    std::vector<RngStream> policy_rng;
    RngStream update_rng;
    RngStream level_rng;
    LevelBuffer buffer;
    std::int64_t update_index = 0;
    std::int64_t env_steps = 0;
    std::int64_t metrics_rows = 0;
    double last_mean_return = 0;
    double last_solve_rate = 0;
};

TrainerState init_trainer(const TrainConfig& cfg);
TrainerState trainer_from_checkpoint(const Checkpoint& ck);
Checkpoint to_checkpoint(const TrainerState& st);

// Fixed evaluation level set shared by every run.
std::vector<std::uint64_t> eval_level_seeds(int n);

// Outer loop: collect -> GAE -> update -> metrics -> periodic eval and
// checkpoint, until the env-step budget. Writes config.txt, metrics.csv,
// eval.csv, checkpoint.bin and final_eval.txt under run_dir.
void run_loop(TrainerState& st, const std::filesystem::path& run_dir);

// Fresh run from a config.
void train_run(const TrainConfig& cfg, const std::filesystem::path& run_dir);

struct ResumeOverrides {
    std::optional<double> com;
    std::optional<double> eps_clip;
    std::optional<double> lr;
    std::optional<std::int64_t> total_env_steps;
};

// Continues from an exact checkpoint state. A com override recomputes
// beta_prox and keeps theta_prox as-is; it is rejected in standard mode.
void resume_run(const std::filesystem::path& ckpt_path, const ResumeOverrides& ov,
                const std::filesystem::path& run_dir);

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

struct SweepRunSummary {
    std::filesystem::path run_dir;
    std::vector<std::string> axis_values;
    std::uint64_t seed = 0;
    double max_solve_rate = 0;
    double final_solve_rate = 0;
    double ddr_aggregate = 0;
};

// Cartesian grid x seeds; one run directory per cell, plus summary.csv.
std::vector<SweepRunSummary> sweep(const TrainConfig& base, const std::vector<SweepAxis>& axes,
                                   const std::vector<std::uint64_t>& seeds,
                                   const std::filesystem::path& root);

// Parsed metrics.csv rows (schema order).
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

inline constexpr const char* kCsvHeader =
    "update,env_steps,mean_return,solve_rate,kl_behavior,ddr,grad_norm_pre,"
    "grad_norm_post,param_update_l2,entropy,lr";

}  // namespace plab
