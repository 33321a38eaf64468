#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quadnav/env.hpp"
#include "quadnav/mlp.hpp"

namespace quadnav::ppo {

struct PpoConfig {
    long total_timesteps = 200000;
    int rollout_length = 2048;
    int minibatch_size = 64;
    int epochs_per_update = 10;
    double clip_epsilon = 0.2;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double learning_rate = 3e-4;
    double entropy_coef = 0.0;
    double value_coef = 0.5;
    uint64_t seed = 0;
    int checkpoint_every = 20; // updates between checkpoints (0 = off)
};

struct RolloutBuffer {
    std::vector<Eigen::VectorXd> obs;
    std::vector<Eigen::VectorXd> actions; // raw (pre-squash) samples
    std::vector<double> logp;
    std::vector<double> value;
    std::vector<double> reward;                        // scalarized (ESR path)
    std::vector<std::array<double, 2>> reward_pair;    // per-objective (SER path)
    std::vector<uint8_t> done;
    std::vector<double> advantage;
    std::vector<double> ret;

    size_t size() const { return obs.size(); }
    void clear();
};

// GAE recursion. last_value bootstraps the value beyond the buffer when the
// final stored transition is not terminal.
std::pair<std::vector<double>, std::vector<double>>
gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
               const std::vector<uint8_t>& dones, double gamma, double lambda,
               double last_value = 0.0);

struct LossDiagnostics {
    double policy_loss = 0;
    double value_loss = 0;
    double entropy = 0;
    double approx_kl = 0;
    double clip_fraction = 0;
};

// Normalizes in place to mean 0, std 1 (no-op on zero variance).
void normalize_advantages(std::vector<double>& adv);

// One PPO update pass (epochs x minibatches) over a full buffer whose
// advantage/ret fields are already populated. Throws TrainingDiverged on a
// non-finite loss.
LossDiagnostics ppo_update(MlpParams& params, const RolloutBuffer& buffer,
                           const PpoConfig& cfg, Adam& opt, Rng& rng);

struct TrainedPolicy {
    MlpParams params;
    env::Variant variant = env::Variant::BASELINE;
    std::array<double, 2> weights{1.0, 0.0};
    bool ser = false; // scalarized-expected-return training (weight sweeps)
    uint64_t seed = 0;
    PpoConfig config;
};

struct TrainingCurvePoint {
    long update = 0;
    long global_step = 0;
    double mean_episode_return = 0;
    double policy_loss = 0;
    double value_loss = 0;
    double entropy = 0;
};

class Trainer {
  public:
    // callbacks: on_update(curve point), on_checkpoint(trainer) -> persists state
    using UpdateHook = std::function<void(const TrainingCurvePoint&)>;
    using CheckpointHook = std::function<void(const Trainer&)>;

    Trainer(env::Variant variant, env::EnvConfig env_cfg,
            sim::DisturbanceSchedule schedule, PpoConfig cfg,
            sim::LowLevelConfig low = {});

    // SER mode: per-objective rewards scalarized with `weights` at update time.
    void set_ser_weights(const std::array<double, 2>& weights);

    void run(const UpdateHook& on_update = nullptr,
             const CheckpointHook& on_checkpoint = nullptr);

    TrainedPolicy result() const;

    // checkpoint surface
    const MlpParams& params() const { return params_; }
    MlpParams& params() { return params_; }
    const Adam& optimizer() const { return opt_; }
    Adam& optimizer() { return opt_; }
    Rng& rng() { return rng_; }
    const Rng& rng() const { return rng_; }
    env::Environment& environment() { return env_; }
    const env::Environment& environment() const { return env_; }
    long global_step() const { return global_step_; }
    long update_index() const { return update_index_; }
    void restore_counters(long global_step, long update_index, double ep_ret_acc,
                          int ep_len);
    double episode_return_acc() const { return ep_ret_acc_; }
    int episode_length_acc() const { return ep_len_; }
    env::Variant variant() const { return variant_; }
    const PpoConfig& config() const { return cfg_; }
    const std::array<double, 2>& weights() const { return weights_; }
    bool ser() const { return ser_; }

  private:
    void collect_rollout(RolloutBuffer& buf, std::vector<double>& episode_returns);

    env::Variant variant_;
    env::EnvConfig env_cfg_;
    PpoConfig cfg_;
    env::Environment env_;
    MlpParams params_;
    Adam opt_;
    Rng rng_;
    std::array<double, 2> weights_{1.0, 0.0};
    bool ser_ = false;
    long global_step_ = 0;
    long update_index_ = 0;
    double ep_ret_acc_ = 0;
    int ep_len_ = 0;
};

// Variant-dispatching wrappers. BASELINE trains with the schedule forced to
// NONE; the others keep the given (training-mode) schedule.
TrainedPolicy train(env::Variant variant, const env::EnvConfig& env_cfg,
                    const sim::DisturbanceSchedule& schedule, const PpoConfig& cfg,
                    const sim::LowLevelConfig& low = {},
                    const Trainer::UpdateHook& on_update = nullptr,
                    const Trainer::CheckpointHook& on_checkpoint = nullptr);

// One policy per weight vector, trained in SER mode on the DIST_ERR
// observation/dynamics; returned in input order.
std::vector<TrainedPolicy>
train_pareto(const std::vector<std::array<double, 2>>& weight_set,
             const env::EnvConfig& env_cfg, const sim::DisturbanceSchedule& schedule,
             const PpoConfig& cfg, const sim::LowLevelConfig& low = {},
             const std::function<void(size_t, const TrainedPolicy&)>& on_policy = nullptr);

// Gaussian log density of raw (pre-squash) actions.
double gaussian_logp(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                     const Eigen::VectorXd& log_std);

} // namespace quadnav::ppo
