#include "quadnav/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "quadnav/errors.hpp"

namespace quadnav::ppo {

namespace {
constexpr double kLog2Pi = 1.8378770664093453; // log(2*pi)
}

void RolloutBuffer::clear() {
    obs.clear();
    actions.clear();
    logp.clear();
    value.clear();
    reward.clear();
    reward_pair.clear();
    done.clear();
    advantage.clear();
    ret.clear();
}

double gaussian_logp(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                     const Eigen::VectorXd& log_std) {
    double lp = 0;
    for (int i = 0; i < action.size(); ++i) {
        double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
        lp += -0.5 * z * z - log_std[i] - 0.5 * kLog2Pi;
    }
    return lp;
}

std::pair<std::vector<double>, std::vector<double>>
gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
               const std::vector<uint8_t>& dones, double gamma, double lambda,
               double last_value) {
    const size_t n = rewards.size();
    std::vector<double> adv(n), ret(n);
    double gae = 0;
    for (size_t i = n; i-- > 0;) {
        double next_value = (i + 1 < n) ? values[i + 1] : last_value;
        double nonterminal = dones[i] ? 0.0 : 1.0;
        double delta = rewards[i] + gamma * next_value * nonterminal - values[i];
        gae = delta + gamma * lambda * nonterminal * gae;
        adv[i] = gae;
        ret[i] = adv[i] + values[i];
    }
    return {std::move(adv), std::move(ret)};
}

void normalize_advantages(std::vector<double>& adv) {
    if (adv.empty()) return;
    double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / double(adv.size());
    double var = 0;
    for (double a : adv) var += (a - mean) * (a - mean);
    double std = std::sqrt(var / double(adv.size()));
    if (std < 1e-12) return; // degenerate batch: leave it alone
    for (double& a : adv) a = (a - mean) / std;
}

LossDiagnostics ppo_update(MlpParams& params, const RolloutBuffer& buffer,
                           const PpoConfig& cfg, Adam& opt, Rng& rng) {
    const size_t n = buffer.size();
    LossDiagnostics diag;
    long batches = 0;

    MlpParams grads;
    grads.policy = Mlp::zeros_like(params.policy);
    grads.value = Mlp::zeros_like(params.value);
    grads.log_std = Eigen::VectorXd::Zero(params.log_std.size());
    grads.obs_dim = params.obs_dim;

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));

    std::vector<Eigen::VectorXd> pol_acts, val_acts;
    const int adim = int(params.log_std.size());

    for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
        // Fisher-Yates from our deterministic stream
        for (size_t i = n; i > 1; --i) {
            size_t j = size_t(rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        for (size_t start = 0; start < n; start += size_t(cfg.minibatch_size)) {
            size_t end = std::min(n, start + size_t(cfg.minibatch_size));
            const double m = double(end - start);

            // minibatch advantage normalization
            double amean = 0, avar = 0;
            for (size_t k = start; k < end; ++k) amean += buffer.advantage[order[k]];
            amean /= m;
            for (size_t k = start; k < end; ++k) {
                double d = buffer.advantage[order[k]] - amean;
                avar += d * d;
            }
            double astd = std::sqrt(avar / m);
            if (astd < 1e-8) astd = 1.0;

            grads.policy.set_zero();
            grads.value.set_zero();
            grads.log_std.setZero();

            double pol_loss = 0, val_loss = 0, kl = 0, clipped = 0;
            for (size_t k = start; k < end; ++k) {
                size_t idx = order[k];
                const Eigen::VectorXd& obs = buffer.obs[idx];
                const Eigen::VectorXd& act = buffer.actions[idx];
                double adv = (buffer.advantage[idx] - amean) / astd;

                Eigen::VectorXd mean = params.policy.forward_cached(obs, pol_acts);
                Eigen::VectorXd vout = params.value.forward_cached(obs, val_acts);
                double value = vout[0];

                double logp = gaussian_logp(act, mean, params.log_std);
                double ratio = std::exp(logp - buffer.logp[idx]);
                double unclipped = ratio * adv;
                double clamped =
                    std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon) *
                    adv;

                pol_loss += -std::min(unclipped, clamped);
                val_loss += (value - buffer.ret[idx]) * (value - buffer.ret[idx]);
                kl += buffer.logp[idx] - logp;
                if (std::abs(ratio - 1.0) > cfg.clip_epsilon) clipped += 1;

                // d(-min)/dlogp: zero when the clipped branch is active
                double dlogp = (unclipped <= clamped) ? -adv * ratio / m : 0.0;

                Eigen::VectorXd dmean(adim);
                for (int i = 0; i < adim; ++i) {
                    double inv_sigma = std::exp(-params.log_std[i]);
                    double z = (act[i] - mean[i]) * inv_sigma;
                    dmean[i] = dlogp * z * inv_sigma;             // dlogp/dmean
                    grads.log_std[i] += dlogp * (z * z - 1.0);    // dlogp/dlog_std
                }
                params.policy.backward(pol_acts, dmean, grads.policy);

                Eigen::VectorXd dval(1);
                dval[0] = cfg.value_coef * 2.0 * (value - buffer.ret[idx]) / m;
                params.value.backward(val_acts, dval, grads.value);
            }
            // entropy bonus is state-independent for a diagonal Gaussian
            double entropy = 0;
            for (int i = 0; i < adim; ++i)
                entropy += params.log_std[i] + 0.5 * (1.0 + kLog2Pi);
            for (int i = 0; i < adim; ++i)
                grads.log_std[i] += -cfg.entropy_coef; // d(-coef*entropy)/dlog_std

            double total = pol_loss / m + cfg.value_coef * val_loss / m -
                           cfg.entropy_coef * entropy;
            if (!std::isfinite(total)) {
                std::ostringstream os;
                os << "non-finite loss at update " << opt.t << " (policy "
                   << pol_loss / m << ", value " << val_loss / m << ")";
                throw TrainingDiverged(os.str());
            }

            opt.step(params, grads);

            diag.policy_loss += pol_loss / m;
            diag.value_loss += val_loss / m;
            diag.entropy += entropy;
            diag.approx_kl += kl / m;
            diag.clip_fraction += clipped / m;
            ++batches;
        }
    }
    if (batches > 0) {
        diag.policy_loss /= double(batches);
        diag.value_loss /= double(batches);
        diag.entropy /= double(batches);
        diag.approx_kl /= double(batches);
        diag.clip_fraction /= double(batches);
    }
    return diag;
}

namespace {

env::EnvConfig with_variant(env::EnvConfig cfg, env::Variant v) {
    cfg.variant = v;
    return cfg;
}

sim::DisturbanceSchedule schedule_for(env::Variant v,
                                      const sim::DisturbanceSchedule& s) {
    if (v != env::Variant::BASELINE) return s;
    sim::DisturbanceSchedule none = s;
    none.mode = sim::DisturbanceMode::NONE;
    none.magnitude = 0.0;
    return none;
}

} // namespace

Trainer::Trainer(env::Variant variant, env::EnvConfig env_cfg,
                 sim::DisturbanceSchedule schedule, PpoConfig cfg,
                 sim::LowLevelConfig low)
    : variant_(variant), env_cfg_(with_variant(std::move(env_cfg), variant)), cfg_(cfg),
      env_(env_cfg_, schedule_for(variant, schedule), low),
      params_(), opt_(MlpParams{}, cfg.learning_rate), rng_(cfg.seed) {
    params_ = MlpParams::make(env_.obs_size(), 4, rng_);
    opt_ = Adam(params_, cfg.learning_rate);
    weights_ = env_cfg_.esr_weights;
}

void Trainer::set_ser_weights(const std::array<double, 2>& weights) {
    ser_ = true;
    weights_ = weights;
}

void Trainer::collect_rollout(RolloutBuffer& buf, std::vector<double>& episode_returns) {
    buf.clear();
    for (int t = 0; t < cfg_.rollout_length; ++t) {
        std::vector<double> ov = env_.observation_vector();
        Eigen::VectorXd obs = Eigen::Map<const Eigen::VectorXd>(ov.data(), long(ov.size()));

        PolicyOutput out = policy_forward(params_, obs);
        Eigen::VectorXd action(out.mean.size());
        for (int i = 0; i < action.size(); ++i)
            action[i] = out.mean[i] + std::exp(out.log_std[i]) * rng_.normal();
        double logp = gaussian_logp(action, out.mean, out.log_std);

        env::Environment::StepResult sr =
            env_.step_raw({action[0], action[1], action[2], action[3]});

        std::array<double, 2> pair = env::effective_rewards(
            sr.reward, variant_, env_.squash({action[0], action[1], action[2], action[3]}));

        buf.obs.push_back(obs);
        buf.actions.push_back(action);
        buf.logp.push_back(logp);
        buf.value.push_back(out.value);
        buf.reward.push_back(sr.scalar_reward);
        buf.reward_pair.push_back(pair);
        buf.done.push_back(sr.done ? 1 : 0);

        double step_reward =
            ser_ ? weights_[0] * pair[0] + weights_[1] * pair[1] : sr.scalar_reward;
        ep_ret_acc_ += step_reward;
        ++ep_len_;
        ++global_step_;
        if (sr.done) {
            episode_returns.push_back(ep_ret_acc_);
            ep_ret_acc_ = 0;
            ep_len_ = 0;
            env_.reset();
        }
    }
}

void Trainer::run(const UpdateHook& on_update, const CheckpointHook& on_checkpoint) {
    RolloutBuffer buf;
    while (global_step_ < cfg_.total_timesteps) {
        std::vector<double> episode_returns;
        collect_rollout(buf, episode_returns);

        // rewards entering GAE: ESR uses the env-scalarized stream; SER
        // scalarizes the per-objective pairs here, at update time.
        std::vector<double> rewards(buf.size());
        for (size_t i = 0; i < buf.size(); ++i)
            rewards[i] = ser_ ? weights_[0] * buf.reward_pair[i][0] +
                                    weights_[1] * buf.reward_pair[i][1]
                              : buf.reward[i];

        double last_value = 0;
        if (!buf.done.back()) {
            std::vector<double> ov = env_.observation_vector();
            Eigen::VectorXd obs =
                Eigen::Map<const Eigen::VectorXd>(ov.data(), long(ov.size()));
            last_value = policy_forward(params_, obs).value;
        }
        auto [adv, ret] =
            gae_advantages(rewards, buf.value, buf.done, cfg_.gamma, cfg_.gae_lambda,
                           last_value);
        buf.advantage = std::move(adv);
        buf.ret = std::move(ret);

        LossDiagnostics diag = ppo_update(params_, buf, cfg_, opt_, rng_);
        ++update_index_;

        if (on_update) {
            TrainingCurvePoint pt;
            pt.update = update_index_;
            pt.global_step = global_step_;
            pt.mean_episode_return =
                episode_returns.empty()
                    ? std::numeric_limits<double>::quiet_NaN()
                    : std::accumulate(episode_returns.begin(), episode_returns.end(),
                                      0.0) /
                          double(episode_returns.size());
            pt.policy_loss = diag.policy_loss;
            pt.value_loss = diag.value_loss;
            pt.entropy = diag.entropy;
            on_update(pt);
        }
        if (on_checkpoint && cfg_.checkpoint_every > 0 &&
            update_index_ % cfg_.checkpoint_every == 0)
            on_checkpoint(*this);
    }
}

TrainedPolicy Trainer::result() const {
    TrainedPolicy p;
    p.params = params_;
    p.variant = variant_;
    p.weights = weights_;
    p.ser = ser_;
    p.seed = cfg_.seed;
    p.config = cfg_;
    return p;
}

void Trainer::restore_counters(long global_step, long update_index, double ep_ret_acc,
                               int ep_len) {
    global_step_ = global_step;
    update_index_ = update_index;
    ep_ret_acc_ = ep_ret_acc;
    ep_len_ = ep_len;
}

TrainedPolicy train(env::Variant variant, const env::EnvConfig& env_cfg,
                    const sim::DisturbanceSchedule& schedule, const PpoConfig& cfg,
                    const sim::LowLevelConfig& low, const Trainer::UpdateHook& on_update,
                    const Trainer::CheckpointHook& on_checkpoint) {
    Trainer trainer(variant, env_cfg, schedule, cfg, low);
    trainer.run(on_update, on_checkpoint);
    return trainer.result();
}

std::vector<TrainedPolicy>
train_pareto(const std::vector<std::array<double, 2>>& weight_set,
             const env::EnvConfig& env_cfg, const sim::DisturbanceSchedule& schedule,
             const PpoConfig& cfg, const sim::LowLevelConfig& low,
             const std::function<void(size_t, const TrainedPolicy&)>& on_policy) {
    if (weight_set.empty()) throw ConfigError("train_pareto: empty weight set");
    std::vector<TrainedPolicy> out;
    out.reserve(weight_set.size());
    for (size_t i = 0; i < weight_set.size(); ++i) {
        Trainer trainer(env::Variant::DIST_ERR, env_cfg, schedule, cfg, low);
        trainer.set_ser_weights(weight_set[i]);
        trainer.run();
        out.push_back(trainer.result());
        if (on_policy) on_policy(i, out.back());
    }
    return out;
}

} // namespace quadnav::ppo
