#include <doctest.h>

#include <cmath>
#include <limits>

#include "quadnav/errors.hpp"
#include "quadnav/ppo.hpp"

using namespace quadnav;
using namespace quadnav::ppo;

namespace {

double params_max_diff(const MlpParams& a, const MlpParams& b) {
    double m = (a.log_std - b.log_std).cwiseAbs().maxCoeff();
    for (size_t l = 0; l < a.policy.W.size(); ++l) {
        m = std::max(m, (a.policy.W[l] - b.policy.W[l]).cwiseAbs().maxCoeff());
        m = std::max(m, (a.policy.b[l] - b.policy.b[l]).cwiseAbs().maxCoeff());
    }
    for (size_t l = 0; l < a.value.W.size(); ++l) {
        m = std::max(m, (a.value.W[l] - b.value.W[l]).cwiseAbs().maxCoeff());
        m = std::max(m, (a.value.b[l] - b.value.b[l]).cwiseAbs().maxCoeff());
    }
    return m;
}

// Buffer of n transitions whose stored logp shifts the update-time ratio by
// exp(logp_shift) per sample.
RolloutBuffer make_buffer(const MlpParams& params, int n, Rng& rng,
                          double logp_shift = 0.0) {
    RolloutBuffer buf;
    const int odim = params.obs_dim;
    const int adim = int(params.log_std.size());
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd obs(odim), act(adim);
        for (int j = 0; j < odim; ++j) obs[j] = rng.uniform(-1, 1);
        const PolicyOutput out = policy_forward(params, obs);
        for (int j = 0; j < adim; ++j)
            act[j] = out.mean[j] + std::exp(out.log_std[j]) * rng.normal();
        buf.obs.push_back(obs);
        buf.actions.push_back(act);
        buf.logp.push_back(gaussian_logp(act, out.mean, out.log_std) - logp_shift);
        buf.value.push_back(out.value);
        buf.reward.push_back(rng.uniform(-1, 0));
        buf.reward_pair.push_back({buf.reward.back(), 0.0});
        buf.done.push_back(i + 1 == n);
        buf.advantage.push_back(rng.uniform(-1, 1));
        buf.ret.push_back(out.value + buf.advantage.back());
    }
    return buf;
}

} // namespace

TEST_CASE("gae single terminal step") {
    const auto [adv, ret] = gae_advantages({1.0}, {0.0}, {1}, 1.0, 1.0, 99.0);
    CHECK(adv[0] == doctest::Approx(1.0));
    CHECK(ret[0] == doctest::Approx(1.0));
}

TEST_CASE("gae of an all-zero stream is zero") {
    const auto [adv, ret] =
        gae_advantages({0, 0, 0}, {0, 0, 0}, {0, 0, 1}, 0.99, 0.95, 0.0);
    for (double a : adv) CHECK(a == 0.0);
    for (double r : ret) CHECK(r == 0.0);
}

TEST_CASE("gae with gamma 0 reduces to reward minus value") {
    const auto [adv, ret] =
        gae_advantages({1.0, -2.0, 0.5}, {0.25, 0.5, -0.5}, {0, 0, 1}, 0.0, 0.95, 3.0);
    CHECK(adv[0] == doctest::Approx(0.75));
    CHECK(adv[1] == doctest::Approx(-2.5));
    CHECK(adv[2] == doctest::Approx(1.0));
}

TEST_CASE("gae hand-computed two-step recursion") {
    // delta1 = 1 - 0.5 = 0.5 (terminal); adv1 = 0.5
    // delta0 = 1 + 0.9*0.5 - 0.5 = 0.95; adv0 = 0.95 + 0.9*0.8*0.5 = 1.31
    const auto [adv, ret] =
        gae_advantages({1.0, 1.0}, {0.5, 0.5}, {0, 1}, 0.9, 0.8, 7.0);
    CHECK(adv[0] == doctest::Approx(1.31));
    CHECK(adv[1] == doctest::Approx(0.5));
    CHECK(ret[0] == doctest::Approx(1.81));
}

TEST_CASE("gae bootstraps through last_value on a truncated rollout") {
    const auto [adv, ret] = gae_advantages({0.0}, {0.0}, {0}, 0.5, 0.95, 2.0);
    CHECK(adv[0] == doctest::Approx(1.0)); // 0 + 0.5*2 - 0
}

TEST_CASE("normalize_advantages standardizes moments") {
    Rng rng(8);
    std::vector<double> adv(257);
    for (double& a : adv) a = rng.uniform(-3, 5);
    normalize_advantages(adv);

    double mean = 0;
    for (double a : adv) mean += a;
    mean /= double(adv.size());
    double var = 0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double stddev = std::sqrt(var / double(adv.size()));
    CHECK(std::abs(mean) < 1e-10);
    CHECK(stddev == doctest::Approx(1.0).epsilon(1e-6));

    std::vector<double> flat(5, 3.25); // zero variance: no-op
    normalize_advantages(flat);
    for (double a : flat) CHECK(a == 3.25);
}

TEST_CASE("first-epoch ratios are exactly one") {
    Rng rng(10);
    MlpParams params = MlpParams::make(6, 4, rng);
    RolloutBuffer buf = make_buffer(params, 16, rng);

    PpoConfig cfg;
    cfg.epochs_per_update = 1;
    cfg.minibatch_size = 16; // single full batch -> evaluated before any step
    Adam opt(params, cfg.learning_rate);
    Rng update_rng(0);
    const LossDiagnostics diag = ppo_update(params, buf, cfg, opt, update_rng);
    CHECK(diag.clip_fraction == 0.0);
    CHECK(std::abs(diag.approx_kl) < 1e-12);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    Rng rng(11);
    MlpParams params = MlpParams::make(6, 4, rng);
    const MlpParams before = params;
    RolloutBuffer buf = make_buffer(params, 32, rng);

    PpoConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs_per_update = 3;
    cfg.minibatch_size = 8;
    Adam opt(params, 0.0);
    Rng update_rng(1);
    ppo_update(params, buf, cfg, opt, update_rng);
    CHECK(params_max_diff(params, before) == 0.0);
}

TEST_CASE("fully clipped minibatch contributes zero policy gradient") {
    Rng rng(12);
    MlpParams params = MlpParams::make(4, 2, rng);

    // two samples, advantages +1/-1 (so minibatch normalization keeps them),
    // each pushed onto the constant clipped branch:
    //   adv > 0 with ratio e^5  -> min picks (1+eps)*adv
    //   adv < 0 with ratio e^-5 -> min picks (1-eps)*adv
    RolloutBuffer buf = make_buffer(params, 2, rng, 5.0);
    buf.advantage = {1.0, -1.0};
    buf.logp[1] += 10.0; // flips the second sample's shift to -5

    PpoConfig cfg;
    cfg.epochs_per_update = 1;
    cfg.minibatch_size = 2;
    cfg.learning_rate = 0.1;
    cfg.value_coef = 0.0; // isolate the surrogate term
    cfg.entropy_coef = 0.0;

    const MlpParams before = params;
    Adam opt(params, cfg.learning_rate);
    Rng update_rng(2);
    const LossDiagnostics diag = ppo_update(params, buf, cfg, opt, update_rng);
    CHECK(diag.clip_fraction == 1.0);
    CHECK(params_max_diff(params, before) == 0.0);
}

TEST_CASE("training is deterministic in the seed") {
    env::EnvConfig env_cfg;
    sim::DisturbanceSchedule sched;
    PpoConfig cfg;
    cfg.total_timesteps = 256;
    cfg.rollout_length = 128;
    cfg.minibatch_size = 32;
    cfg.epochs_per_update = 2;
    cfg.seed = 31;
    cfg.checkpoint_every = 0;

    const TrainedPolicy a = train(env::Variant::BASELINE, env_cfg, sched, cfg);
    const TrainedPolicy b = train(env::Variant::BASELINE, env_cfg, sched, cfg);
    CHECK(params_max_diff(a.params, b.params) == 0.0);
    CHECK(a.variant == env::Variant::BASELINE);
}

TEST_CASE("ppo_update throws on a poisoned buffer") {
    Rng rng(14);
    MlpParams params = MlpParams::make(4, 2, rng);
    RolloutBuffer buf = make_buffer(params, 8, rng);
    buf.ret[3] = std::numeric_limits<double>::quiet_NaN();

    PpoConfig cfg;
    cfg.epochs_per_update = 1;
    cfg.minibatch_size = 8;
    Adam opt(params, cfg.learning_rate);
    Rng update_rng(3);
    CHECK_THROWS_AS(ppo_update(params, buf, cfg, opt, update_rng), TrainingDiverged);
}

TEST_CASE("train_pareto returns one SER policy per weight vector") {
    env::EnvConfig env_cfg;
    sim::DisturbanceSchedule sched;
    sched.mode = sim::DisturbanceMode::XYZ;
    sched.magnitude = 0.025;
    PpoConfig cfg;
    cfg.total_timesteps = 128;
    cfg.rollout_length = 64;
    cfg.minibatch_size = 32;
    cfg.epochs_per_update = 2;
    cfg.seed = 5;
    cfg.checkpoint_every = 0;

    const std::vector<std::array<double, 2>> weights{{1, 0}, {1, 0.5}, {1, 2}};
    const auto policies = train_pareto(weights, env_cfg, sched, cfg);
    REQUIRE(policies.size() == 3);
    for (size_t i = 0; i < policies.size(); ++i) {
        CHECK(policies[i].ser);
        CHECK(policies[i].variant == env::Variant::DIST_ERR);
        CHECK(policies[i].weights[1] == doctest::Approx(weights[i][1]));
    }
    CHECK(params_max_diff(policies[0].params, policies[2].params) > 0.0);
}
