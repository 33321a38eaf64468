#include "quadnav/mlp.hpp"

#include <cmath>

namespace quadnav::ppo {

Mlp Mlp::make(const std::vector<int>& sizes, Rng& rng, double out_scale) {
    Mlp net;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        int in = sizes[l], out = sizes[l + 1];
        double bound = std::sqrt(6.0 / double(in + out)); // Xavier-uniform
        if (l + 2 == sizes.size()) bound *= out_scale;
        Eigen::MatrixXd w(out, in);
        for (int i = 0; i < out; ++i)
            for (int j = 0; j < in; ++j) w(i, j) = rng.uniform(-bound, bound);
        net.W.push_back(std::move(w));
        net.b.push_back(Eigen::VectorXd::Zero(out));
    }
    return net;
}

Mlp Mlp::zeros_like(const Mlp& other) {
    Mlp net;
    for (size_t l = 0; l < other.W.size(); ++l) {
        net.W.push_back(Eigen::MatrixXd::Zero(other.W[l].rows(), other.W[l].cols()));
        net.b.push_back(Eigen::VectorXd::Zero(other.b[l].size()));
    }
    return net;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    Eigen::VectorXd h = x;
    for (size_t l = 0; l < W.size(); ++l) {
        h = W[l] * h + b[l];
        if (l + 1 < W.size()) h = h.array().tanh();
    }
    return h;
}

Eigen::VectorXd Mlp::forward_cached(const Eigen::VectorXd& x,
                                    std::vector<Eigen::VectorXd>& acts) const {
    acts.clear();
    acts.push_back(x);
    Eigen::VectorXd h = x;
    for (size_t l = 0; l < W.size(); ++l) {
        h = W[l] * h + b[l];
        if (l + 1 < W.size()) {
            h = h.array().tanh();
            acts.push_back(h);
        }
    }
    return h;
}

Eigen::VectorXd Mlp::backward(const std::vector<Eigen::VectorXd>& acts,
                              const Eigen::VectorXd& dout, Mlp& grad) const {
    Eigen::VectorXd d = dout;
    for (int l = int(W.size()) - 1; l >= 0; --l) {
        grad.W[size_t(l)] += d * acts[size_t(l)].transpose();
        grad.b[size_t(l)] += d;
        if (l > 0) {
            // through tanh: act' = 1 - act^2
            Eigen::VectorXd upstream = W[size_t(l)].transpose() * d;
            d = upstream.array() * (1.0 - acts[size_t(l)].array().square());
        } else {
            d = W[0].transpose() * d;
        }
    }
    return d;
}

void Mlp::set_zero() {
    for (auto& w : W) w.setZero();
    for (auto& v : b) v.setZero();
}

void Mlp::add_scaled(const Mlp& other, double scale) {
    for (size_t l = 0; l < W.size(); ++l) {
        W[l] += scale * other.W[l];
        b[l] += scale * other.b[l];
    }
}

MlpParams MlpParams::make(int obs_dim, int action_dim, Rng& rng,
                          const std::vector<int>& hidden) {
    MlpParams p;
    p.obs_dim = obs_dim;
    std::vector<int> psizes{obs_dim};
    psizes.insert(psizes.end(), hidden.begin(), hidden.end());
    psizes.push_back(action_dim);
    p.policy = Mlp::make(psizes, rng, 0.01); // small policy head, stable early updates
    std::vector<int> vsizes{obs_dim};
    vsizes.insert(vsizes.end(), hidden.begin(), hidden.end());
    vsizes.push_back(1);
    p.value = Mlp::make(vsizes, rng, 1.0);
    p.log_std = Eigen::VectorXd::Zero(action_dim);
    return p;
}

PolicyOutput policy_forward(const MlpParams& params, const Eigen::VectorXd& obs) {
    PolicyOutput out;
    out.mean = params.policy.forward(obs);
    out.log_std = params.log_std;
    out.value = params.value.forward(obs)[0];
    return out;
}

namespace {

void adam_block(Eigen::Ref<Eigen::MatrixXd> p, const Eigen::MatrixXd& g,
                Eigen::Ref<Eigen::MatrixXd> m, Eigen::Ref<Eigen::MatrixXd> v,
                double lr_t, double beta1, double beta2, double eps) {
    m = beta1 * m + (1 - beta1) * g;
    v = (beta2 * v.array() + (1 - beta2) * g.array().square()).matrix();
    p.array() -= lr_t * m.array() / (v.array().sqrt() + eps);
}

} // namespace

Adam::Adam(const MlpParams& shape, double lr_, double beta1_, double beta2_, double eps_)
    : lr(lr_), beta1(beta1_), beta2(beta2_), eps(eps_) {
    m.policy = Mlp::zeros_like(shape.policy);
    m.value = Mlp::zeros_like(shape.value);
    m.log_std = Eigen::VectorXd::Zero(shape.log_std.size());
    m.obs_dim = shape.obs_dim;
    v = m;
}

void Adam::step(MlpParams& params, const MlpParams& grads) {
    ++t;
    double lr_t = lr * std::sqrt(1.0 - std::pow(beta2, double(t))) /
                  (1.0 - std::pow(beta1, double(t)));
    for (size_t l = 0; l < params.policy.W.size(); ++l) {
        adam_block(params.policy.W[l], grads.policy.W[l], m.policy.W[l], v.policy.W[l],
                   lr_t, beta1, beta2, eps);
        adam_block(params.policy.b[l], grads.policy.b[l], m.policy.b[l], v.policy.b[l],
                   lr_t, beta1, beta2, eps);
    }
    for (size_t l = 0; l < params.value.W.size(); ++l) {
        adam_block(params.value.W[l], grads.value.W[l], m.value.W[l], v.value.W[l],
                   lr_t, beta1, beta2, eps);
        adam_block(params.value.b[l], grads.value.b[l], m.value.b[l], v.value.b[l],
                   lr_t, beta1, beta2, eps);
    }
    adam_block(params.log_std, grads.log_std, m.log_std, v.log_std, lr_t, beta1, beta2,
               eps);
}

} // namespace quadnav::ppo
