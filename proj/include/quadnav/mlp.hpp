#pragma once

#include <Eigen/Dense>
#include <vector>

#include "quadnav/rng.hpp"

namespace quadnav::ppo {

// Fully connected net, tanh hidden activations, linear output. Backprop is
// hand-written; gradients accumulate into a shape-mirrored Mlp.
struct Mlp {
    std::vector<Eigen::MatrixXd> W; // W[l]: rows = layer l+1 size, cols = layer l size
    std::vector<Eigen::VectorXd> b;

    static Mlp make(const std::vector<int>& sizes, Rng& rng, double out_scale = 1.0);
    static Mlp zeros_like(const Mlp& other);

    int input_size() const { return int(W.front().cols()); }
    int output_size() const { return int(W.back().rows()); }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    // Forward pass keeping per-layer activations (acts[0] = input,
    // acts[l] = post-tanh output of hidden layer l).
    Eigen::VectorXd forward_cached(const Eigen::VectorXd& x,
                                   std::vector<Eigen::VectorXd>& acts) const;

    // Accumulates dL/dW, dL/db into grad given dL/d(output); returns dL/d(input).
    Eigen::VectorXd backward(const std::vector<Eigen::VectorXd>& acts,
                             const Eigen::VectorXd& dout, Mlp& grad) const;

    void set_zero();
    void add_scaled(const Mlp& other, double scale);
};

// Policy + value towers with a state-independent log-std head.
struct MlpParams {
    Mlp policy;               // obs -> 64 -> 64 -> action_dim (mean)
    Mlp value;                // obs -> 64 -> 64 -> 1
    Eigen::VectorXd log_std;  // action_dim
    int obs_dim = 0;

    static MlpParams make(int obs_dim, int action_dim, Rng& rng,
                          const std::vector<int>& hidden = {64, 64});
};

struct PolicyOutput {
    Eigen::VectorXd mean;
    Eigen::VectorXd log_std;
    double value = 0.0;
};

PolicyOutput policy_forward(const MlpParams& params, const Eigen::VectorXd& obs);

// Adam over the full parameter set (both towers + log_std).
class Adam {
  public:
    Adam(const MlpParams& shape, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(MlpParams& params, const MlpParams& grads);

    double lr;
    double beta1, beta2, eps;
    long t = 0;
    MlpParams m, v; // first/second moments, shape-mirrored
};

} // namespace quadnav::ppo
