#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "shadowrl/env.hpp"
#include "shadowrl/nn.hpp"

namespace shadowrl {

class Rng;

// Stored actions are 2-wide normally and 3-wide in agent-decision mode
// (movement plus the decision component); the array is sized for the max.
inline constexpr int kMaxActionDim = 3;

struct Transition {
    std::array<double, kObsDim> state{};
    std::array<double, kMaxActionDim> action{};
    double reward = 0.0;
    std::array<double, kObsDim> next_state{};
    bool terminal = false;  // goal reached; horizon truncation stays false
};

// FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return cap_; }

    // i = 0 is the oldest retained transition.
    const Transition& at(std::size_t i) const;

    // Throws std::logic_error when fewer than batch_size transitions exist.
    void sample(Rng& rng, int batch_size, std::vector<Transition>& out) const;

private:
    std::size_t cap_;
    std::vector<Transition> data_;
    std::size_t write_ = 0;  // next slot once the ring is full
};

struct DdpgConfig {
    double gamma = 0.99;
    double tau = 0.005;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    int batch_size = 64;
    std::size_t buffer_capacity = 100000;
    double noise_std = 0.1;
    int warmup_steps = 1000;
    int hidden_units = 64;
    int action_dim = 2;  // 3 in agent-decision mode
};

// Actor-critic learner with target networks. Actor: obs -> tanh action.
// Critic: (obs, action) -> value. One instance is confined to one thread.
class DdpgAgent {
public:
    DdpgAgent(const DdpgConfig& cfg, Rng& init_rng);

    const DdpgConfig& config() const { return cfg_; }
    int action_dim() const { return cfg_.action_dim; }

    // Actor forward, optional Gaussian exploration noise per component
    // (including the decision component when present), clamp to [-1,1].
    std::array<double, kMaxActionDim> select_action(const Observation& obs, bool explore,
                                                    Rng& noise_rng);

    // Critic value of (obs, action); action must be action_dim wide.
    double q_value(const Observation& obs, const double* action, int dim);

    // TD targets y = r + gamma * (1 - terminal) * Q'(s', actor'(s')).
    std::vector<double> td_targets(const std::vector<Transition>& batch);

    struct UpdateStats {
        double critic_loss = 0.0;      // MSE against y before the update
        double actor_objective = 0.0;  // mean critic value of actor actions
    };

    // One critic + actor + target update on an explicit batch.
    UpdateStats update(const std::vector<Transition>& batch);

    // Convenience: sample a batch from the buffer, then update.
    UpdateStats update_from(const ReplayBuffer& buffer, Rng& sample_rng);

    MlpNet& actor() { return actor_; }
    MlpNet& critic() { return critic_; }
    MlpNet& actor_target() { return actor_target_; }
    MlpNet& critic_target() { return critic_target_; }

    void save(std::ostream& out) const;        // four network checkpoints
    void load_networks(std::istream& in);      // restores all four nets

private:
    DdpgConfig cfg_;
    MlpNet actor_, critic_, actor_target_, critic_target_;
    Adam actor_opt_, critic_opt_;

    // update() workspaces, kept across calls
    std::vector<double> s_, s2_, x_, x2_, y_, dq_, dx_, da_;
    std::vector<double> critic_grad_, actor_grad_;
    std::vector<Transition> batch_scratch_;
};

}  // namespace shadowrl
