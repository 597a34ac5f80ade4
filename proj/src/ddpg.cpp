#include "shadowrl/ddpg.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "shadowrl/rng.hpp"

namespace shadowrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : cap_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(const Transition& t) {
    if (data_.size() < cap_) {
        data_.push_back(t);
    } else {
        data_[write_] = t;
        write_ = (write_ + 1) % cap_;
    }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size()) throw std::out_of_range("replay buffer index");
    if (data_.size() < cap_) return data_[i];
    return data_[(write_ + i) % cap_];
}

void ReplayBuffer::sample(Rng& rng, int batch_size, std::vector<Transition>& out) const {
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
    if (data_.size() < static_cast<std::size_t>(batch_size))
        throw std::logic_error("sampling from an underfilled replay buffer");
    out.clear();
    out.reserve(batch_size);
    for (int i = 0; i < batch_size; ++i)
        out.push_back(data_[rng.uniform_int(data_.size())]);
}

namespace {

std::vector<int> actor_arch(const DdpgConfig& c) {
    return {kObsDim, c.hidden_units, c.hidden_units, c.action_dim};
}

std::vector<int> critic_arch(const DdpgConfig& c) {
    return {kObsDim + c.action_dim, c.hidden_units, c.hidden_units, 1};
}

}  // namespace

DdpgAgent::DdpgAgent(const DdpgConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      actor_(actor_arch(cfg), OutputActivation::tanh),
      critic_(critic_arch(cfg), OutputActivation::identity),
      actor_target_(actor_arch(cfg), OutputActivation::tanh),
      critic_target_(critic_arch(cfg), OutputActivation::identity),
      actor_opt_(actor_.param_count(), cfg.actor_lr),
      critic_opt_(critic_.param_count(), cfg.critic_lr) {
    if (cfg.action_dim != 2 && cfg.action_dim != 3)
        throw std::invalid_argument("action_dim must be 2 or 3");
    actor_.init_params(init_rng);
    critic_.init_params(init_rng);
    // Zero the critic's output head so Q === 0 before the first update. Under
    // Q-comparison every early decision is then a tie, which goes to the
    // baseline, so the buffer seeds with baseline trajectories instead of
    // whatever side of an arbitrary random surface happens to win.
    const int last = critic_.n_layers() - 1; if (!std::getenv("SHADOWRL_RANDOM_HEAD"))
    std::fill(critic_.params().begin() + critic_.weight_offset(last), critic_.params().end(), 0.0);
    actor_target_.params() = actor_.params();
    critic_target_.params() = critic_.params();
    critic_grad_.resize(critic_.param_count());
    actor_grad_.resize(actor_.param_count());
}

std::array<double, kMaxActionDim> DdpgAgent::select_action(const Observation& obs,
                                                           bool explore, Rng& noise_rng) {
    const auto flat = obs.flat();
    const double* out = actor_.forward_batch(1, flat.data());
    std::array<double, kMaxActionDim> a{};
    for (int i = 0; i < cfg_.action_dim; ++i) {
        double v = out[i];
        if (explore) v += cfg_.noise_std * noise_rng.normal();
        a[i] = std::clamp(v, -1.0, 1.0);
    }
    return a;
}

double DdpgAgent::q_value(const Observation& obs, const double* action, int dim) {
    if (dim != cfg_.action_dim)
        throw std::invalid_argument("q_value: action width does not match the critic");
    std::array<double, kObsDim + kMaxActionDim> x{};
    const auto flat = obs.flat();
    std::copy(flat.begin(), flat.end(), x.begin());
    std::copy(action, action + dim, x.begin() + kObsDim);
    return critic_.forward_batch(1, x.data())[0];
}

std::vector<double> DdpgAgent::td_targets(const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("td_targets: empty batch");
    const int b = static_cast<int>(batch.size());
    const int ad = cfg_.action_dim;
    const int xdim = kObsDim + ad;

    s2_.resize(static_cast<std::size_t>(b) * kObsDim);
    for (int r = 0; r < b; ++r)
        std::memcpy(s2_.data() + static_cast<std::size_t>(r) * kObsDim,
                    batch[r].next_state.data(), kObsDim * sizeof(double));

    const double* a2 = actor_target_.forward_batch(b, s2_.data());
    x2_.resize(static_cast<std::size_t>(b) * xdim);
    for (int r = 0; r < b; ++r) {
        std::memcpy(x2_.data() + static_cast<std::size_t>(r) * xdim,
                    batch[r].next_state.data(), kObsDim * sizeof(double));
        std::memcpy(x2_.data() + static_cast<std::size_t>(r) * xdim + kObsDim,
                    a2 + static_cast<std::size_t>(r) * ad, ad * sizeof(double));
    }
    const double* q2 = critic_target_.forward_batch(b, x2_.data());

    std::vector<double> y(b);
    for (int r = 0; r < b; ++r)
        y[r] = batch[r].reward +
               (batch[r].terminal ? 0.0 : cfg_.gamma * q2[r]);
    return y;
}

DdpgAgent::UpdateStats DdpgAgent::update(const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("update: empty batch");
    const int b = static_cast<int>(batch.size());
    const int ad = cfg_.action_dim;
    const int xdim = kObsDim + ad;

    y_ = td_targets(batch);

    s_.resize(static_cast<std::size_t>(b) * kObsDim);
    x_.resize(static_cast<std::size_t>(b) * xdim);
    for (int r = 0; r < b; ++r) {
        std::memcpy(s_.data() + static_cast<std::size_t>(r) * kObsDim,
                    batch[r].state.data(), kObsDim * sizeof(double));
        std::memcpy(x_.data() + static_cast<std::size_t>(r) * xdim,
                    batch[r].state.data(), kObsDim * sizeof(double));
        std::memcpy(x_.data() + static_cast<std::size_t>(r) * xdim + kObsDim,
                    batch[r].action.data(), ad * sizeof(double));
    }

    UpdateStats stats;

    // Critic: minimize mean squared error against y.
    const double* q = critic_.forward_batch(b, x_.data());
    dq_.resize(b);
    for (int r = 0; r < b; ++r) {
        const double err = q[r] - y_[r];
        stats.critic_loss += err * err;
        dq_[r] = 2.0 * err / b;
    }
    stats.critic_loss /= b;
    critic_.backward_batch(b, x_.data(), dq_.data(), critic_grad_.data());
    critic_opt_.step(critic_.params(), critic_grad_);

    // Actor: ascend the (freshly updated) critic's value of its own actions.
    const double* a_pred = actor_.forward_batch(b, s_.data());
    x2_.resize(static_cast<std::size_t>(b) * xdim);
    for (int r = 0; r < b; ++r) {
        std::memcpy(x2_.data() + static_cast<std::size_t>(r) * xdim,
                    batch[r].state.data(), kObsDim * sizeof(double));
        std::memcpy(x2_.data() + static_cast<std::size_t>(r) * xdim + kObsDim,
                    a_pred + static_cast<std::size_t>(r) * ad, ad * sizeof(double));
    }
    const double* qp = critic_.forward_batch(b, x2_.data());
    for (int r = 0; r < b; ++r) stats.actor_objective += qp[r];
    stats.actor_objective /= b;

    dq_.assign(b, -1.0 / b);  // maximize mean q == minimize its negation
    dx_.resize(static_cast<std::size_t>(b) * xdim);
    // Only the input gradient matters here; the critic's own parameters are
    // not updated through the actor objective.
    critic_.backward_batch(b, x2_.data(), dq_.data(), nullptr, dx_.data());
    da_.resize(static_cast<std::size_t>(b) * ad);
    for (int r = 0; r < b; ++r)
        std::memcpy(da_.data() + static_cast<std::size_t>(r) * ad,
                    dx_.data() + static_cast<std::size_t>(r) * xdim + kObsDim,
                    ad * sizeof(double));
    actor_.backward_batch(b, s_.data(), da_.data(), actor_grad_.data());
    actor_opt_.step(actor_.params(), actor_grad_);

    soft_update(actor_target_, actor_, cfg_.tau);
    soft_update(critic_target_, critic_, cfg_.tau);
    return stats;
}

DdpgAgent::UpdateStats DdpgAgent::update_from(const ReplayBuffer& buffer, Rng& sample_rng) {
    buffer.sample(sample_rng, cfg_.batch_size, batch_scratch_);
    return update(batch_scratch_);
}

void DdpgAgent::save(std::ostream& out) const {
    actor_.save(out);
    critic_.save(out);
    actor_target_.save(out);
    critic_target_.save(out);
}

void DdpgAgent::load_networks(std::istream& in) {
    auto restore = [&](MlpNet& dst) {
        MlpNet loaded = MlpNet::load(in);
        if (loaded.layer_sizes() != dst.layer_sizes() ||
            loaded.output_activation() != dst.output_activation())
            throw std::runtime_error("checkpoint architecture does not match the configured agent");
        dst.params() = loaded.params();
    };
    restore(actor_);
    restore(critic_);
    restore(actor_target_);
    restore(critic_target_);
}

}  // namespace shadowrl
