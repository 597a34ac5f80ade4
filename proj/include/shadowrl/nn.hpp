#pragma once

#include <iosfwd>
#include <vector>

namespace shadowrl {

class Rng;

enum class OutputActivation { identity, tanh };

// Fully connected network: ReLU on hidden layers, identity or tanh on the
// output. Parameters live in one flat vector (per layer: row-major weight
// [out x in], then bias [out]) so the optimizer and soft updates can treat
// them as a single array. All math is double precision and runs through the
// runtime-selected kernel table.
//
// An instance owns scratch buffers for batched forward/backward, so it is
// confined to one thread at a time.
class MlpNet {
public:
    MlpNet(std::vector<int> layer_sizes, OutputActivation out_act);

    // Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
    // biases, drawn in layer order (weights row-major, then bias).
    void init_params(Rng& rng);

    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    int n_layers() const { return static_cast<int>(sizes_.size()) - 1; }
    int param_count() const { return static_cast<int>(params_.size()); }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    OutputActivation output_activation() const { return out_act_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    int weight_offset(int layer) const { return w_off_[layer]; }
    int bias_offset(int layer) const { return b_off_[layer]; }

    // Batched forward over `rows` inputs (row-major, rows x input_size).
    // Keeps layer activations for a subsequent backward_batch. Returns a
    // pointer to rows x output_size results, valid until the next call.
    const double* forward_batch(int rows, const double* x);

    // Convenience wrappers with dimension checks.
    std::vector<double> forward(const std::vector<double>& x);

    // Gradient of sum_r <dy[r], output[r]> w.r.t. parameters (written to
    // grad, size param_count; pass nullptr to skip them) and optionally the
    // inputs (dx, rows x input_size). Requires the activations of the
    // matching forward_batch call (same rows, same x).
    void backward_batch(int rows, const double* x, const double* dy,
                        double* grad, double* dx = nullptr);

    void save(std::ostream& out) const;
    static MlpNet load(std::istream& in);

private:
    void ensure_rows(int rows);

    std::vector<int> sizes_;
    OutputActivation out_act_;
    std::vector<double> params_;
    std::vector<int> w_off_, b_off_;

    int cap_rows_ = 0;
    std::vector<std::vector<double>> acts_;   // post-activation per layer
    std::vector<std::vector<double>> dacts_;  // gradients flowing backward
};

// target <- (1 - tau) * target + tau * source; throws std::invalid_argument
// on architecture mismatch.
void soft_update(MlpNet& target, const MlpNet& source, double tau);

// Adaptive-moment optimizer over a flat parameter vector, with bias
// correction. Deterministic; state is (m, v, step count).
class Adam {
public:
    Adam(int n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    // One update; grad must have the same length as params.
    void step(std::vector<double>& params, const std::vector<double>& grad);

    double lr() const { return lr_; }
    int steps_taken() const { return t_; }

private:
    std::vector<double> m_, v_;
    int t_ = 0;
    double lr_, beta1_, beta2_, eps_;
};

}  // namespace shadowrl
