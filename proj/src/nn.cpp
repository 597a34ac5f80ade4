#include "shadowrl/nn.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "shadowrl/kernels.hpp"
#include "shadowrl/rng.hpp"

namespace shadowrl {

MlpNet::MlpNet(std::vector<int> layer_sizes, OutputActivation out_act)
    : sizes_(std::move(layer_sizes)), out_act_(out_act) {
    if (sizes_.size() < 2) throw std::invalid_argument("MlpNet needs at least two layer sizes");
    for (int s : sizes_)
        if (s <= 0) throw std::invalid_argument("MlpNet layer sizes must be positive");
    int off = 0;
    for (int l = 0; l < n_layers(); ++l) {
        w_off_.push_back(off);
        off += sizes_[l] * sizes_[l + 1];
        b_off_.push_back(off);
        off += sizes_[l + 1];
    }
    params_.assign(off, 0.0);
    acts_.resize(n_layers());
    dacts_.resize(n_layers());
}

void MlpNet::init_params(Rng& rng) {
    for (int l = 0; l < n_layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        double* w = params_.data() + w_off_[l];
        const int nw = sizes_[l] * sizes_[l + 1];
        for (int i = 0; i < nw; ++i) w[i] = rng.uniform(-bound, bound);
        double* b = params_.data() + b_off_[l];
        for (int i = 0; i < sizes_[l + 1]; ++i) b[i] = rng.uniform(-bound, bound);
    }
}

void MlpNet::ensure_rows(int rows) {
    if (rows <= cap_rows_) return;
    for (int l = 0; l < n_layers(); ++l) {
        acts_[l].resize(static_cast<std::size_t>(rows) * sizes_[l + 1]);
        dacts_[l].resize(static_cast<std::size_t>(rows) * sizes_[l + 1]);
    }
    cap_rows_ = rows;
}

const double* MlpNet::forward_batch(int rows, const double* x) {
    if (rows <= 0) throw std::invalid_argument("forward_batch: rows must be positive");
    ensure_rows(rows);
    const kern::KernelTable& k = kern::table();
    const double* in = x;
    for (int l = 0; l < n_layers(); ++l) {
        const int n_in = sizes_[l];
        const int n_out = sizes_[l + 1];
        double* out = acts_[l].data();
        k.gemm_nt(rows, n_out, n_in, in, params_.data() + w_off_[l], out);
        k.add_row_vector(rows, n_out, out, params_.data() + b_off_[l]);
        if (l < n_layers() - 1) {
            k.relu_inplace(rows * n_out, out);
        } else if (out_act_ == OutputActivation::tanh) {
            for (int i = 0; i < rows * n_out; ++i) out[i] = std::tanh(out[i]);
        }
        in = out;
    }
    return acts_.back().data();
}

std::vector<double> MlpNet::forward(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != input_size())
        throw std::invalid_argument("forward: input size mismatch");
    const double* y = forward_batch(1, x.data());
    return std::vector<double>(y, y + output_size());
}

void MlpNet::backward_batch(int rows, const double* x, const double* dy,
                            double* grad, double* dx) {
    if (rows <= 0 || rows > cap_rows_)
        throw std::logic_error("backward_batch without a matching forward_batch");
    const kern::KernelTable& k = kern::table();
    const int last = n_layers() - 1;

    // Seed the backward pass with dy through the output activation.
    double* delta = dacts_[last].data();
    std::memcpy(delta, dy, static_cast<std::size_t>(rows) * sizes_.back() * sizeof(double));
    if (out_act_ == OutputActivation::tanh)
        k.tanh_grad(rows * sizes_.back(), acts_[last].data(), delta);

    for (int l = last; l >= 0; --l) {
        const int n_in = sizes_[l];
        const int n_out = sizes_[l + 1];
        if (grad != nullptr) {
            const double* in = (l == 0) ? x : acts_[l - 1].data();
            // delta is rows x n_out; weight grad = delta^T * in.
            k.gemm_tn(n_out, n_in, rows, delta, in, grad + w_off_[l]);
            k.col_sum(rows, n_out, delta, grad + b_off_[l]);
        }
        if (l > 0) {
            double* dprev = dacts_[l - 1].data();
            k.gemm_nn(rows, n_in, n_out, delta, params_.data() + w_off_[l], dprev);
            k.relu_mask_grad(rows * n_in, acts_[l - 1].data(), dprev);
            delta = dprev;
        } else if (dx != nullptr) {
            k.gemm_nn(rows, n_in, n_out, delta, params_.data() + w_off_[l], dx);
        }
    }
}

namespace {

constexpr char kNetMagic[4] = {'M', 'L', 'P', '1'};

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated network checkpoint");
    return v;
}

}  // namespace

void MlpNet::save(std::ostream& out) const {
    out.write(kNetMagic, sizeof(kNetMagic));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(sizes_.size()));
    for (int s : sizes_) write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s));
    write_raw<std::uint8_t>(out, out_act_ == OutputActivation::tanh ? 1 : 0);
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(params_.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed to write network checkpoint");
}

MlpNet MlpNet::load(std::istream& in) {
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kNetMagic, sizeof(magic)) != 0)
        throw std::runtime_error("bad network checkpoint magic");
    const auto n_sizes = read_raw<std::uint32_t>(in);
    if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("implausible checkpoint layer count");
    std::vector<int> sizes(n_sizes);
    for (auto& s : sizes) {
        const auto v = read_raw<std::uint32_t>(in);
        if (v == 0 || v > (1u << 20)) throw std::runtime_error("implausible checkpoint layer size");
        s = static_cast<int>(v);
    }
    const auto act = read_raw<std::uint8_t>(in);
    if (act > 1) throw std::runtime_error("unknown checkpoint output activation");
    MlpNet net(std::move(sizes), act ? OutputActivation::tanh : OutputActivation::identity);
    in.read(reinterpret_cast<char*>(net.params_.data()),
            static_cast<std::streamsize>(net.params_.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated network checkpoint parameters");
    return net;
}

void soft_update(MlpNet& target, const MlpNet& source, double tau) {
    if (target.layer_sizes() != source.layer_sizes() ||
        target.output_activation() != source.output_activation())
        throw std::invalid_argument("soft_update: architecture mismatch");
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau outside [0,1]");
    kern::table().lerp(target.param_count(), target.params().data(),
                       source.params().data(), tau);
}

Adam::Adam(int n, double lr, double beta1, double beta2, double eps)
    : m_(n, 0.0), v_(n, 0.0), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (n <= 0) throw std::invalid_argument("Adam: parameter count must be positive");
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw std::invalid_argument("Adam::step: shape mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    kern::table().adam_step(static_cast<int>(m_.size()), params.data(), grad.data(),
                            m_.data(), v_.data(), lr_, beta1_, beta2_, eps_, bc1, bc2);
}

}  // namespace shadowrl
