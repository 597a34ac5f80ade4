#include "shadowrl/kernels.hpp"

#include <algorithm>
#include <cmath>

// Reference implementations. Plain loops, no intrinsics; these define the
// semantics the SIMD variants are tested against.

namespace shadowrl::kern::scalar {

void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<long>(i) * k;
        double* ci = c + static_cast<long>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<long>(j) * k;
            double acc = 0.0;
            for (int l = 0; l < k; ++l) acc += ai[l] * bj[l];
            ci[j] = acc;
        }
    }
}

void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<long>(i) * n;
        std::fill(ci, ci + n, 0.0);
        const double* ai = a + static_cast<long>(i) * k;
        for (int l = 0; l < k; ++l) {
            const double s = ai[l];
            const double* bl = b + static_cast<long>(l) * n;
            for (int j = 0; j < n; ++j) ci[j] += s * bl[j];
        }
    }
}

void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c) {
    for (int i = 0; i < m; ++i) std::fill(c + static_cast<long>(i) * n, c + static_cast<long>(i + 1) * n, 0.0);
    for (int l = 0; l < k; ++l) {
        const double* al = a + static_cast<long>(l) * m;
        const double* bl = b + static_cast<long>(l) * n;
        for (int i = 0; i < m; ++i) {
            const double s = al[i];
            double* ci = c + static_cast<long>(i) * n;
            for (int j = 0; j < n; ++j) ci[j] += s * bl[j];
        }
    }
}

void add_row_vector(int rows, int cols, double* mat, const double* vec) {
    for (int r = 0; r < rows; ++r) {
        double* row = mat + static_cast<long>(r) * cols;
        for (int j = 0; j < cols; ++j) row[j] += vec[j];
    }
}

void relu_inplace(int n, double* x) {
    for (int i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_grad(int n, const double* act, double* g) {
    for (int i = 0; i < n; ++i)
        if (!(act[i] > 0.0)) g[i] = 0.0;
}

void tanh_grad(int n, const double* act, double* g) {
    for (int i = 0; i < n; ++i) g[i] *= 1.0 - act[i] * act[i];
}

void col_sum(int rows, int cols, const double* mat, double* out) {
    std::fill(out, out + cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        const double* row = mat + static_cast<long>(r) * cols;
        for (int j = 0; j < cols; ++j) out[j] += row[j];
    }
}

void adam_step(int n, double* p, const double* g, double* m, double* v,
               double lr, double beta1, double beta2, double eps,
               double bc1, double bc2) {
    for (int i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void lerp(int n, double* dst, const double* src, double tau) {
    // Two-product form so tau = 0 and tau = 1 are exact.
    const double keep = 1.0 - tau;
    for (int i = 0; i < n; ++i) dst[i] = keep * dst[i] + tau * src[i];
}

}  // namespace shadowrl::kern::scalar

namespace shadowrl::kern {

const KernelTable& scalar_table() {
    static const KernelTable t{
        scalar::gemm_nt, scalar::gemm_nn,  scalar::gemm_tn, scalar::add_row_vector,
        scalar::relu_inplace, scalar::relu_mask_grad, scalar::tanh_grad,
        scalar::col_sum, scalar::adam_step, scalar::lerp,
    };
    return t;
}

}  // namespace shadowrl::kern
