// AVX-512F variants. Compiled with -mavx512f; reached only when the
// dispatcher has confirmed CPUID support.

#include "shadowrl/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace shadowrl::kern::avx512 {

namespace {

inline double dot_tail(const double* a, const double* b, int from, int k) {
    double s = 0.0;
    for (int l = from; l < k; ++l) s += a[l] * b[l];
    return s;
}

template <typename CoefFn>
void accum_rows(int m, int n, int k, const double* b, double* c, CoefFn coef);

// Short dot products amortize badly over the 4x4 reduction blocks, so for
// small k the product is computed in the row-accumulation layout instead,
// against a transposed copy of B.
thread_local std::vector<double> g_bt;

template <typename CoefFn>
void gemm_smallk(int m, int n, int k, const double* b, double* c, CoefFn coef) {
    g_bt.resize(static_cast<std::size_t>(k) * n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < k; ++l) g_bt[static_cast<long>(l) * n + j] = b[static_cast<long>(j) * k + l];
    accum_rows(m, n, k, g_bt.data(), c, coef);
}

}  // namespace

void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c) {
    if (k < 16 && m >= 4) {
        gemm_smallk(m, n, k, b, c,
                    [=](int i, int l) { return a[static_cast<long>(i) * k + l]; });
        return;
    }
    const int kv = k & ~7;
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a + static_cast<long>(i) * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        int j = 0;
        for (; j + 4 <= n; j += 4) {
            __m512d acc[4][4];
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s) acc[r][s] = _mm512_setzero_pd();
            for (int l = 0; l < kv; l += 8) {
                const __m512d va0 = _mm512_loadu_pd(a0 + l);
                const __m512d va1 = _mm512_loadu_pd(a1 + l);
                const __m512d va2 = _mm512_loadu_pd(a2 + l);
                const __m512d va3 = _mm512_loadu_pd(a3 + l);
                for (int s = 0; s < 4; ++s) {
                    const __m512d vb = _mm512_loadu_pd(b + static_cast<long>(j + s) * k + l);
                    acc[0][s] = _mm512_fmadd_pd(va0, vb, acc[0][s]);
                    acc[1][s] = _mm512_fmadd_pd(va1, vb, acc[1][s]);
                    acc[2][s] = _mm512_fmadd_pd(va2, vb, acc[2][s]);
                    acc[3][s] = _mm512_fmadd_pd(va3, vb, acc[3][s]);
                }
            }
            const double* arow[4] = {a0, a1, a2, a3};
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s)
                    c[static_cast<long>(i + r) * n + j + s] =
                        _mm512_reduce_add_pd(acc[r][s]) +
                        dot_tail(arow[r], b + static_cast<long>(j + s) * k, kv, k);
        }
        for (; j < n; ++j) {
            const double* bj = b + static_cast<long>(j) * k;
            const double* arow[4] = {a0, a1, a2, a3};
            for (int r = 0; r < 4; ++r) {
                __m512d acc = _mm512_setzero_pd();
                for (int l = 0; l < kv; l += 8)
                    acc = _mm512_fmadd_pd(_mm512_loadu_pd(arow[r] + l), _mm512_loadu_pd(bj + l), acc);
                c[static_cast<long>(i + r) * n + j] = _mm512_reduce_add_pd(acc) + dot_tail(arow[r], bj, kv, k);
            }
        }
    }
    for (; i < m; ++i) {
        const double* ai = a + static_cast<long>(i) * k;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<long>(j) * k;
            __m512d acc = _mm512_setzero_pd();
            for (int l = 0; l < kv; l += 8)
                acc = _mm512_fmadd_pd(_mm512_loadu_pd(ai + l), _mm512_loadu_pd(bj + l), acc);
            c[static_cast<long>(i) * n + j] = _mm512_reduce_add_pd(acc) + dot_tail(ai, bj, kv, k);
        }
    }
}

namespace {

// Same row-block/column-tile pattern as the AVX2 build, twice the lane
// width; every column tail stays vectorized through masked ops.
template <typename CoefFn>
void accum_rows(int m, int n, int k, const double* b, double* c, CoefFn coef) {
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        double* c0 = c + static_cast<long>(i) * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        int j = 0;
        for (; j + 16 <= n; j += 16) {
            __m512d acc[4][2];
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 2; ++s) acc[r][s] = _mm512_setzero_pd();
            for (int l = 0; l < k; ++l) {
                const double* bl = b + static_cast<long>(l) * n + j;
                const __m512d vb0 = _mm512_loadu_pd(bl);
                const __m512d vb1 = _mm512_loadu_pd(bl + 8);
                const __m512d s0 = _mm512_set1_pd(coef(i + 0, l));
                acc[0][0] = _mm512_fmadd_pd(s0, vb0, acc[0][0]);
                acc[0][1] = _mm512_fmadd_pd(s0, vb1, acc[0][1]);
                const __m512d s1 = _mm512_set1_pd(coef(i + 1, l));
                acc[1][0] = _mm512_fmadd_pd(s1, vb0, acc[1][0]);
                acc[1][1] = _mm512_fmadd_pd(s1, vb1, acc[1][1]);
                const __m512d s2 = _mm512_set1_pd(coef(i + 2, l));
                acc[2][0] = _mm512_fmadd_pd(s2, vb0, acc[2][0]);
                acc[2][1] = _mm512_fmadd_pd(s2, vb1, acc[2][1]);
                const __m512d s3 = _mm512_set1_pd(coef(i + 3, l));
                acc[3][0] = _mm512_fmadd_pd(s3, vb0, acc[3][0]);
                acc[3][1] = _mm512_fmadd_pd(s3, vb1, acc[3][1]);
            }
            _mm512_storeu_pd(c0 + j, acc[0][0]);
            _mm512_storeu_pd(c0 + j + 8, acc[0][1]);
            _mm512_storeu_pd(c1 + j, acc[1][0]);
            _mm512_storeu_pd(c1 + j + 8, acc[1][1]);
            _mm512_storeu_pd(c2 + j, acc[2][0]);
            _mm512_storeu_pd(c2 + j + 8, acc[2][1]);
            _mm512_storeu_pd(c3 + j, acc[3][0]);
            _mm512_storeu_pd(c3 + j + 8, acc[3][1]);
        }
        for (; j + 8 <= n; j += 8) {
            __m512d a0 = _mm512_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
            for (int l = 0; l < k; ++l) {
                const __m512d vb = _mm512_loadu_pd(b + static_cast<long>(l) * n + j);
                a0 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 0, l)), vb, a0);
                a1 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 1, l)), vb, a1);
                a2 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 2, l)), vb, a2);
                a3 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 3, l)), vb, a3);
            }
            _mm512_storeu_pd(c0 + j, a0);
            _mm512_storeu_pd(c1 + j, a1);
            _mm512_storeu_pd(c2 + j, a2);
            _mm512_storeu_pd(c3 + j, a3);
        }
        if (j < n) {
            const __mmask8 tail = static_cast<__mmask8>((1u << (n - j)) - 1u);
            __m512d a0 = _mm512_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
            for (int l = 0; l < k; ++l) {
                const __m512d vb = _mm512_maskz_loadu_pd(tail, b + static_cast<long>(l) * n + j);
                a0 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 0, l)), vb, a0);
                a1 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 1, l)), vb, a1);
                a2 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 2, l)), vb, a2);
                a3 = _mm512_fmadd_pd(_mm512_set1_pd(coef(i + 3, l)), vb, a3);
            }
            _mm512_mask_storeu_pd(c0 + j, tail, a0);
            _mm512_mask_storeu_pd(c1 + j, tail, a1);
            _mm512_mask_storeu_pd(c2 + j, tail, a2);
            _mm512_mask_storeu_pd(c3 + j, tail, a3);
        }
    }
    for (; i < m; ++i) {
        double* ci = c + static_cast<long>(i) * n;
        int j = 0;
        for (; j + 8 <= n; j += 8) {
            __m512d acc = _mm512_setzero_pd();
            for (int l = 0; l < k; ++l)
                acc = _mm512_fmadd_pd(_mm512_set1_pd(coef(i, l)),
                                      _mm512_loadu_pd(b + static_cast<long>(l) * n + j), acc);
            _mm512_storeu_pd(ci + j, acc);
        }
        if (j < n) {
            const __mmask8 tail = static_cast<__mmask8>((1u << (n - j)) - 1u);
            __m512d acc = _mm512_setzero_pd();
            for (int l = 0; l < k; ++l)
                acc = _mm512_fmadd_pd(
                    _mm512_set1_pd(coef(i, l)),
                    _mm512_maskz_loadu_pd(tail, b + static_cast<long>(l) * n + j), acc);
            _mm512_mask_storeu_pd(ci + j, tail, acc);
        }
    }
}

}  // namespace

void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c) {
    accum_rows(m, n, k, b, c, [=](int i, int l) { return a[static_cast<long>(i) * k + l]; });
}

void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c) {
    accum_rows(m, n, k, b, c, [=](int i, int l) { return a[static_cast<long>(l) * m + i]; });
}

void add_row_vector(int rows, int cols, double* mat, const double* vec) {
    const int nv = cols & ~7;
    for (int r = 0; r < rows; ++r) {
        double* row = mat + static_cast<long>(r) * cols;
        int j = 0;
        for (; j < nv; j += 8)
            _mm512_storeu_pd(row + j, _mm512_add_pd(_mm512_loadu_pd(row + j), _mm512_loadu_pd(vec + j)));
        for (; j < cols; ++j) row[j] += vec[j];
    }
}

void relu_inplace(int n, double* x) {
    const __m512d zero = _mm512_setzero_pd();
    int i = 0;
    for (; i + 8 <= n; i += 8) _mm512_storeu_pd(x + i, _mm512_max_pd(_mm512_loadu_pd(x + i), zero));
    for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_grad(int n, const double* act, double* g) {
    const __m512d zero = _mm512_setzero_pd();
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        const __mmask8 keep = _mm512_cmp_pd_mask(_mm512_loadu_pd(act + i), zero, _CMP_GT_OQ);
        _mm512_storeu_pd(g + i, _mm512_maskz_mov_pd(keep, _mm512_loadu_pd(g + i)));
    }
    for (; i < n; ++i)
        if (!(act[i] > 0.0)) g[i] = 0.0;
}

void tanh_grad(int n, const double* act, double* g) {
    // mul+sub keeps parity with the scalar reference bit for bit.
    const __m512d one = _mm512_set1_pd(1.0);
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d t = _mm512_loadu_pd(act + i);
        const __m512d d = _mm512_sub_pd(one, _mm512_mul_pd(t, t));
        _mm512_storeu_pd(g + i, _mm512_mul_pd(_mm512_loadu_pd(g + i), d));
    }
    for (; i < n; ++i) g[i] *= 1.0 - act[i] * act[i];
}

void col_sum(int rows, int cols, const double* mat, double* out) {
    std::fill(out, out + cols, 0.0);
    const int nv = cols & ~7;
    for (int r = 0; r < rows; ++r) {
        const double* row = mat + static_cast<long>(r) * cols;
        int j = 0;
        for (; j < nv; j += 8)
            _mm512_storeu_pd(out + j, _mm512_add_pd(_mm512_loadu_pd(out + j), _mm512_loadu_pd(row + j)));
        for (; j < cols; ++j) out[j] += row[j];
    }
}

void adam_step(int n, double* p, const double* g, double* m, double* v,
               double lr, double beta1, double beta2, double eps,
               double bc1, double bc2) {
    const __m512d vb1 = _mm512_set1_pd(beta1);
    const __m512d vb1c = _mm512_set1_pd(1.0 - beta1);
    const __m512d vb2 = _mm512_set1_pd(beta2);
    const __m512d vb2c = _mm512_set1_pd(1.0 - beta2);
    const __m512d vbc1 = _mm512_set1_pd(bc1);
    const __m512d vbc2 = _mm512_set1_pd(bc2);
    const __m512d vlr = _mm512_set1_pd(lr);
    const __m512d veps = _mm512_set1_pd(eps);
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d gi = _mm512_loadu_pd(g + i);
        __m512d mi = _mm512_loadu_pd(m + i);
        __m512d vi = _mm512_loadu_pd(v + i);
        mi = _mm512_add_pd(_mm512_mul_pd(vb1, mi), _mm512_mul_pd(vb1c, gi));
        vi = _mm512_add_pd(_mm512_mul_pd(vb2, vi), _mm512_mul_pd(_mm512_mul_pd(vb2c, gi), gi));
        _mm512_storeu_pd(m + i, mi);
        _mm512_storeu_pd(v + i, vi);
        const __m512d mhat = _mm512_div_pd(mi, vbc1);
        const __m512d vhat = _mm512_div_pd(vi, vbc2);
        const __m512d denom = _mm512_add_pd(_mm512_sqrt_pd(vhat), veps);
        const __m512d upd = _mm512_div_pd(_mm512_mul_pd(vlr, mhat), denom);
        _mm512_storeu_pd(p + i, _mm512_sub_pd(_mm512_loadu_pd(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

void lerp(int n, double* dst, const double* src, double tau) {
    const __m512d vt = _mm512_set1_pd(tau);
    const __m512d vk = _mm512_set1_pd(1.0 - tau);
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d d = _mm512_mul_pd(vk, _mm512_loadu_pd(dst + i));
        const __m512d s = _mm512_mul_pd(vt, _mm512_loadu_pd(src + i));
        _mm512_storeu_pd(dst + i, _mm512_add_pd(d, s));
    }
    const double keep = 1.0 - tau;
    for (; i < n; ++i) dst[i] = keep * dst[i] + tau * src[i];
}

}  // namespace shadowrl::kern::avx512

namespace shadowrl::kern {

const KernelTable& avx512_table() {
    static const KernelTable t{
        avx512::gemm_nt, avx512::gemm_nn, avx512::gemm_tn, avx512::add_row_vector,
        avx512::relu_inplace, avx512::relu_mask_grad, avx512::tanh_grad,
        avx512::col_sum, avx512::adam_step, avx512::lerp,
    };
    return t;
}

}  // namespace shadowrl::kern

#endif  // x86_64
