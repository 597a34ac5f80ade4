// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma;
// the dispatcher never routes here unless CPUID reports both.

#include "shadowrl/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace shadowrl::kern::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

inline double dot_tail(const double* a, const double* b, int from, int k) {
    double s = 0.0;
    for (int l = from; l < k; ++l) s += a[l] * b[l];
    return s;
}

// maskload/maskstore gate on the element sign bit; sliding a window over
// this table yields a mask with the first `r` lanes (1..3) enabled.
const long long kTailBits[8] = {-1, -1, -1, -1, 0, 0, 0, 0};

inline __m256i tail_mask(int r) {
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kTailBits + 4 - r));
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
    const int kv = k & ~3;
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a + static_cast<long>(i) * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        int j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d acc[4][4];
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s) acc[r][s] = _mm256_setzero_pd();
            for (int l = 0; l < kv; l += 4) {
                const __m256d va0 = _mm256_loadu_pd(a0 + l);
                const __m256d va1 = _mm256_loadu_pd(a1 + l);
                const __m256d va2 = _mm256_loadu_pd(a2 + l);
                const __m256d va3 = _mm256_loadu_pd(a3 + l);
                for (int s = 0; s < 4; ++s) {
                    const __m256d vb = _mm256_loadu_pd(b + static_cast<long>(j + s) * k + l);
                    acc[0][s] = _mm256_fmadd_pd(va0, vb, acc[0][s]);
                    acc[1][s] = _mm256_fmadd_pd(va1, vb, acc[1][s]);
                    acc[2][s] = _mm256_fmadd_pd(va2, vb, acc[2][s]);
                    acc[3][s] = _mm256_fmadd_pd(va3, vb, acc[3][s]);
                }
            }
            const double* arow[4] = {a0, a1, a2, a3};
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s)
                    c[static_cast<long>(i + r) * n + j + s] =
                        hsum(acc[r][s]) + dot_tail(arow[r], b + static_cast<long>(j + s) * k, kv, k);
        }
        for (; j < n; ++j) {
            const double* bj = b + static_cast<long>(j) * k;
            const double* arow[4] = {a0, a1, a2, a3};
            for (int r = 0; r < 4; ++r) {
                __m256d acc = _mm256_setzero_pd();
                for (int l = 0; l < kv; l += 4)
                    acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow[r] + l), _mm256_loadu_pd(bj + l), acc);
                c[static_cast<long>(i + r) * n + j] = hsum(acc) + dot_tail(arow[r], bj, kv, k);
            }
        }
    }
    for (; i < m; ++i) {
        const double* ai = a + static_cast<long>(i) * k;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<long>(j) * k;
            __m256d acc = _mm256_setzero_pd();
            for (int l = 0; l < kv; l += 4)
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(ai + l), _mm256_loadu_pd(bj + l), acc);
            c[static_cast<long>(i) * n + j] = hsum(acc) + dot_tail(ai, bj, kv, k);
        }
    }
}

namespace {

// Shared inner pattern of gemm_nn / gemm_tn: c[i][:] = sum_l coef(i, l) * b[l][:],
// with a row block of 4 i's held in register accumulators over column tiles;
// column tails stay vectorized through masked ops.
template <typename CoefFn>
void accum_rows(int m, int n, int k, const double* b, double* c, CoefFn coef) {
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        double* c0 = c + static_cast<long>(i) * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        int j = 0;
        for (; j + 8 <= n; j += 8) {
            __m256d acc[4][2];
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 2; ++s) acc[r][s] = _mm256_setzero_pd();
            for (int l = 0; l < k; ++l) {
                const double* bl = b + static_cast<long>(l) * n + j;
                const __m256d vb0 = _mm256_loadu_pd(bl);
                const __m256d vb1 = _mm256_loadu_pd(bl + 4);
                const __m256d s0 = _mm256_set1_pd(coef(i + 0, l));
                acc[0][0] = _mm256_fmadd_pd(s0, vb0, acc[0][0]);
                acc[0][1] = _mm256_fmadd_pd(s0, vb1, acc[0][1]);
                const __m256d s1 = _mm256_set1_pd(coef(i + 1, l));
                acc[1][0] = _mm256_fmadd_pd(s1, vb0, acc[1][0]);
                acc[1][1] = _mm256_fmadd_pd(s1, vb1, acc[1][1]);
                const __m256d s2 = _mm256_set1_pd(coef(i + 2, l));
                acc[2][0] = _mm256_fmadd_pd(s2, vb0, acc[2][0]);
                acc[2][1] = _mm256_fmadd_pd(s2, vb1, acc[2][1]);
                const __m256d s3 = _mm256_set1_pd(coef(i + 3, l));
                acc[3][0] = _mm256_fmadd_pd(s3, vb0, acc[3][0]);
                acc[3][1] = _mm256_fmadd_pd(s3, vb1, acc[3][1]);
            }
            _mm256_storeu_pd(c0 + j, acc[0][0]);
            _mm256_storeu_pd(c0 + j + 4, acc[0][1]);
            _mm256_storeu_pd(c1 + j, acc[1][0]);
            _mm256_storeu_pd(c1 + j + 4, acc[1][1]);
            _mm256_storeu_pd(c2 + j, acc[2][0]);
            _mm256_storeu_pd(c2 + j + 4, acc[2][1]);
            _mm256_storeu_pd(c3 + j, acc[3][0]);
            _mm256_storeu_pd(c3 + j + 4, acc[3][1]);
        }
        for (; j + 4 <= n; j += 4) {
            __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
            for (int l = 0; l < k; ++l) {
                const __m256d vb = _mm256_loadu_pd(b + static_cast<long>(l) * n + j);
                a0 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 0, l)), vb, a0);
                a1 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 1, l)), vb, a1);
                a2 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 2, l)), vb, a2);
                a3 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 3, l)), vb, a3);
            }
            _mm256_storeu_pd(c0 + j, a0);
            _mm256_storeu_pd(c1 + j, a1);
            _mm256_storeu_pd(c2 + j, a2);
            _mm256_storeu_pd(c3 + j, a3);
        }
        if (j < n) {
            const __m256i tail = tail_mask(n - j);
            __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
            for (int l = 0; l < k; ++l) {
                const __m256d vb = _mm256_maskload_pd(b + static_cast<long>(l) * n + j, tail);
                a0 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 0, l)), vb, a0);
                a1 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 1, l)), vb, a1);
                a2 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 2, l)), vb, a2);
                a3 = _mm256_fmadd_pd(_mm256_set1_pd(coef(i + 3, l)), vb, a3);
            }
            _mm256_maskstore_pd(c0 + j, tail, a0);
            _mm256_maskstore_pd(c1 + j, tail, a1);
            _mm256_maskstore_pd(c2 + j, tail, a2);
            _mm256_maskstore_pd(c3 + j, tail, a3);
        }
    }
    for (; i < m; ++i) {
        double* ci = c + static_cast<long>(i) * n;
        int j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (int l = 0; l < k; ++l)
                acc = _mm256_fmadd_pd(_mm256_set1_pd(coef(i, l)),
                                      _mm256_loadu_pd(b + static_cast<long>(l) * n + j), acc);
            _mm256_storeu_pd(ci + j, acc);
        }
        if (j < n) {
            const __m256i tail = tail_mask(n - j);
            __m256d acc = _mm256_setzero_pd();
            for (int l = 0; l < k; ++l)
                acc = _mm256_fmadd_pd(
                    _mm256_set1_pd(coef(i, l)),
                    _mm256_maskload_pd(b + static_cast<long>(l) * n + j, tail), acc);
            _mm256_maskstore_pd(ci + j, tail, acc);
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
    const int nv = cols & ~3;
    for (int r = 0; r < rows; ++r) {
        double* row = mat + static_cast<long>(r) * cols;
        int j = 0;
        for (; j < nv; j += 4)
            _mm256_storeu_pd(row + j, _mm256_add_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(vec + j)));
        for (; j < cols; ++j) row[j] += vec[j];
    }
}

void relu_inplace(int n, double* x) {
    const __m256d zero = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_grad(int n, const double* act, double* g) {
    const __m256d zero = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(act + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(g + i, _mm256_and_pd(_mm256_loadu_pd(g + i), mask));
    }
    for (; i < n; ++i)
        if (!(act[i] > 0.0)) g[i] = 0.0;
}

void tanh_grad(int n, const double* act, double* g) {
    // mul+sub rather than fnmadd: keeps results bit-identical to the scalar
    // reference, which the equivalence tests check exactly for elementwise ops.
    const __m256d one = _mm256_set1_pd(1.0);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_loadu_pd(act + i);
        const __m256d d = _mm256_sub_pd(one, _mm256_mul_pd(t, t));
        _mm256_storeu_pd(g + i, _mm256_mul_pd(_mm256_loadu_pd(g + i), d));
    }
    for (; i < n; ++i) g[i] *= 1.0 - act[i] * act[i];
}

void col_sum(int rows, int cols, const double* mat, double* out) {
    std::fill(out, out + cols, 0.0);
    const int nv = cols & ~3;
    for (int r = 0; r < rows; ++r) {
        const double* row = mat + static_cast<long>(r) * cols;
        int j = 0;
        for (; j < nv; j += 4)
            _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_loadu_pd(row + j)));
        for (; j < cols; ++j) out[j] += row[j];
    }
}

void adam_step(int n, double* p, const double* g, double* m, double* v,
               double lr, double beta1, double beta2, double eps,
               double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_loadu_pd(m + i);
        __m256d vi = _mm256_loadu_pd(v + i);
        mi = _mm256_add_pd(_mm256_mul_pd(vb1, mi), _mm256_mul_pd(vb1c, gi));
        vi = _mm256_add_pd(_mm256_mul_pd(vb2, vi), _mm256_mul_pd(_mm256_mul_pd(vb2c, gi), gi));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_div_pd(mi, vbc1);
        const __m256d vhat = _mm256_div_pd(vi, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

void lerp(int n, double* dst, const double* src, double tau) {
    const __m256d vt = _mm256_set1_pd(tau);
    const __m256d vk = _mm256_set1_pd(1.0 - tau);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_mul_pd(vk, _mm256_loadu_pd(dst + i));
        const __m256d s = _mm256_mul_pd(vt, _mm256_loadu_pd(src + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(d, s));
    }
    const double keep = 1.0 - tau;
    for (; i < n; ++i) dst[i] = keep * dst[i] + tau * src[i];
}

}  // namespace shadowrl::kern::avx2

namespace shadowrl::kern {

const KernelTable& avx2_table() {
    static const KernelTable t{
        avx2::gemm_nt, avx2::gemm_nn, avx2::gemm_tn, avx2::add_row_vector,
        avx2::relu_inplace, avx2::relu_mask_grad, avx2::tanh_grad,
        avx2::col_sum, avx2::adam_step, avx2::lerp,
    };
    return t;
}

}  // namespace shadowrl::kern

#endif  // x86_64
