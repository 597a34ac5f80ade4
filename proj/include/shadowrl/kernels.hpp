#pragma once

#include <string>

// Dense double-precision kernels behind the network math. Every operation
// has a scalar reference implementation plus AVX2/AVX-512 variants compiled
// into separate translation units; the active set is chosen once at runtime
// from CPUID (overridable for equivalence tests and benchmarking).
//
// All matrices are packed row-major. SIMD variants may reassociate sums, so
// results agree with the scalar reference to rounding, not bitwise; within
// one process the selected variant is fixed, which keeps runs reproducible.

namespace shadowrl::kern {

enum class Isa { scalar, avx2, avx512 };

// Best ISA supported by this CPU.
Isa detect_best();

// Currently active implementation (initialized to detect_best()).
Isa active();

// Force an implementation; throws std::runtime_error if unsupported here.
void select(Isa isa);

const char* isa_name(Isa isa);

struct KernelTable {
    // c[m x n] = a[m x k] * b[n x k]^T
    void (*gemm_nt)(int m, int n, int k, const double* a, const double* b, double* c);
    // c[m x n] = a[m x k] * b[k x n]
    void (*gemm_nn)(int m, int n, int k, const double* a, const double* b, double* c);
    // c[m x n] = a[k x m]^T * b[k x n]
    void (*gemm_tn)(int m, int n, int k, const double* a, const double* b, double* c);
    // mat[r][:] += vec for every row
    void (*add_row_vector)(int rows, int cols, double* mat, const double* vec);
    // x = max(x, 0) elementwise
    void (*relu_inplace)(int n, double* x);
    // g[i] = act[i] > 0 ? g[i] : 0   (act holds post-ReLU values)
    void (*relu_mask_grad)(int n, const double* act, double* g);
    // g[i] *= 1 - act[i]^2           (act holds tanh outputs)
    void (*tanh_grad)(int n, const double* act, double* g);
    // out[j] = sum_r mat[r][j]
    void (*col_sum)(int rows, int cols, const double* mat, double* out);
    // Adam with precomputed bias corrections bc1 = 1-beta1^t, bc2 = 1-beta2^t.
    void (*adam_step)(int n, double* p, const double* g, double* m, double* v,
                      double lr, double beta1, double beta2, double eps,
                      double bc1, double bc2);
    // dst = (1 - tau) * dst + tau * src
    void (*lerp)(int n, double* dst, const double* src, double tau);
};

// Table for the active ISA (hot paths cache the returned reference).
const KernelTable& table();

// Tables for a specific ISA (used by the equivalence tests).
const KernelTable& table_for(Isa isa);

}  // namespace shadowrl::kern
