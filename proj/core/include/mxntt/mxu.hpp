#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mxntt/accumulator.hpp"
#include "mxntt/errors.hpp"

namespace mxntt {

struct MxuConfig {
    int C = 4;                     // limbs per residue
    AccumulatorModel accumulator = AccumulatorModel::fp32_mantissa();
    int tile = 128;                // systolic array edge
};

// Unsigned limb-decomposed left operand, rows x (d*C), row-major.
// Column (t, i) = coefficient t, limb i, at index t*C + i.
struct LimbOperand {
    std::size_t rows = 0;
    std::size_t d = 0;
    int C = 0;
    std::vector<std::uint8_t> data;

    std::uint8_t at(std::size_t r, std::size_t t, int i) const {
        return data[r * d * static_cast<std::size_t>(C) +
                    t * static_cast<std::size_t>(C) + static_cast<std::size_t>(i)];
    }
};

// Balanced signed twiddle operand, (d_in*C) x (d_out*(2C-1)), row-major.
// Row (t, i) holds digit_{k-i} of W[t][u] at column (u, k); zero outside the
// weight band. Weight class k of an output cell collects all limb products
// whose base-256 weights sum to k.
struct SignedTwiddleOperand {
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    int C = 0;
    std::vector<std::int8_t> digits;

    std::size_t k_rows() const { return d_in * static_cast<std::size_t>(C); }
    std::size_t n_cols() const {
        return d_out * static_cast<std::size_t>(2 * C - 1);
    }
    std::int8_t at(std::size_t t, int i, std::size_t u, int k) const {
        return digits[(t * static_cast<std::size_t>(C) + static_cast<std::size_t>(i)) * n_cols() +
                      u * static_cast<std::size_t>(2 * C - 1) + static_cast<std::size_t>(k)];
    }
};

// Dense residue matrix, used for small contract-level twiddles.
struct DenseResidueMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<std::uint64_t> v;
    std::uint64_t at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

// Power-table twiddle: entry(i, j) = pow[(i*j) mod order]. Never materializes
// rows*cols entries, so degree-8192 twiddles stay small.
struct ResiduePowerTable {
    std::size_t rows = 0, cols = 0;
    std::size_t order = 0;
    std::vector<std::uint64_t> pow;
    std::uint64_t at(std::size_t i, std::size_t j) const {
        return pow[(i * j) % order];
    }
};

std::pair<LimbOperand, SignedTwiddleOperand> pack_operands(
    const std::vector<std::vector<std::uint64_t>>& rows_residues,
    const DenseResidueMatrix& W, std::uint64_t modulus, int C);

struct MatmulReport {
    std::uint64_t flagged_cells = 0;   // model value differs from exact
    std::uint64_t overflow_cells = 0;  // Int32 accumulation left the window
    std::vector<std::uint32_t> flagged_index;
    std::vector<std::uint32_t> overflow_index;
};

struct MatmulResult {
    std::size_t rows = 0, cols = 0;
    std::vector<std::int64_t> model; // accumulator-model cell values
    std::vector<std::int64_t> exact; // unbounded integer cell values
    MatmulReport report;
};

// Systolic-array matmul with per-model accumulation semantics. Products are
// accumulated in ascending K order; fp32 rounds the running sum to the nearest
// single after every multiply-accumulate.
MatmulResult mxu_matmul(const LimbOperand& left, const SignedTwiddleOperand& right,
                        const MxuConfig& cfg);

// Recombine the (2C-1) weight-class cells of each output coefficient:
// sum_k cell_k * 256^k, reduced mod modulus.
std::vector<std::uint64_t> recombine_weight_classes(const MatmulResult& r, int C,
                                                    std::uint64_t modulus);

struct StagedResult {
    std::vector<std::uint64_t> residues;
    std::size_t passes = 0;
    std::uint64_t flagged_cells = 0;
    std::uint64_t overflow_cells = 0;
};

struct BatchStagedResult {
    std::vector<std::vector<std::uint64_t>> rows;
    std::size_t passes = 0;
    std::uint64_t flagged_cells = 0;
    std::uint64_t overflow_cells = 0;
    std::vector<std::uint64_t> row_flagged;  // per input row
    std::vector<std::uint64_t> row_overflow;
};

// Staged evaluation: splits the K dimension into ceil(d/d_max) chunks, runs
// each chunk through the accumulator model, folds weight classes and reduces
// mod modulus between chunks (the vector-unit step), and accumulates the
// reduced partials. With staging off everything is dispatched as one pass and
// the exactness report may flag cells. When staging is on and the model has an
// exact window, d_max must equal accumulator_bound(C, window).
StagedResult staged_matrix_ntt(std::span<const std::uint64_t> poly,
                               const DenseResidueMatrix& W, std::uint64_t modulus,
                               const MxuConfig& cfg, std::size_t d_max, bool staging);
StagedResult staged_matrix_ntt(std::span<const std::uint64_t> poly,
                               const ResiduePowerTable& W, std::uint64_t modulus,
                               const MxuConfig& cfg, std::size_t d_max, bool staging);

// Same pipeline over a stacked batch of rows sharing one twiddle operand.
BatchStagedResult staged_matrix_ntt_rows(const std::vector<std::vector<std::uint64_t>>& rows,
                                         const DenseResidueMatrix& W, std::uint64_t modulus,
                                         const MxuConfig& cfg, std::size_t d_max, bool staging);
BatchStagedResult staged_matrix_ntt_rows(const std::vector<std::vector<std::uint64_t>>& rows,
                                         const ResiduePowerTable& W, std::uint64_t modulus,
                                         const MxuConfig& cfg, std::size_t d_max, bool staging);

} // namespace mxntt
