#include "mxntt/mxu.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mxntt/limbs.hpp"

namespace mxntt {

namespace {

// Flattened signed digit table for a twiddle source. Dense tables index by
// (t * cols + u); power tables index by (t * u) mod order, which keeps the
// degree-8192 case at order*C bytes.
struct TwiddleDigits {
    std::vector<std::int8_t> tab;
    std::size_t cols = 0;
    std::size_t order = 0; // 0 marks the dense layout
    int C = 0;

    const std::int8_t* at(std::size_t t, std::size_t u) const {
        std::size_t idx = order ? (t * u) % order : t * cols + u;
        return tab.data() + idx * static_cast<std::size_t>(C);
    }
};

TwiddleDigits build_digits(const DenseResidueMatrix& W, std::uint64_t modulus, int C) {
    TwiddleDigits td;
    td.cols = W.cols;
    td.C = C;
    td.tab.resize(W.rows * W.cols * static_cast<std::size_t>(C));
    for (std::size_t t = 0; t < W.rows; ++t)
        for (std::size_t u = 0; u < W.cols; ++u) {
            auto d = signed_twiddle_digits(W.at(t, u), modulus, C);
            std::memcpy(td.tab.data() + (t * W.cols + u) * static_cast<std::size_t>(C),
                        d.data(), static_cast<std::size_t>(C));
        }
    return td;
}

TwiddleDigits build_digits(const ResiduePowerTable& W, std::uint64_t modulus, int C) {
    TwiddleDigits td;
    td.cols = W.cols;
    td.order = W.order;
    td.C = C;
    td.tab.resize(W.order * static_cast<std::size_t>(C));
    for (std::size_t p = 0; p < W.order; ++p) {
        auto d = signed_twiddle_digits(W.pow[p], modulus, C);
        std::memcpy(td.tab.data() + p * static_cast<std::size_t>(C), d.data(),
                    static_cast<std::size_t>(C));
    }
    return td;
}

std::uint64_t fold_cells(const std::int64_t* cells, int C, std::uint64_t modulus) {
    __int128 v = 0;
    __int128 scale = 1;
    for (int k = 0; k < 2 * C - 1; ++k) {
        v += scale * cells[k];
        scale *= 256;
    }
    __int128 r = v % static_cast<__int128>(modulus);
    if (r < 0) r += static_cast<__int128>(modulus);
    return static_cast<std::uint64_t>(r);
}

// One chunk of the K dimension for one row, all output coefficients. The
// weight-class accumulators live per output coefficient; contributions arrive
// in ascending K order (coefficient t ascending, limb i ascending). The fp32
// path takes exactly one round-to-nearest-even per multiply-accumulate, which
// is what `float acc += float(product)` compiles to with contraction off.
template <AccumulatorKind Kind>
void run_chunk(const std::uint8_t* limbs, std::size_t t0, std::size_t t1,
               const TwiddleDigits& td, int C, std::uint64_t modulus,
               std::int64_t window, std::uint64_t* out,
               std::uint64_t& flagged, std::uint64_t& overflow) {
    const int ncls = 2 * C - 1;
    float af[16];
    std::int64_t am[16];
    std::int64_t ax[16];
    for (std::size_t u = 0; u < td.cols; ++u) {
        for (int k = 0; k < ncls; ++k) {
            af[k] = 0.0f;
            am[k] = 0;
            ax[k] = 0;
        }
        unsigned over_mask = 0;
        for (std::size_t t = t0; t < t1; ++t) {
            const std::int8_t* dg = td.at(t, u);
            const std::uint8_t* lb = limbs + t * static_cast<std::size_t>(C);
            for (int i = 0; i < C; ++i) {
                const std::int32_t l = lb[i];
                if (l == 0) continue; // zero products leave every model unchanged
                for (int j = 0; j < C; ++j) {
                    const std::int32_t p = l * dg[j];
                    const int k = i + j;
                    ax[k] += p;
                    if constexpr (Kind == AccumulatorKind::Fp32Mantissa) {
                        af[k] += static_cast<float>(p);
                    } else if constexpr (Kind == AccumulatorKind::Int32) {
                        am[k] += p;
                        if (am[k] > window || am[k] < -window) over_mask |= 1u << k;
                    }
                }
            }
        }
        const std::int64_t* cells = ax;
        if constexpr (Kind == AccumulatorKind::Fp32Mantissa) {
            for (int k = 0; k < ncls; ++k) {
                am[k] = static_cast<std::int64_t>(af[k]);
                if (am[k] != ax[k]) ++flagged;
            }
            cells = am;
        } else if constexpr (Kind == AccumulatorKind::Int32) {
            overflow += static_cast<std::uint64_t>(__builtin_popcount(over_mask));
            cells = am;
        }
        std::uint64_t part = fold_cells(cells, C, modulus);
        std::uint64_t s = out[u] + part;
        if (s >= modulus || s < out[u]) s -= modulus; // modulus < 2^32, no wrap
        out[u] = s;
    }
}

template <typename TW>
BatchStagedResult staged_impl(const std::vector<std::vector<std::uint64_t>>& rows,
                              const TW& W, std::uint64_t modulus, const MxuConfig& cfg,
                              std::size_t d_max, bool staging) {
    if (cfg.C < 1 || cfg.C > 7)
        throw DimensionError("limb count out of range for staged evaluation");
    if (modulus < 2 || modulus > 0xFFFFFFFFull)
        throw DomainError("staged evaluation needs a word-sized modulus");
    const std::size_t d_in = W.rows;
    const std::size_t d_out = W.cols;
    for (const auto& r : rows)
        if (r.size() != d_in)
            throw DimensionError("row length does not match twiddle height");
    if (d_max == 0) throw DimensionError("chunk size must be positive");
    if (staging && cfg.accumulator.has_window) {
        if (static_cast<std::int64_t>(d_max) !=
            accumulator_bound(cfg.C, cfg.accumulator.exact_window))
            throw DomainError("staged chunk size must match the accumulator bound");
    }

    TwiddleDigits td = build_digits(W, modulus, cfg.C);
    const std::size_t passes = staging ? (d_in + d_max - 1) / d_max : 1;
    const std::size_t chunk = staging ? d_max : d_in;

    BatchStagedResult res;
    res.passes = passes;
    res.rows.reserve(rows.size());

    std::vector<std::uint8_t> limbs(d_in * static_cast<std::size_t>(cfg.C));
    for (const auto& row : rows) {
        for (std::size_t t = 0; t < d_in; ++t) {
            if (row[t] >= modulus)
                throw DomainError("coefficient residue not reduced mod channel modulus");
            auto ls = decompose_limbs(row[t], cfg.C);
            std::memcpy(limbs.data() + t * static_cast<std::size_t>(cfg.C), ls.data(),
                        static_cast<std::size_t>(cfg.C));
        }
        std::vector<std::uint64_t> out(d_out, 0);
        std::uint64_t flagged = 0, overflow = 0;
        for (std::size_t p = 0; p < passes; ++p) {
            std::size_t t0 = p * chunk;
            std::size_t t1 = std::min(d_in, t0 + chunk);
            switch (cfg.accumulator.kind) {
            case AccumulatorKind::Fp32Mantissa:
                run_chunk<AccumulatorKind::Fp32Mantissa>(
                    limbs.data(), t0, t1, td, cfg.C, modulus,
                    cfg.accumulator.exact_window, out.data(), flagged, overflow);
                break;
            case AccumulatorKind::Int32:
                run_chunk<AccumulatorKind::Int32>(
                    limbs.data(), t0, t1, td, cfg.C, modulus,
                    cfg.accumulator.exact_window, out.data(), flagged, overflow);
                break;
            case AccumulatorKind::ExactOracle:
                run_chunk<AccumulatorKind::ExactOracle>(
                    limbs.data(), t0, t1, td, cfg.C, modulus, 0, out.data(),
                    flagged, overflow);
                break;
            }
        }
        res.flagged_cells += flagged;
        res.overflow_cells += overflow;
        res.row_flagged.push_back(flagged);
        res.row_overflow.push_back(overflow);
        res.rows.push_back(std::move(out));
    }
    return res;
}

} // namespace

std::pair<LimbOperand, SignedTwiddleOperand> pack_operands(
    const std::vector<std::vector<std::uint64_t>>& rows_residues,
    const DenseResidueMatrix& W, std::uint64_t modulus, int C) {
    if (C < 1 || C > 7) throw DimensionError("limb count out of range");
    LimbOperand left;
    left.rows = rows_residues.size();
    left.d = W.rows;
    left.C = C;
    left.data.resize(left.rows * left.d * static_cast<std::size_t>(C));
    for (std::size_t r = 0; r < left.rows; ++r) {
        if (rows_residues[r].size() != W.rows)
            throw DimensionError("row length does not match twiddle height");
        for (std::size_t t = 0; t < W.rows; ++t) {
            auto ls = decompose_limbs(rows_residues[r][t], C);
            std::memcpy(left.data.data() + (r * left.d + t) * static_cast<std::size_t>(C),
                        ls.data(), static_cast<std::size_t>(C));
        }
    }

    SignedTwiddleOperand right;
    right.d_in = W.rows;
    right.d_out = W.cols;
    right.C = C;
    right.digits.assign(right.k_rows() * right.n_cols(), 0);
    const std::size_t ncols = right.n_cols();
    for (std::size_t t = 0; t < W.rows; ++t)
        for (std::size_t u = 0; u < W.cols; ++u) {
            auto dg = signed_twiddle_digits(W.at(t, u), modulus, C);
            for (int i = 0; i < C; ++i)
                for (int j = 0; j < C; ++j) {
                    std::size_t krow = t * static_cast<std::size_t>(C) + static_cast<std::size_t>(i);
                    std::size_t col = u * static_cast<std::size_t>(2 * C - 1) +
                                      static_cast<std::size_t>(i + j);
                    right.digits[krow * ncols + col] = dg[static_cast<std::size_t>(j)];
                }
        }
    // Rows of the right operand hold digit_{k-i} at column (u, k); writing via
    // (i, j) with k = i + j fills exactly that band, one digit per (i, k).
    return {std::move(left), std::move(right)};
}

MatmulResult mxu_matmul(const LimbOperand& left, const SignedTwiddleOperand& right,
                        const MxuConfig& cfg) {
    if (left.C != right.C || left.C != cfg.C)
        throw DimensionError("operand limb counts disagree");
    if (left.d != right.d_in)
        throw DimensionError("inner dimensions disagree");
    const std::size_t K = right.k_rows();
    const std::size_t N = right.n_cols();
    MatmulResult res;
    res.rows = left.rows;
    res.cols = N;
    res.model.assign(left.rows * N, 0);
    res.exact.assign(left.rows * N, 0);

    const std::int64_t window = cfg.accumulator.exact_window;
    for (std::size_t r = 0; r < left.rows; ++r) {
        const std::uint8_t* lrow = left.data.data() + r * K;
        for (std::size_t n = 0; n < N; ++n) {
            float af = 0.0f;
            std::int64_t am = 0;
            std::int64_t ax = 0;
            bool over = false;
            for (std::size_t k = 0; k < K; ++k) {
                const std::int32_t p =
                    static_cast<std::int32_t>(lrow[k]) * right.digits[k * N + n];
                ax += p;
                switch (cfg.accumulator.kind) {
                case AccumulatorKind::Fp32Mantissa:
                    af += static_cast<float>(p);
                    break;
                case AccumulatorKind::Int32:
                    am += p;
                    if (am > window || am < -window) over = true;
                    break;
                case AccumulatorKind::ExactOracle:
                    break;
                }
            }
            std::int64_t model = ax;
            if (cfg.accumulator.kind == AccumulatorKind::Fp32Mantissa)
                model = static_cast<std::int64_t>(af);
            else if (cfg.accumulator.kind == AccumulatorKind::Int32)
                model = am;
            std::size_t idx = r * N + n;
            res.model[idx] = model;
            res.exact[idx] = ax;
            if (model != ax) {
                ++res.report.flagged_cells;
                res.report.flagged_index.push_back(static_cast<std::uint32_t>(idx));
            }
            if (over) {
                ++res.report.overflow_cells;
                res.report.overflow_index.push_back(static_cast<std::uint32_t>(idx));
            }
        }
    }
    return res;
}

std::vector<std::uint64_t> recombine_weight_classes(const MatmulResult& r, int C,
                                                    std::uint64_t modulus) {
    const std::size_t ncls = static_cast<std::size_t>(2 * C - 1);
    if (r.cols % ncls != 0)
        throw DimensionError("column count is not a whole number of weight-class groups");
    const std::size_t d_out = r.cols / ncls;
    std::vector<std::uint64_t> out;
    out.reserve(r.rows * d_out);
    for (std::size_t row = 0; row < r.rows; ++row)
        for (std::size_t u = 0; u < d_out; ++u)
            out.push_back(fold_cells(r.model.data() + row * r.cols + u * ncls, C, modulus));
    return out;
}

StagedResult staged_matrix_ntt(std::span<const std::uint64_t> poly,
                               const DenseResidueMatrix& W, std::uint64_t modulus,
                               const MxuConfig& cfg, std::size_t d_max, bool staging) {
    std::vector<std::vector<std::uint64_t>> rows{
        std::vector<std::uint64_t>(poly.begin(), poly.end())};
    auto b = staged_impl(rows, W, modulus, cfg, d_max, staging);
    return {std::move(b.rows[0]), b.passes, b.flagged_cells, b.overflow_cells};
}

StagedResult staged_matrix_ntt(std::span<const std::uint64_t> poly,
                               const ResiduePowerTable& W, std::uint64_t modulus,
                               const MxuConfig& cfg, std::size_t d_max, bool staging) {
    std::vector<std::vector<std::uint64_t>> rows{
        std::vector<std::uint64_t>(poly.begin(), poly.end())};
    auto b = staged_impl(rows, W, modulus, cfg, d_max, staging);
    return {std::move(b.rows[0]), b.passes, b.flagged_cells, b.overflow_cells};
}

BatchStagedResult staged_matrix_ntt_rows(const std::vector<std::vector<std::uint64_t>>& rows,
                                         const DenseResidueMatrix& W, std::uint64_t modulus,
                                         const MxuConfig& cfg, std::size_t d_max,
                                         bool staging) {
    return staged_impl(rows, W, modulus, cfg, d_max, staging);
}

BatchStagedResult staged_matrix_ntt_rows(const std::vector<std::vector<std::uint64_t>>& rows,
                                         const ResiduePowerTable& W, std::uint64_t modulus,
                                         const MxuConfig& cfg, std::size_t d_max,
                                         bool staging) {
    return staged_impl(rows, W, modulus, cfg, d_max, staging);
}

} // namespace mxntt
