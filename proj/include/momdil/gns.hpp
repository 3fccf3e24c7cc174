#pragma once

// Kolmogorov factorization K(a, b) = V_a* V_b of a block kernel and the
// shift operators B_i V_a = V_{a i} on the factor space H'.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "linalg.hpp"
#include "words.hpp"

namespace momdil {

inline constexpr double kDefaultRankTol = 1e-12;
inline constexpr double kShiftResidualLimit = 1e-6;
inline constexpr double kContractionTol = 1e-8;

struct GnsModel {
    WordTable table;  // W_N
    Eigen::Index n = 0;
    Eigen::Index r = 0;
    ComplexMatrix F;  // r x (m n), G = F* F
    ComplexMatrix Q;  // projection onto span{V_a u : |a| <= N-1}; empty until build_shifts
    std::vector<ComplexMatrix> B;
    double shift_residual = 0.0;
    double rank_tol = kDefaultRankTol;

    int d() const { return table.alphabet(); }
    std::size_t depth() const { return table.max_length(); }
    bool has_shifts() const { return !B.empty(); }

    auto V(std::size_t index) const { return F.middleCols(static_cast<Eigen::Index>(index) * n, n); }
    auto V(const Word& w) const { return V(table.index(w)); }
};

/// G = U diag(lambda) U*; eigenpairs with lambda > rank_tol * lambda_max are
/// kept and F = diag(sqrt(lambda)) U*.
inline GnsModel kolmogorov_factorize(const BlockKernel& K, double rank_tol = kDefaultRankTol) {
    const HermitianEig eig = hermitian_eig(K.G);
    const Eigen::Index dim = eig.values.size();
    GnsModel g{K.table, K.n, 0, ComplexMatrix(0, dim), {}, {}, 0.0, rank_tol};
    if (dim == 0) return g;
    const double top = eig.values(dim - 1);
    if (eig.values(0) < -rank_tol * std::max(top, 0.0) || (top <= 0.0 && eig.values(0) < 0.0))
        throw NotPSD("kolmogorov_factorize: lambda_min = " + std::to_string(eig.values(0)) + " below -rank_tol * lambda_max");
    if (top <= 0.0) return g;
    Eigen::Index kept = 0;
    while (kept < dim && eig.values(dim - 1 - kept) > rank_tol * top) ++kept;
    // largest eigenvalue first
    g.r = kept;
    g.F.resize(kept, dim);
    for (Eigen::Index k = 0; k < kept; ++k) {
        const Eigen::Index src = dim - 1 - k;
        g.F.row(k) = std::sqrt(eig.values(src)) * eig.vectors.col(src).adjoint();
    }
    return g;
}

/// max over word pairs of |V_a* V_b - K(a, b)|_F.
inline double factorization_residual(const GnsModel& g, const BlockKernel& K) {
    const std::size_t m = std::min(g.table.size(), K.words());
    double worst = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            worst = std::max(worst, (g.V(a).adjoint() * g.V(b) - K.block(a, b)).norm());
    return worst;
}

namespace detail {

/// Moore-Penrose inverse with singular values <= cutoff treated as zero.
inline ComplexMatrix pinv(const ComplexMatrix& a, double cutoff) {
    if (a.size() == 0) return ComplexMatrix::Zero(a.cols(), a.rows());
    Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    RealVector inv = RealVector::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cutoff) inv(k) = 1.0 / s(k);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

} // namespace detail

/// Solves B_i F_low = F_shift_i in least squares, where F_low stacks V_a for
/// |a| <= N-1 and F_shift_i stacks V_{a i} in the same order. B_i vanishes on
/// the orthocomplement of range(F_low). Refuses non-dominated kernels.
inline GnsModel build_shifts(GnsModel g, const BlockKernel& K, double pd_tol = kDefaultPdTol) {
    if (K.depth() == 0) throw InsufficientDepth("build_shifts: kernel depth must be >= 1");
    OrderResult order = pd_order_check(K, pd_tol);
    if (!order.dominated) throw NotDominated(std::move(order));

    const int d = g.d();
    const std::size_t m_low = g.table.count_upto(g.depth() - 1);
    const auto low_cols = static_cast<Eigen::Index>(m_low) * g.n;
    const ComplexMatrix F_low = g.F.leftCols(low_cols);

    double smax = 0.0;
    if (g.F.size() > 0) {
        Eigen::BDCSVD<ComplexMatrix> svd(g.F);
        smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    const ComplexMatrix F_low_pinv = detail::pinv(F_low, std::sqrt(g.rank_tol) * smax);
    g.Q = F_low * F_low_pinv;
    g.Q = (g.Q + g.Q.adjoint()) * 0.5;

    g.B.clear();
    g.shift_residual = 0.0;
    for (int i = 1; i <= d; ++i) {
        ComplexMatrix F_shift(g.r, low_cols);
        for (std::size_t a = 0; a < m_low; ++a)
            F_shift.middleCols(static_cast<Eigen::Index>(a) * g.n, g.n) = g.V(g.table[a].append(i));
        ComplexMatrix Bi = F_shift * F_low_pinv;
        for (std::size_t a = 0; a < m_low; ++a) {
            const double res = (Bi * F_low.middleCols(static_cast<Eigen::Index>(a) * g.n, g.n) -
                                F_shift.middleCols(static_cast<Eigen::Index>(a) * g.n, g.n))
                                   .norm();
            g.shift_residual = std::max(g.shift_residual, res);
        }
        g.B.push_back(std::move(Bi));
    }
    if (g.shift_residual > kShiftResidualLimit)
        throw IllConditioned("build_shifts: shift relation residual " + std::to_string(g.shift_residual) +
                             " exceeds " + std::to_string(kShiftResidualLimit));
    return g;
}

struct ContractionResult {
    double lambda_max = 0.0;
    bool pass = false;
};

inline ContractionResult column_contraction_check(const GnsModel& g, double tol = kContractionTol) {
    if (!g.has_shifts()) throw ValidationError("column_contraction_check: shifts not built");
    if (g.r == 0) return {0.0, true};
    ComplexMatrix sum = ComplexMatrix::Zero(g.r, g.r);
    for (const auto& b : g.B) sum += b.adjoint() * b;
    const double lm = lambda_max(sum);
    return {lm, lm <= 1.0 + tol};
}

/// max over |a| <= N of |V_a - B^{reverse a} V_e|_F.
inline double cyclicity_residual(const GnsModel& g) {
    if (!g.has_shifts()) throw ValidationError("cyclicity_residual: shifts not built");
    std::vector<ComplexMatrix> applied(g.table.size());
    applied[0] = g.V(std::size_t{0});
    double worst = 0.0;
    for (std::size_t k = 1; k < g.table.size(); ++k) {
        const Word& w = g.table[k];
        // V_{a i} = B_i V_a
        applied[k] = g.B[static_cast<std::size_t>(w.back() - 1)] * applied[g.table.index(w.parent())];
        worst = std::max(worst, (applied[k] - g.V(k)).norm());
    }
    return worst;
}

} // namespace momdil
