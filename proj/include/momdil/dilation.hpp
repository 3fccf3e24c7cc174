#pragma once

// Truncated isometric dilation of the row contraction T_i = B_i* and the
// identities it realizes.
//
// Coordinates of K: [H' (r)] then, for each Fock word g in graded order, a
// block of q = dim(defect space) coordinates at r + index(g) q. S_i sends
//   h            -> T_i h + e_vacuum (x) C_i h,   C_i = D* Delta iota_i
//   e_g (x) xi   -> e_{i g} (x) xi                (|g| < M_fock)
// so (S_1, ..., S_d) is a row isometry below the top Fock level and H' is
// co-invariant: S_i* J = J B_i.
//
// A row isometry is completed to a Cuntz family by attaching copies of the
// wandering space R = I - sum_i S_i S_i* to the first letter:
//   S~_1*(x, y_1, y_2, ...) = (S_1* x, R x, y_1, y_2, ...)
//   S~_j*(x, y)             = (S_j* x, 0, 0, ...)        j >= 2
// which is isometric with sum_i S~_i S~_i* = I. Only adjoint chains
// (S~^b)* W are ever evaluated, and for |b| <= M_fock they are exact, so the
// y-chain is kept as long as the deepest chain needs and no longer.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "errors.hpp"
#include "fock.hpp"
#include "gns.hpp"
#include "kernel.hpp"
#include "linalg.hpp"
#include "words.hpp"

namespace momdil {

inline constexpr double kNotContractiveTol = 1e-10;
inline constexpr double kDefectRankTol = 1e-12;
inline constexpr Eigen::Index kMaxDilationDim = 2000000;

struct DilationModel {
    GnsModel gns;
    std::size_t M_fock = 0;
    Eigen::Index r = 0;
    Eigen::Index q = 0;                 // defect_dim
    ComplexMatrix defect_basis;         // (d r) x q, orthonormal basis of range(Delta)
    std::vector<ComplexMatrix> T;       // T_i = B_i*
    std::vector<ComplexMatrix> C;       // q x r
    WordTable fock;                     // Fock words of length <= M_fock
    Eigen::Index dimK = 0;
    std::vector<SparseComplexMatrix> S;
    std::vector<SparseComplexMatrix> S_adj;
    SparseComplexMatrix R;              // I - sum_i S_i S_i*
    ComplexMatrix W;                    // dimK x n, J V_e
    std::size_t chain_length = 0;       // length of the attached wandering chain

    int d() const { return gns.d(); }
    Eigen::Index n() const { return gns.n; }

    /// Orthogonal projection onto the embedded H', as a dense matrix.
    ComplexMatrix P() const {
        ComplexMatrix p = ComplexMatrix::Zero(dimK, dimK);
        p.topLeftCorner(r, r).setIdentity();
        return p;
    }

    /// (levels <= M_fock - 1): H' plus every Fock block below the top level.
    ComplexMatrix Pi_low() const {
        ComplexMatrix p = ComplexMatrix::Zero(dimK, dimK);
        const Eigen::Index low = r + static_cast<Eigen::Index>(fock.level_begin(M_fock)) * q;
        p.topLeftCorner(low, low).setIdentity();
        return p;
    }

    Eigen::Index fock_offset(std::size_t word_index) const { return r + static_cast<Eigen::Index>(word_index) * q; }
};

inline DilationModel build_dilation(const GnsModel& g, std::size_t M_fock,
                                    std::size_t capacity = kDefaultWordCapacity) {
    if (!g.has_shifts()) throw ValidationError("build_dilation: shifts not built");
    const int d = g.d();
    const Eigen::Index r = g.r;
    DilationModel m{g, M_fock, r, 0, {}, {}, {}, WordTable(d, M_fock, capacity), 0, {}, {}, {}, {}, 0};

    for (const auto& b : g.B) m.T.push_back(b.adjoint());

    // I - T* T on H'^d, block (i, j) = delta_ij I - B_i B_j*
    const Eigen::Index dr = static_cast<Eigen::Index>(d) * r;
    ComplexMatrix defect = ComplexMatrix::Identity(dr, dr);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            defect.block(i * r, j * r, r, r) -= g.B[static_cast<std::size_t>(i)] * g.B[static_cast<std::size_t>(j)].adjoint();
    ComplexMatrix delta = ComplexMatrix::Zero(dr, dr);
    if (dr > 0) {
        const HermitianEig eig = hermitian_eig(defect);
        if (eig.values(0) < -kNotContractiveTol)
            throw NotContractive("build_dilation: I - T*T has eigenvalue " + std::to_string(eig.values(0)));
        const RealVector root = eig.values.cwiseMax(0.0).cwiseSqrt();
        delta = eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
        // cut on the eigenvalues of I - T*T, whose norm is at most one; a cut on
        // the square roots would keep rounding noise of a coisometric T
        const double cut = kDefectRankTol * std::max(1.0, eig.values(dr - 1));
        std::vector<Eigen::Index> keep;
        for (Eigen::Index k = 0; k < dr; ++k)
            if (eig.values(k) > cut) keep.push_back(k);
        m.q = static_cast<Eigen::Index>(keep.size());
        m.defect_basis.resize(dr, m.q);
        for (Eigen::Index k = 0; k < m.q; ++k) m.defect_basis.col(k) = eig.vectors.col(keep[static_cast<std::size_t>(k)]);
    } else {
        m.defect_basis.resize(0, 0);
    }
    const Eigen::Index q = m.q;
    for (int i = 0; i < d; ++i) m.C.push_back(m.defect_basis.adjoint() * delta.middleCols(i * r, r));

    const auto fock_dim = static_cast<Eigen::Index>(m.fock.size());
    if (q > 0 && fock_dim > (kMaxDilationDim - r) / q)
        throw CapacityExceeded("build_dilation: dilation space exceeds " + std::to_string(kMaxDilationDim));
    m.dimK = r + fock_dim * q;

    const std::size_t top_begin = m.fock.level_begin(M_fock);
    for (int i = 1; i <= d; ++i) {
        std::vector<Eigen::Triplet<cplx>> trip;
        const ComplexMatrix& Ti = m.T[static_cast<std::size_t>(i - 1)];
        const ComplexMatrix& Ci = m.C[static_cast<std::size_t>(i - 1)];
        for (Eigen::Index c = 0; c < r; ++c) {
            for (Eigen::Index a = 0; a < r; ++a)
                if (Ti(a, c) != cplx(0.0, 0.0)) trip.emplace_back(a, c, Ti(a, c));
            for (Eigen::Index a = 0; a < q; ++a)
                if (Ci(a, c) != cplx(0.0, 0.0)) trip.emplace_back(m.fock_offset(0) + a, c, Ci(a, c));
        }
        for (std::size_t gi = 0; gi < top_begin; ++gi) {
            const std::size_t target = m.fock.index(m.fock[gi].prepend(i));
            for (Eigen::Index a = 0; a < q; ++a) trip.emplace_back(m.fock_offset(target) + a, m.fock_offset(gi) + a, 1.0);
        }
        SparseComplexMatrix Si(m.dimK, m.dimK);
        Si.setFromTriplets(trip.begin(), trip.end());
        Si.makeCompressed();
        m.S_adj.push_back(SparseComplexMatrix(Si.adjoint()));
        m.S.push_back(std::move(Si));
    }

    SparseComplexMatrix I(m.dimK, m.dimK);
    I.setIdentity();
    SparseComplexMatrix range_sum(m.dimK, m.dimK);
    for (int i = 0; i < d; ++i) range_sum += SparseComplexMatrix(m.S[static_cast<std::size_t>(i)] * m.S_adj[static_cast<std::size_t>(i)]);
    m.R = I - range_sum;
    m.R.prune(cplx(0.0, 0.0));

    m.W = ComplexMatrix::Zero(m.dimK, g.n);
    m.W.topRows(r) = g.V(std::size_t{0});
    m.chain_length = std::max(g.depth(), M_fock) + 1;
    return m;
}

/// A vector (or block of vectors) of K plus the attached wandering chain.
struct ExtendedState {
    ComplexMatrix x;
    std::vector<ComplexMatrix> y;

    /// <this, other> summed over every component.
    ComplexMatrix inner(const ExtendedState& o) const {
        ComplexMatrix g = x.adjoint() * o.x;
        for (std::size_t k = 0; k < y.size(); ++k) g += y[k].adjoint() * o.y[k];
        return g;
    }
    /// <P this, P other>, P the projection onto the embedded H'.
    ComplexMatrix inner_p(const ExtendedState& o, Eigen::Index r) const {
        return x.topRows(r).adjoint() * o.x.topRows(r);
    }
};

/// S~_i* applied to a state.
inline ExtendedState cuntz_adjoint(const DilationModel& m, int i, const ExtendedState& s) {
    ExtendedState out;
    out.x = m.S_adj[static_cast<std::size_t>(i - 1)] * s.x;
    out.y.assign(m.chain_length, ComplexMatrix::Zero(m.dimK, s.x.cols()));
    if (i == 1) {
        out.y[0] = m.R * s.x;
        for (std::size_t k = 1; k < m.chain_length; ++k) out.y[k] = s.y[k - 1];
    }
    return out;
}

inline ExtendedState embed(const DilationModel& m, const ComplexMatrix& x) {
    return ExtendedState{x, std::vector<ComplexMatrix>(m.chain_length, ComplexMatrix::Zero(m.dimK, x.cols()))};
}

/// (S~^b)* W for every word b with |b| <= depth, in graded order:
/// (S~^{b i})* = S~_i* (S~^b)*.
inline std::vector<ExtendedState> adjoint_orbit(const DilationModel& m, std::size_t depth) {
    if (depth > m.M_fock)
        throw DepthExceeded("adjoint_orbit: depth " + std::to_string(depth) + " exceeds Fock level " +
                            std::to_string(m.M_fock));
    const WordTable words(m.d(), depth);
    std::vector<ExtendedState> orbit;
    orbit.reserve(words.size());
    orbit.push_back(embed(m, m.W));
    for (std::size_t k = 1; k < words.size(); ++k)
        orbit.push_back(cuntz_adjoint(m, words[k].back(), orbit[words.index(words[k].parent())]));
    return orbit;
}

struct PairResidual {
    std::string alpha, beta;
    double residual = 0.0;
};

struct RealizationResult {
    double max_residual = 0.0;
    std::vector<PairResidual> pairs;
};

/// max |K(a, b) - W* S^a P (S^b)* W|_F over |a|, |b| <= depth.
inline RealizationResult realization_check(const BlockKernel& K, const DilationModel& m, std::size_t depth) {
    if (depth > K.depth() || depth > m.M_fock)
        throw DepthExceeded("realization_check: depth " + std::to_string(depth) + " exceeds kernel or Fock depth");
    const auto orbit = adjoint_orbit(m, depth);
    const WordTable words(m.d(), depth);
    RealizationResult res;
    for (std::size_t a = 0; a < words.size(); ++a)
        for (std::size_t b = 0; b < words.size(); ++b) {
            const double e = (K.block(a, b) - orbit[a].inner_p(orbit[b], m.r)).norm();
            res.pairs.push_back({render(words[a]), render(words[b]), e});
            res.max_residual = std::max(res.max_residual, e);
        }
    return res;
}

struct DominationIdentityResult {
    double margin = 0.0;
    Eigen::Index span_dim = 0;
    bool pass = false;
};

/// lambda_min of Y* (P - sum_i S_i P S_i*) Y over an orthonormal basis Y of
/// span{(S^g)* W u : |g| <= gamma_depth}.
inline DominationIdentityResult domination_identity_check(const DilationModel& m, const BlockKernel& K,
                                                          std::size_t gamma_depth, double tol = 1e-8) {
    if (K.depth() == 0 || gamma_depth > K.depth() - 1 || gamma_depth > m.M_fock)
        throw DepthExceeded("domination_identity_check: gamma depth " + std::to_string(gamma_depth) + " too large");
    const auto orbit = adjoint_orbit(m, gamma_depth);
    const std::size_t blocks = m.chain_length + 1;
    const Eigen::Index cols = static_cast<Eigen::Index>(orbit.size()) * m.n();
    ComplexMatrix stacked(static_cast<Eigen::Index>(blocks) * m.dimK, cols);
    for (std::size_t k = 0; k < orbit.size(); ++k) {
        auto col = stacked.middleCols(static_cast<Eigen::Index>(k) * m.n(), m.n());
        col.topRows(m.dimK) = orbit[k].x;
        for (std::size_t j = 0; j < m.chain_length; ++j)
            col.middleRows(static_cast<Eigen::Index>(j + 1) * m.dimK, m.dimK) = orbit[k].y[j];
    }
    const ComplexMatrix Y = orthonormal_basis(stacked, 1e-10);
    DominationIdentityResult res;
    res.span_dim = Y.cols();
    if (Y.cols() == 0) {
        res.pass = true;
        return res;
    }
    ExtendedState ys{Y.topRows(m.dimK), {}};
    for (std::size_t j = 0; j < m.chain_length; ++j)
        ys.y.push_back(Y.middleRows(static_cast<Eigen::Index>(j + 1) * m.dimK, m.dimK));
    ComplexMatrix form = ys.inner_p(ys, m.r);
    for (int i = 1; i <= m.d(); ++i) {
        const ExtendedState si = cuntz_adjoint(m, i, ys);
        form -= si.inner_p(si, m.r);
    }
    res.margin = psd_margin((form + form.adjoint()) * 0.5).lambda_min;
    res.pass = res.margin >= -tol;
    return res;
}

struct EqualityCaseResult {
    double sigma_gap = 0.0;
    double a5_residual = 0.0;
    double a1_residual = 0.0;
};

/// sigma_gap = max block |K - K_sigma|_F on W_depth; a5 = max |K(a, b) - W* S^a (S^b)* W|_F.
inline EqualityCaseResult equality_case_check(const BlockKernel& K, const DilationModel& m, std::size_t depth) {
    if (K.depth() == 0 || m.M_fock == 0 || depth > K.depth() - 1 || depth > m.M_fock - 1)
        throw DepthExceeded("equality_case_check: depth " + std::to_string(depth) + " too large");
    const BlockKernel sigma = assemble_sigma(K);
    const WordTable words(m.d(), depth);
    const auto orbit = adjoint_orbit(m, depth);
    EqualityCaseResult res;
    for (std::size_t a = 0; a < words.size(); ++a)
        for (std::size_t b = 0; b < words.size(); ++b) {
            res.sigma_gap = std::max(res.sigma_gap, (K.block(a, b) - sigma.block(a, b)).norm());
            res.a5_residual = std::max(res.a5_residual, (K.block(a, b) - orbit[a].inner(orbit[b])).norm());
            res.a1_residual = std::max(res.a1_residual, (K.block(a, b) - orbit[a].inner_p(orbit[b], m.r)).norm());
        }
    return res;
}

struct CuntzResidual {
    double isometry_residual = 0.0;
    long completeness_defect_rank = 0;
    double defect_idempotence = 0.0; // |R^2 - R|_F
    bool degenerate = false;         // no defect space
};

inline CuntzResidual cuntz_residual(const DilationModel& m) {
    CuntzResidual res;
    const ComplexMatrix pi_low = m.Pi_low();
    for (int i = 0; i < m.d(); ++i)
        for (int j = 0; j < m.d(); ++j) {
            ComplexMatrix prod = ComplexMatrix(m.S_adj[static_cast<std::size_t>(i)] * m.S[static_cast<std::size_t>(j)]);
            if (i == j) prod -= pi_low;
            res.isometry_residual = std::max(res.isometry_residual, prod.norm());
        }
    double range_trace = 0.0;
    for (const auto& s : m.S) range_trace += s.squaredNorm();
    res.completeness_defect_rank = std::lround(static_cast<double>(m.dimK) - range_trace);
    res.defect_idempotence = SparseComplexMatrix(m.R * m.R - m.R).norm();
    res.degenerate = m.q == 0;
    return res;
}

/// max over |a| <= depth of |J* (S^{reverse a})* J - B^a|, where
/// (S^{reverse a})* = S_{a_1}* ... S_{a_k}*.
inline double compression_residual(const DilationModel& m, std::size_t depth) {
    const WordTable words(m.d(), depth);
    std::vector<ComplexMatrix> b_pow(words.size());
    b_pow[0] = ComplexMatrix::Identity(m.r, m.r);
    ComplexMatrix J = ComplexMatrix::Zero(m.dimK, m.r);
    J.topRows(m.r).setIdentity();
    double worst = 0.0;
    for (std::size_t k = 1; k < words.size(); ++k) {
        const Word& w = words[k];
        b_pow[k] = b_pow[words.index(w.parent())] * m.gns.B[static_cast<std::size_t>(w.back() - 1)];
        ComplexMatrix chain = J;
        for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it)
            chain = m.S_adj[static_cast<std::size_t>(*it - 1)] * chain;
        worst = std::max(worst, operator_norm(ComplexMatrix(chain.topRows(m.r)) - b_pow[k]));
    }
    return worst;
}

/// max_i |(I - P) S_i* P|.
inline double coinvariance_residual(const DilationModel& m) {
    double worst = 0.0;
    for (const auto& sa : m.S_adj) {
        ComplexMatrix block = ComplexMatrix(sa.leftCols(m.r));
        worst = std::max(worst, operator_norm(ComplexMatrix(block.bottomRows(m.dimK - m.r))));
    }
    return worst;
}

} // namespace momdil
