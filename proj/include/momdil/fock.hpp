#pragma once

// Truncated full Fock space over d letters, left creation operators
// L_i e_g = e_{i g}, and norms of p(L).
//
// fock_norm(p, M) is the operator norm of p(L) restricted to the levels <= M
// with the codomain left untruncated. Writing T = P_M p(L)* p(L) P_M and
// c for the coefficients of p,
//   T(g, g)     = |c|^2
//   T(u h, h)   = t(u) = sum_a conj(c_a) c_{a u}   (u nonempty)
//   T(g, h)     = 0 when neither word is a suffix of the other,
// so T is applied without ever forming the codomain.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "errors.hpp"
#include "linalg.hpp"
#include "ncpoly.hpp"
#include "words.hpp"

namespace momdil {

using SparseComplexMatrix = Eigen::SparseMatrix<cplx>;

inline constexpr Eigen::Index kDenseFockLimit = 800;
inline constexpr int kLanczosMaxIter = 80;

struct TruncatedFock {
    int d = 1;
    std::size_t M = 0;
    WordTable basis;
    Eigen::Index dim = 0;
    std::vector<SparseComplexMatrix> L;

    ComplexMatrix dense(int i) const { return ComplexMatrix(L.at(static_cast<std::size_t>(i - 1))); }
};

inline TruncatedFock build_fock(int d, std::size_t M, std::size_t capacity = kDefaultWordCapacity) {
    WordTable basis(d, M, capacity);
    const auto dim = static_cast<Eigen::Index>(basis.size());
    std::vector<SparseComplexMatrix> L;
    const std::size_t below_top = basis.level_begin(M);
    for (int i = 1; i <= d; ++i) {
        std::vector<Eigen::Triplet<cplx>> trip;
        trip.reserve(below_top);
        for (std::size_t g = 0; g < below_top; ++g)
            trip.emplace_back(static_cast<Eigen::Index>(basis.index(basis[g].prepend(i))), static_cast<Eigen::Index>(g),
                              cplx(1.0, 0.0));
        SparseComplexMatrix li(dim, dim);
        li.setFromTriplets(trip.begin(), trip.end());
        L.push_back(std::move(li));
    }
    return TruncatedFock{d, M, std::move(basis), dim, std::move(L)};
}

/// p(L) on the square truncated space (top levels are lost); adjoint side
/// returns p(L)*. Diagnostics only.
inline ComplexMatrix eval_on_fock(const NcPoly& p, const TruncatedFock& fock, Side side = Side::direct) {
    if (p.alphabet() != fock.d) throw AlphabetMismatch("eval_on_fock: polynomial alphabet differs from Fock space");
    ComplexMatrix out = ComplexMatrix::Zero(fock.dim, fock.dim);
    for (std::size_t g = 0; g < fock.basis.size(); ++g) {
        const Word& gw = fock.basis[g];
        for (const auto& [a, c] : p.coeffs()) {
            if (a.length() + gw.length() > fock.M) continue;
            out(static_cast<Eigen::Index>(fock.basis.index(concat(a, gw))), static_cast<Eigen::Index>(g)) += c;
        }
    }
    if (side == Side::adjoint) out.adjointInPlace();
    return out;
}

namespace detail {

/// T = P_M p(L)* p(L) P_M in the factored form described above.
class FockGram {
public:
    FockGram(const NcPoly& p, std::size_t M, std::size_t capacity)
        : basis_(p.alphabet(), M, capacity), diag_(0.0) {
        const std::size_t deg = p.degree();
        for (const auto& [a, c] : p.coeffs()) diag_ += std::norm(c);
        if (deg == 0 || M == 0) return;
        const WordTable mu_table(p.alphabet(), deg);
        t_.assign(mu_table.size(), cplx(0.0, 0.0));
        // pairs (a, a u): a is a proper prefix of the second word
        for (const auto& [a, ca] : p.coeffs())
            for (const auto& [b, cb] : p.coeffs()) {
                if (b.length() <= a.length()) continue;
                if (!std::equal(a.letters().begin(), a.letters().end(), b.letters().begin())) continue;
                const Word u(p.alphabet(), std::vector<int>(b.letters().begin() + static_cast<std::ptrdiff_t>(a.length()),
                                                            b.letters().end()));
                t_[mu_table.index(u)] += std::conj(ca) * cb;
            }
        // (g, h, u) with g = u h
        const auto d = static_cast<std::size_t>(p.alphabet());
        for (std::size_t g = 1; g < basis_.size(); ++g) {
            const Word& gw = basis_[g];
            const std::size_t len = gw.length();
            std::size_t u_pos = 0; // position of the prefix u inside its level
            for (std::size_t k = 1; k <= std::min(len, deg); ++k) {
                u_pos = u_pos * d + static_cast<std::size_t>(gw[k - 1] - 1);
                const std::size_t u_idx = mu_table.level_begin(k) + u_pos;
                if (t_[u_idx] == cplx(0.0, 0.0)) continue;
                std::size_t h_pos = 0;
                for (std::size_t j = k; j < len; ++j) h_pos = h_pos * d + static_cast<std::size_t>(gw[j] - 1);
                const std::size_t h_idx = basis_.level_begin(len - k) + h_pos;
                links_.push_back({g, h_idx, u_idx});
            }
        }
    }

    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
    double diag() const { return diag_; }

    ComplexVector apply(const ComplexVector& x) const {
        ComplexVector y = diag_ * x;
        for (const Link& l : links_) {
            const cplx t = t_[l.u];
            y(static_cast<Eigen::Index>(l.g)) += t * x(static_cast<Eigen::Index>(l.h));
            y(static_cast<Eigen::Index>(l.h)) += std::conj(t) * x(static_cast<Eigen::Index>(l.g));
        }
        return y;
    }

    ComplexMatrix dense() const {
        ComplexMatrix T = diag_ * ComplexMatrix::Identity(dim(), dim());
        for (const Link& l : links_) {
            const cplx t = t_[l.u];
            T(static_cast<Eigen::Index>(l.g), static_cast<Eigen::Index>(l.h)) += t;
            T(static_cast<Eigen::Index>(l.h), static_cast<Eigen::Index>(l.g)) += std::conj(t);
        }
        return T;
    }

private:
    struct Link {
        std::size_t g, h, u;
    };
    WordTable basis_;
    double diag_;
    std::vector<cplx> t_;
    std::vector<Link> links_;
};

/// Largest Ritz value of a Hermitian operator after at most max_iter Lanczos
/// steps with full reorthogonalization. Never exceeds lambda_max. Stops once
/// the residual bound |beta_k s_k| drops below rel_tol * |ritz|; the Ritz
/// value error is then of order resid^2 / gap.
template <class Apply>
double lanczos_max(Apply&& apply, Eigen::Index dim, int max_iter, double rel_tol = 1e-8) {
    max_iter = static_cast<int>(std::min<Eigen::Index>(max_iter, dim));
    ComplexMatrix Q(dim, max_iter);
    ComplexVector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v(k) = cplx(1.0 / std::sqrt(1.0 + static_cast<double>(k)), 0.0);
    v.normalize();
    std::vector<double> alpha, beta;
    double ritz = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        Q.col(it) = v;
        ComplexVector w = apply(v);
        alpha.push_back(v.dot(w).real());
        const auto basis = Q.leftCols(it + 1);
        // a second Gram-Schmidt pass only when the first one cancelled most of w
        const double before = w.norm();
        w.noalias() -= basis * (basis.adjoint() * w);
        double b = w.norm();
        if (b < 0.7071 * before) {
            w.noalias() -= basis * (basis.adjoint() * w);
            b = w.norm();
        }
        const auto k = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index j = 0; j < k; ++j) {
            tri(j, j) = alpha[static_cast<std::size_t>(j)];
            if (j + 1 < k) tri(j, j + 1) = tri(j + 1, j) = beta[static_cast<std::size_t>(j)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        ritz = es.eigenvalues()(k - 1);
        const double resid = std::abs(b * es.eigenvectors()(k - 1, k - 1));
        if (resid <= rel_tol * std::max(1.0, std::abs(ritz)) || b <= rel_tol * std::max(1.0, std::abs(ritz))) break;
        beta.push_back(b);
        v = w / b;
    }
    return ritz;
}

} // namespace detail

/// Largest Fock level whose truncated space has at most dim_budget words,
/// but never below floor_M. For d = 1 this reaches far past deg p + 6, where
/// the truncated norm of a one-variable polynomial is still visibly short of
/// sup |p| on the circle.
inline std::size_t fock_level_within(int d, std::size_t floor_M, Eigen::Index dim_budget = kDenseFockLimit) {
    std::size_t M = 0;
    while (count_words_upto(d, M + 1) <= static_cast<std::size_t>(dim_budget)) ++M;
    return std::max(M, floor_M);
}

struct FockNorm {
    double value = 0.0;       // |p(L) P_M|, a lower bound of |p(L)|
    double lower_bound = 0.0; // |p(L) e_vacuum| = coefficient l2 norm
    std::size_t M = 0;
    Eigen::Index dim = 0;
    bool iterative = false;   // true when the Lanczos path was used
};

inline FockNorm fock_norm(const NcPoly& p, std::size_t M, std::size_t capacity = kDefaultWordCapacity) {
    const detail::FockGram T(p, M, capacity);
    FockNorm out;
    out.M = M;
    out.dim = T.dim();
    out.lower_bound = coeff_l2_norm(p);
    double top = 0.0;
    if (T.dim() <= kDenseFockLimit) {
        top = psd_margin(T.dense()).lambda_max;
    } else {
        out.iterative = true;
        top = detail::lanczos_max([&](const ComplexVector& x) { return T.apply(x); }, T.dim(), kLanczosMaxIter);
    }
    out.value = std::sqrt(std::max({top, T.diag(), 0.0}));
    return out;
}

} // namespace momdil
