#pragma once

// Mean-square norms and the polynomial functional calculus p -> p(A),
// checked against Fock norms and against the dilation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dilation.hpp"
#include "ensemble.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "kernel.hpp"
#include "linalg.hpp"
#include "ncpoly.hpp"
#include "rng.hpp"

namespace momdil {

inline constexpr double kDefaultCheckTol = 1e-8;
inline constexpr int kMaxEscalations = 3;
inline constexpr std::size_t kEscalationStep = 2;
inline constexpr std::size_t kDefaultFockHeadroom = 6;

/// |E[X X*]|^{1/2}
inline double ms_norm(const RandomOperator& x) {
    if (x.n == 0) return 0.0;
    return std::sqrt(std::max(0.0, lambda_max(x.second_moment())));
}

enum class Hypothesis { verified, not_checked, failed };

inline const char* to_string(Hypothesis h) {
    switch (h) {
    case Hypothesis::verified: return "verified";
    case Hypothesis::not_checked: return "HypothesisNotChecked";
    case Hypothesis::failed: return "NotDominated";
    }
    return "?";
}

struct MsReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0; // rhs - lhs
    double tol = kDefaultCheckTol;
    bool pass = false;
    std::vector<std::size_t> levels; // Fock levels tried, in order
    Hypothesis hypothesis = Hypothesis::not_checked;
    bool capacity_limited = false;   // an escalation step was refused by the word capacity
};

/// Domination of E at word depth >= depth, the standing assumption of the
/// inequality checks.
inline Hypothesis verify_hypothesis(const OperatorEnsemble& e, std::size_t depth, double pd_tol = kDefaultPdTol) {
    const BlockKernel K = assemble_kernel(e, std::max<std::size_t>(depth, 1));
    return pd_order_check(K, pd_tol).dominated ? Hypothesis::verified : Hypothesis::failed;
}

namespace detail {

/// rhs_of(M) is recomputed at M + 2, M + 4, M + 6 while the check fails by
/// less than ten tolerances, stopping early if the word capacity is reached.
template <class Rhs>
MsReport judge_with_escalation(double lhs, Rhs&& rhs_of, std::size_t M, double tol, Hypothesis h,
                               std::size_t capacity) {
    MsReport rep;
    rep.lhs = lhs;
    rep.tol = tol;
    rep.hypothesis = h;
    auto judge = [&](std::size_t level, double rhs) {
        rep.levels.push_back(level);
        rep.rhs = rhs;
        rep.margin = rep.rhs - rep.lhs;
        rep.pass = rep.margin >= -tol * std::max(1.0, rep.rhs);
    };
    judge(M, rhs_of(M, capacity));
    for (int step = 0; step < kMaxEscalations && !rep.pass; ++step) {
        if (rep.margin < -10.0 * tol * std::max(1.0, rep.rhs)) break;
        const std::size_t next = rep.levels.back() + kEscalationStep;
        double rhs = 0.0;
        try {
            rhs = rhs_of(next, capacity);
        } catch (const CapacityExceeded&) {
            rep.capacity_limited = true;
            break;
        }
        judge(next, rhs);
    }
    return rep;
}

} // namespace detail

/// |p(A)|_ms^2 <= |p(L)|^2, with |p(L)| replaced by the Fock-truncated lower bound.
inline MsReport vn_check(const OperatorEnsemble& e, const NcPoly& p, std::size_t M, double tol = kDefaultCheckTol,
                         Hypothesis h = Hypothesis::not_checked, std::size_t capacity = kDefaultWordCapacity) {
    const double ms = ms_norm(apply_random(e, p));
    return detail::judge_with_escalation(
        ms * ms,
        [&](std::size_t level, std::size_t cap) {
            const double v = fock_norm(p, level, cap).value;
            return v * v;
        },
        M, tol, h, capacity);
}

/// |p(A) - q(A)|_ms <= |p(L) - q(L)|.
inline MsReport lipschitz_check(const OperatorEnsemble& e, const NcPoly& p, const NcPoly& q, std::size_t M,
                                double tol = kDefaultCheckTol, Hypothesis h = Hypothesis::not_checked,
                                std::size_t capacity = kDefaultWordCapacity) {
    const NcPoly diff = p - q;
    return detail::judge_with_escalation(
        ms_norm(apply_random(e, diff)),
        [&](std::size_t level, std::size_t cap) { return fock_norm(diff, level, cap).value; }, M, tol, h, capacity);
}

/// Standard basis of C^n followed by `extra` seeded random unit vectors.
inline std::vector<ComplexVector> default_probes(Eigen::Index n, std::uint64_t seed, int extra = 3) {
    std::vector<ComplexVector> probes;
    for (Eigen::Index k = 0; k < n; ++k) probes.push_back(ComplexVector::Unit(n, k));
    Xoshiro256 rng(stream_seed(seed, 0x70726f6265ULL));
    for (int k = 0; k < extra; ++k) probes.push_back(random_unit_vector(rng, n));
    return probes;
}

/// Adjoint images (S~^a)* W of every word up to a fixed depth, cached for
/// repeated evaluation of g(S)* W u.
class DilationProbe {
public:
    DilationProbe(const DilationModel& m, std::size_t depth)
        : model_(&m), words_(m.d(), depth), orbit_(adjoint_orbit(m, depth)) {}

    std::size_t depth() const { return words_.max_length(); }

    /// g(S~)* W u with the coefficient of each word conjugated.
    ExtendedState apply_adjoint(const NcPoly& g, const ComplexVector& u) const {
        if (g.degree() > depth()) throw DepthExceeded("DilationProbe: polynomial degree exceeds probe depth");
        ExtendedState out = embed(*model_, ComplexMatrix::Zero(model_->dimK, 1));
        for (const auto& [w, c] : g.coeffs()) {
            const ExtendedState& s = orbit_[words_.index(w)];
            const cplx cc = std::conj(c);
            out.x.noalias() += cc * (s.x * u);
            for (std::size_t k = 0; k < out.y.size(); ++k) out.y[k].noalias() += cc * (s.y[k] * u);
        }
        return out;
    }

    /// |P^{1/2} g(S)* W u|^2; P is a projection so this is |P g(S)* W u|^2.
    double compressed_square(const NcPoly& g, const ComplexVector& u) const {
        return apply_adjoint(g, u).x.topRows(model_->r).squaredNorm();
    }

private:
    const DilationModel* model_;
    WordTable words_;
    std::vector<ExtendedState> orbit_;
};

/// E |g(A)* u|^2
inline double ms_adjoint_square(const OperatorEnsemble& e, const NcPoly& g, const ComplexVector& u) {
    return apply_random(e, g).adjoint_mean_square(u);
}

struct CompressionResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

inline CompressionResult compression_identity_check(const OperatorEnsemble& e, const DilationProbe& probe,
                                                    const NcPoly& g, const ComplexVector& u) {
    CompressionResult res;
    res.lhs = ms_adjoint_square(e, g, u);
    res.rhs = probe.compressed_square(g, u);
    res.gap = std::abs(res.lhs - res.rhs);
    return res;
}

inline CompressionResult compression_identity_check(const OperatorEnsemble& e, const BlockKernel& K,
                                                    const DilationModel& m, const NcPoly& g, const ComplexVector& u) {
    if (g.degree() > std::min(K.depth(), m.M_fock))
        throw DepthExceeded("compression_identity_check: degree " + std::to_string(g.degree()) + " exceeds min(N, M_fock)");
    return compression_identity_check(e, DilationProbe(m, g.degree()), g, u);
}

struct RadialSeries {
    NcPoly base;
    std::vector<double> r_grid;
    std::vector<ComplexVector> probes;

    void validate() const {
        if (r_grid.empty()) throw ValidationError("RadialSeries: empty r grid");
        for (std::size_t k = 0; k < r_grid.size(); ++k) {
            if (!(r_grid[k] > 0.0 && r_grid[k] < 1.0)) throw RangeError("RadialSeries: grid values must lie in (0, 1)");
            if (k && !(r_grid[k] > r_grid[k - 1])) throw ValidationError("RadialSeries: grid must be strictly increasing");
        }
    }
};

/// r_j = 1 - 2^{-j}, j = 1..count
inline std::vector<double> dyadic_grid(int count) {
    std::vector<double> g;
    for (int j = 1; j <= count; ++j) g.push_back(1.0 - std::ldexp(1.0, -j));
    return g;
}

struct RadialRow {
    double r = 0.0, s = 0.0;
    std::size_t probe = 0;
    double difference = 0.0;   // E |(phi_r(A) - phi_s(A))* u|^2
    double dilation = 0.0;     // |P (phi_r(S) - phi_s(S))* W u|^2
    double identity_gap = 0.0;
};

struct RadialReport {
    std::vector<RadialRow> rows;
    bool cauchy_monotone = true;
    double max_identity_gap = 0.0;
};

inline RadialReport radial_diagnostic(const OperatorEnsemble& e, const BlockKernel& K, const DilationModel& m,
                                      const RadialSeries& series, double monotone_tol = 1e-10) {
    series.validate();
    if (series.base.degree() > std::min(K.depth(), m.M_fock))
        throw DepthExceeded("radial_diagnostic: degree exceeds min(N, M_fock)");
    const DilationProbe probe(m, series.base.degree());
    RadialReport rep;
    for (std::size_t u = 0; u < series.probes.size(); ++u) {
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < series.r_grid.size(); ++k) {
            const double r = series.r_grid[k], s = series.r_grid[k + 1];
            const NcPoly diff = radial_dilate(series.base, r) - radial_dilate(series.base, s);
            RadialRow row{r, s, u, 0.0, 0.0, 0.0};
            row.difference = ms_adjoint_square(e, diff, series.probes[u]);
            row.dilation = probe.compressed_square(diff, series.probes[u]);
            row.identity_gap = std::abs(row.difference - row.dilation);
            if (row.difference > previous + monotone_tol) rep.cauchy_monotone = false;
            previous = row.difference;
            rep.max_identity_gap = std::max(rep.max_identity_gap, row.identity_gap);
            rep.rows.push_back(row);
        }
    }
    return rep;
}

struct MsSotLimit {
    RandomOperator limit;           // the evaluation at r = 1
    std::vector<double> distances;  // E |(phi_{r_max}(A) - limit)* u|^2 per probe
};

inline MsSotLimit ms_sot_limit(const OperatorEnsemble& e, const RadialSeries& series) {
    series.validate();
    MsSotLimit out{apply_random(e, series.base), {}};
    const NcPoly gap = radial_dilate(series.base, series.r_grid.back()) - series.base;
    const RandomOperator x = apply_random(e, gap);
    for (const auto& u : series.probes) out.distances.push_back(x.adjoint_mean_square(u));
    return out;
}

} // namespace momdil
