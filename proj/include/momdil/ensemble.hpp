#pragma once

// Finitely supported random operator tuples. Every expectation is an exact
// weighted sum over scenarios, always reduced in scenario-index order.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "ncpoly.hpp"
#include "rng.hpp"
#include "words.hpp"

namespace momdil {

struct Scenario {
    double weight = 0.0;
    std::vector<ComplexMatrix> ops; // A_1(omega), ..., A_d(omega)
};

inline constexpr double kWeightSumTol = 1e-12;

class OperatorEnsemble {
public:
    /// Validates shapes, positivity of weights and sum(weights) == 1 within 1e-12.
    OperatorEnsemble(int d, Eigen::Index n, std::vector<Scenario> scenarios, std::string label = {})
        : d_(d), n_(n), scenarios_(std::move(scenarios)), label_(std::move(label)) {
        if (d < 1) throw ValidationError("ensemble: d must be >= 1");
        if (n < 1) throw ValidationError("ensemble: n must be >= 1");
        if (scenarios_.empty()) throw ValidationError("ensemble: no scenarios");
        double total = 0.0;
        for (std::size_t k = 0; k < scenarios_.size(); ++k) {
            const Scenario& s = scenarios_[k];
            if (!(s.weight > 0.0) || !std::isfinite(s.weight))
                throw ValidationError("ensemble: scenario " + std::to_string(k) + " has nonpositive weight");
            if (static_cast<int>(s.ops.size()) != d)
                throw ValidationError("ensemble: scenario " + std::to_string(k) + " has " + std::to_string(s.ops.size()) +
                                      " operators, expected " + std::to_string(d));
            for (const auto& a : s.ops) {
                if (a.rows() != n || a.cols() != n)
                    throw ValidationError("ensemble: scenario " + std::to_string(k) + " operator is not " +
                                          std::to_string(n) + "x" + std::to_string(n));
                if (!a.allFinite()) throw ValidationError("ensemble: non-finite entry in scenario " + std::to_string(k));
            }
            total += s.weight;
        }
        if (std::abs(total - 1.0) > kWeightSumTol)
            throw ValidationError("ensemble: weights sum to " + std::to_string(total) + ", expected 1");
    }

    int d() const noexcept { return d_; }
    Eigen::Index n() const noexcept { return n_; }
    const std::vector<Scenario>& scenarios() const noexcept { return scenarios_; }
    std::size_t size() const noexcept { return scenarios_.size(); }
    const std::string& label() const noexcept { return label_; }

private:
    int d_;
    Eigen::Index n_;
    std::vector<Scenario> scenarios_;
    std::string label_;
};

/// A random operator sharing the probability space of a parent ensemble:
/// one matrix per scenario, weights copied in order.
struct RandomOperator {
    Eigen::Index n = 0;
    std::vector<double> weights;
    std::vector<ComplexMatrix> values;

    static RandomOperator constant(const OperatorEnsemble& e, const ComplexMatrix& value) {
        RandomOperator x{e.n(), {}, {}};
        for (const auto& s : e.scenarios()) {
            x.weights.push_back(s.weight);
            x.values.push_back(value);
        }
        return x;
    }

    /// E[X X*]
    ComplexMatrix second_moment() const {
        ComplexMatrix m = ComplexMatrix::Zero(n, n);
        for (std::size_t k = 0; k < values.size(); ++k) m += weights[k] * (values[k] * values[k].adjoint());
        return m;
    }

    /// E ||X* u||^2
    double adjoint_mean_square(const ComplexVector& u) const {
        double s = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) s += weights[k] * (values[k].adjoint() * u).squaredNorm();
        return s;
    }
};

inline RandomOperator linear_combination(cplx a, const RandomOperator& x, cplx b, const RandomOperator& y) {
    if (x.values.size() != y.values.size() || x.n != y.n)
        throw DimensionMismatch("linear_combination: random operators live on different spaces");
    RandomOperator r{x.n, x.weights, {}};
    r.values.reserve(x.values.size());
    for (std::size_t k = 0; k < x.values.size(); ++k) r.values.push_back(a * x.values[k] + b * y.values[k]);
    return r;
}

/// E[A^alpha (A^beta)*] as an exact weighted sum.
inline ComplexMatrix word_moment(const OperatorEnsemble& e, const Word& alpha, const Word& beta) {
    if (alpha.alphabet() != e.d() || beta.alphabet() != e.d())
        throw AlphabetMismatch("word_moment: word alphabet differs from ensemble d");
    ComplexMatrix m = ComplexMatrix::Zero(e.n(), e.n());
    for (const auto& s : e.scenarios()) {
        detail::WordProducts prod(s.ops, e.n());
        const ComplexMatrix& pa = prod.get(alpha);
        const ComplexMatrix& pb = prod.get(beta);
        m += s.weight * pa.lazyProduct(pb.adjoint());
    }
    return m;
}

/// omega -> p(A(omega)).
inline RandomOperator apply_random(const OperatorEnsemble& e, const NcPoly& p) {
    if (p.alphabet() != e.d()) throw AlphabetMismatch("apply_random: polynomial alphabet differs from ensemble d");
    RandomOperator x{e.n(), {}, {}};
    for (const auto& s : e.scenarios()) {
        x.weights.push_back(s.weight);
        x.values.push_back(evaluate_poly(p, s.ops));
    }
    return x;
}

/// Scenario-wise row contractions: A_i = c G_i with G_i Ginibre and c chosen
/// so that lambda_max(sum_i A_i A_i*) = 1 - slack in every scenario.
inline OperatorEnsemble gen_row_contraction_ensemble(int d, Eigen::Index n, std::size_t k_scenarios, std::uint64_t seed,
                                                     double slack) {
    if (d < 1 || n < 1 || k_scenarios < 1) throw ValidationError("gen_row_contraction_ensemble: sizes must be positive");
    if (!(slack > 0.0 && slack < 1.0)) throw RangeError("gen_row_contraction_ensemble: slack must lie in (0, 1)");
    std::vector<Scenario> scenarios;
    scenarios.reserve(k_scenarios);
    for (std::size_t k = 0; k < k_scenarios; ++k) {
        Xoshiro256 rng(stream_seed(seed, k));
        Scenario s{1.0 / static_cast<double>(k_scenarios), {}};
        ComplexMatrix row_gram = ComplexMatrix::Zero(n, n);
        for (int i = 0; i < d; ++i) {
            s.ops.push_back(ginibre(rng, n, n));
            row_gram += s.ops.back() * s.ops.back().adjoint();
        }
        const double c = std::sqrt((1.0 - slack) / lambda_max(row_gram));
        for (auto& a : s.ops) a *= c;
        scenarios.push_back(std::move(s));
    }
    // equal weights 1/k may not sum to exactly 1 in binary64; fix the last one
    double head = 0.0;
    for (std::size_t k = 0; k + 1 < scenarios.size(); ++k) head += scenarios[k].weight;
    scenarios.back().weight = 1.0 - head;
    return OperatorEnsemble(d, n, std::move(scenarios),
                            "row_contraction(d=" + std::to_string(d) + ",n=" + std::to_string(n) +
                                ",k=" + std::to_string(k_scenarios) + ",seed=" + std::to_string(seed) + ")");
}

/// Scenario-wise coisometries: the first n rows R of a Haar unitary on C^{dn},
/// split into d column blocks A_i, so that sum_i A_i A_i* = R R* = I_n.
inline OperatorEnsemble gen_coisometry_ensemble(int d, Eigen::Index n, std::size_t k_scenarios, std::uint64_t seed) {
    if (d < 1 || n < 1 || k_scenarios < 1) throw ValidationError("gen_coisometry_ensemble: sizes must be positive");
    std::vector<Scenario> scenarios;
    scenarios.reserve(k_scenarios);
    for (std::size_t k = 0; k < k_scenarios; ++k) {
        Xoshiro256 rng(stream_seed(seed, k));
        const ComplexMatrix u = haar_unitary(rng, static_cast<Eigen::Index>(d) * n);
        Scenario s{1.0 / static_cast<double>(k_scenarios), {}};
        for (int i = 0; i < d; ++i) s.ops.push_back(u.block(0, static_cast<Eigen::Index>(i) * n, n, n));
        scenarios.push_back(std::move(s));
    }
    double head = 0.0;
    for (std::size_t k = 0; k + 1 < scenarios.size(); ++k) head += scenarios[k].weight;
    scenarios.back().weight = 1.0 - head;
    return OperatorEnsemble(d, n, std::move(scenarios),
                            "coisometry(d=" + std::to_string(d) + ",n=" + std::to_string(n) +
                                ",k=" + std::to_string(k_scenarios) + ",seed=" + std::to_string(seed) + ")");
}

/// Deterministic ensemble (a single scenario of weight 1).
inline OperatorEnsemble deterministic_ensemble(std::vector<ComplexMatrix> ops, std::string label = "deterministic") {
    if (ops.empty()) throw ValidationError("deterministic_ensemble: empty tuple");
    const Eigen::Index n = ops.front().rows();
    const int d = static_cast<int>(ops.size());
    return OperatorEnsemble(d, n, {Scenario{1.0, std::move(ops)}}, std::move(label));
}

} // namespace momdil
