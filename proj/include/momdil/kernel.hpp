#pragma once

// Block Gram matrices of the moment kernel K(a, b) = E[A^a (A^b)*] and the
// shifted kernel K_sigma(a, b) = sum_i K(a i, b i), both indexed by graded
// word tables, plus the positivity and domination checks.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ensemble.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "scenario_io.hpp"
#include "words.hpp"

namespace momdil {

inline constexpr double kDefaultPdTol = 1e-10;

struct BlockKernel {
    WordTable table;
    Eigen::Index n = 0;
    ComplexMatrix G;

    std::size_t depth() const { return table.max_length(); }
    int alphabet() const { return table.alphabet(); }
    std::size_t words() const { return table.size(); }

    auto block(const Word& a, const Word& b) const {
        return G.block(static_cast<Eigen::Index>(table.index(a)) * n, static_cast<Eigen::Index>(table.index(b)) * n, n, n);
    }
    auto block(std::size_t ia, std::size_t ib) const {
        return G.block(static_cast<Eigen::Index>(ia) * n, static_cast<Eigen::Index>(ib) * n, n, n);
    }
};

namespace detail {

/// A^w for every w in the table, by prefix recursion A^{w i} = A^w A_i.
inline std::vector<ComplexMatrix> table_products(const WordTable& table, const std::vector<ComplexMatrix>& ops,
                                                 Eigen::Index n) {
    std::vector<ComplexMatrix> prod;
    prod.reserve(table.size());
    prod.push_back(ComplexMatrix::Identity(n, n));
    for (std::size_t k = 1; k < table.size(); ++k) {
        const Word& w = table[k];
        prod.push_back(prod[table.index(w.parent())] * ops[static_cast<std::size_t>(w.back() - 1)]);
    }
    return prod;
}

} // namespace detail

/// Each block is reduced over scenarios in index order with the same
/// fixed-size products, so a shallower assembly is bitwise the leading block
/// of a deeper one. Lower blocks are exact adjoints of upper blocks.
inline BlockKernel assemble_kernel(const OperatorEnsemble& e, std::size_t N,
                                   std::size_t capacity = kDefaultWordCapacity) {
    WordTable table(e.d(), N, capacity);
    const Eigen::Index n = e.n();
    const std::size_t m = table.size();
    const auto dim = static_cast<Eigen::Index>(m) * n;
    if (static_cast<double>(dim) * static_cast<double>(dim) > 4.0e8)
        throw CapacityExceeded("assemble_kernel: Gram matrix of size " + std::to_string(dim) + " is too large");

    std::vector<std::vector<ComplexMatrix>> products;
    products.reserve(e.size());
    for (const auto& s : e.scenarios()) products.push_back(detail::table_products(table, s.ops, n));

    ComplexMatrix G(dim, dim);
    ComplexMatrix acc(n, n);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            for (std::size_t k = 0; k < e.size(); ++k) {
                const double w = e.scenarios()[k].weight;
                const ComplexMatrix term = w * products[k][a].lazyProduct(products[k][b].adjoint());
                if (k == 0) acc = term;
                else acc += term;
            }
            if (a == b) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    acc(i, i) = cplx(acc(i, i).real(), 0.0);
                    for (Eigen::Index j = i + 1; j < n; ++j) acc(j, i) = std::conj(acc(i, j));
                }
            }
            const auto ra = static_cast<Eigen::Index>(a) * n;
            const auto rb = static_cast<Eigen::Index>(b) * n;
            G.block(ra, rb, n, n) = acc;
            if (a != b) G.block(rb, ra, n, n) = acc.adjoint();
        }
    }
    return BlockKernel{std::move(table), n, std::move(G)};
}

/// Leading principal block submatrix over W_depth.
inline BlockKernel restrict_kernel(const BlockKernel& K, std::size_t depth) {
    if (depth > K.depth()) throw InsufficientDepth("restrict_kernel: requested depth exceeds kernel depth");
    WordTable table(K.alphabet(), depth, std::max(K.words(), std::size_t{1}));
    const auto dim = static_cast<Eigen::Index>(table.size()) * K.n;
    ComplexMatrix G = K.G.topLeftCorner(dim, dim);
    return BlockKernel{std::move(table), K.n, std::move(G)};
}

/// K_sigma over W_{N-1}, read off the blocks of K over W_N.
inline BlockKernel assemble_sigma(const BlockKernel& K) {
    if (K.depth() == 0) throw InsufficientDepth("assemble_sigma: kernel depth must be >= 1");
    const int d = K.alphabet();
    const Eigen::Index n = K.n;
    WordTable low(d, K.depth() - 1, K.words());
    const std::size_t m = low.size();
    const auto dim = static_cast<Eigen::Index>(m) * n;
    ComplexMatrix S(dim, dim);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            auto dst = S.block(static_cast<Eigen::Index>(a) * n, static_cast<Eigen::Index>(b) * n, n, n);
            for (int i = 1; i <= d; ++i) {
                const auto src = K.block(low[a].append(i), low[b].append(i));
                if (i == 1) dst = src;
                else dst += src;
            }
        }
    }
    return BlockKernel{std::move(low), n, std::move(S)};
}

struct PdResult {
    bool psd = false;
    double margin = 0.0;     // lambda_min(G)
    double lambda_max = 0.0; // lambda_max(G)
};

inline PdResult pd_check(const BlockKernel& K, double tol = kDefaultPdTol) {
    if (K.G.size() == 0) return {true, 0.0, 0.0};
    const SpectrumBounds b = psd_margin(K.G);
    return {is_psd(b, tol), b.lambda_min, b.lambda_max};
}

struct WitnessEntry {
    Word word;
    ComplexVector vector;
};

struct OrderResult {
    bool dominated = false;
    double margin = 0.0; // lambda_min(K|_{W_{N-1}} - K_sigma)
    double scale = 0.0;  // lambda_max(K|_{W_{N-1}})
    std::size_t depth = 0;
    std::vector<WitnessEntry> witness; // most negative eigenvector, by word; empty when dominated
};

/// Domination K_sigma <= K, decided on W_{N-1}.
inline OrderResult pd_order_check(const BlockKernel& K, double tol = kDefaultPdTol) {
    if (K.depth() == 0) throw InsufficientDepth("pd_order_check: kernel depth must be >= 1");
    const BlockKernel low = restrict_kernel(K, K.depth() - 1);
    const BlockKernel sigma = assemble_sigma(K);
    const ComplexMatrix D = low.G - sigma.G;
    const HermitianEig eig = hermitian_eig(D);
    OrderResult r;
    r.depth = K.depth() - 1;
    r.margin = eig.values(0);
    r.scale = psd_margin(low.G).lambda_max;
    r.dominated = r.margin >= -tol * std::max(1.0, r.scale);
    if (!r.dominated) {
        const ComplexVector v = eig.vectors.col(0);
        const double vmax = v.cwiseAbs().maxCoeff();
        for (std::size_t a = 0; a < low.words(); ++a) {
            ComplexVector part = v.segment(static_cast<Eigen::Index>(a) * K.n, K.n);
            if (part.cwiseAbs().maxCoeff() > 1e-12 * vmax) r.witness.push_back({low.table[a], std::move(part)});
        }
    }
    return r;
}

/// Witness-carrying failure of the domination check.
class NotDominated : public Error {
public:
    explicit NotDominated(OrderResult result)
        : Error("kernel not dominated: margin " + std::to_string(result.margin) + " at depth " +
                std::to_string(result.depth)),
          result_(std::move(result)) {}
    const OrderResult& result() const noexcept { return result_; }

private:
    OrderResult result_;
};

inline nlohmann::ordered_json kernel_to_json(const BlockKernel& K) {
    nlohmann::ordered_json j;
    j["d"] = K.alphabet();
    j["n"] = K.n;
    j["depth"] = K.depth();
    auto words = nlohmann::ordered_json::array();
    for (const Word& w : K.table.words()) words.push_back(render(w));
    j["words"] = std::move(words);
    j["matrix"] = matrix_to_json(K.G);
    return j;
}

} // namespace momdil
