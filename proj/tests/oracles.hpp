#pragma once

// Brute-force reference computations used to freeze expected values. None of
// these reuse the library's word tables, kernel assembly or Fock machinery.

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "momdil/ensemble.hpp"
#include "momdil/ncpoly.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Letters = std::vector<int>;

/// All words of length <= N, graded lexicographic, by an odometer per level.
inline std::vector<Letters> words_upto(int d, int N) {
    std::vector<Letters> out;
    for (int len = 0; len <= N; ++len) {
        Letters w(static_cast<std::size_t>(len), 1);
        while (true) {
            out.push_back(w);
            int pos = len - 1;
            while (pos >= 0 && w[static_cast<std::size_t>(pos)] == d) w[static_cast<std::size_t>(pos--)] = 1;
            if (pos < 0) break;
            ++w[static_cast<std::size_t>(pos)];
        }
    }
    return out;
}

inline Mat product(const std::vector<Mat>& ops, const Letters& w, Eigen::Index n) {
    Mat x = Mat::Identity(n, n);
    for (int l : w) x = x * ops[static_cast<std::size_t>(l - 1)];
    return x;
}

/// G with blocks E[A^a (A^b)*], summed scenario by scenario with naive products.
inline Mat kernel(const momdil::OperatorEnsemble& e, int N) {
    const auto words = words_upto(e.d(), N);
    const Eigen::Index n = e.n();
    const auto m = static_cast<Eigen::Index>(words.size());
    Mat G = Mat::Zero(m * n, m * n);
    for (const auto& s : e.scenarios())
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                G.block(a * n, b * n, n, n) += s.weight * product(s.ops, words[static_cast<std::size_t>(a)], n) *
                                               product(s.ops, words[static_cast<std::size_t>(b)], n).adjoint();
    return G;
}

/// The explicit matrix of p(L) from levels <= M into levels <= M + deg p.
inline Mat fock_map(const momdil::NcPoly& p, int M) {
    const int d = p.alphabet();
    const int deg = static_cast<int>(p.degree());
    const auto dom = words_upto(d, M);
    const auto cod = words_upto(d, M + deg);
    std::map<Letters, Eigen::Index> where;
    for (std::size_t k = 0; k < cod.size(); ++k) where[cod[k]] = static_cast<Eigen::Index>(k);
    Mat X = Mat::Zero(static_cast<Eigen::Index>(cod.size()), static_cast<Eigen::Index>(dom.size()));
    for (std::size_t g = 0; g < dom.size(); ++g)
        for (const auto& [a, c] : p.coeffs()) {
            Letters w = a.letters();
            w.insert(w.end(), dom[g].begin(), dom[g].end());
            X(where.at(w), static_cast<Eigen::Index>(g)) += c;
        }
    return X;
}

inline double largest_singular_value(const Mat& x) {
    if (x.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(x);
    return svd.singularValues()(0);
}

inline Mat hermitian_sqrt(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es((m + m.adjoint()) / 2.0);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

/// Unitary U on H^{N+1} with P_H U^k P_H = T^k for 0 <= k <= N.
inline Mat egervary(const Mat& T, int N) {
    const Eigen::Index r = T.rows();
    const Mat I = Mat::Identity(r, r);
    const Mat DT = hermitian_sqrt(I - T.adjoint() * T);
    const Mat DTs = hermitian_sqrt(I - T * T.adjoint());
    const Eigen::Index blocks = N + 1;
    Mat U = Mat::Zero(blocks * r, blocks * r);
    U.block(0, 0, r, r) = T;
    U.block(r, 0, r, r) = DT;
    U.block(0, (blocks - 1) * r, r, r) = DTs;
    U.block(r, (blocks - 1) * r, r, r) = -T.adjoint();
    for (Eigen::Index k = 2; k < blocks; ++k) U.block(k * r, (k - 1) * r, r, r) = I;
    if (blocks == 1) {
        // no room for the shift, fall back to the 2x2 Halmos unitary
        U.resize(2 * r, 2 * r);
        U << T, DTs, DT, -T.adjoint();
    }
    return U;
}

} // namespace oracle
