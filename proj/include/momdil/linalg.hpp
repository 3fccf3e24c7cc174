#pragma once

// Dense complex matrix primitives shared by every module. All routines are
// pure functions of their inputs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"

namespace momdil {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
struct HermitianEig {
    RealVector values;
    ComplexMatrix vectors;
};

inline constexpr double kDefaultHermiticityTol = 1e-10;
inline constexpr double kDefaultClampTol = 1e-12;

inline bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

inline void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw DimensionMismatch(std::string(what) + ": expected a square matrix, got " + std::to_string(m.rows()) +
                                "x" + std::to_string(m.cols()));
}

/// Eigendecomposition of (M + M*)/2. Rejects input whose anti-Hermitian part
/// exceeds hermiticity_tol * max(1, |M|_F).
inline HermitianEig hermitian_eig(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol) {
    require_square(m, "hermitian_eig");
    if (m.size() == 0) return {RealVector(0), ComplexMatrix(0, 0)};
    const double asym = (m - m.adjoint()).norm();
    if (!(asym <= hermiticity_tol * std::max(1.0, m.norm())))
        throw NonHermitianInput("hermitian_eig: |M - M*|_F = " + std::to_string(asym) + " exceeds tolerance");
    const ComplexMatrix sym = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
    return {es.eigenvalues(), es.eigenvectors()};
}

struct SpectrumBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

inline SpectrumBounds psd_margin(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol) {
    require_square(m, "psd_margin");
    if (m.size() == 0) return {};
    const ComplexMatrix sym = (m + m.adjoint()) * 0.5;
    const double asym = (m - m.adjoint()).norm();
    if (!(asym <= hermiticity_tol * std::max(1.0, m.norm())))
        throw NonHermitianInput("psd_margin: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev(0), ev(ev.size() - 1)};
}

/// True when lambda_min >= -tol * max(1, lambda_max).
inline bool is_psd(const SpectrumBounds& b, double tol) {
    return b.lambda_min >= -tol * std::max(1.0, b.lambda_max);
}

/// Hermitian PSD square root. Eigenvalues in [-clamp_tol * scale, 0) are
/// clamped to zero, where scale is the spectral radius; anything more negative
/// raises NotPSD.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m, double clamp_tol = kDefaultClampTol) {
    const HermitianEig eig = hermitian_eig(m);
    if (eig.values.size() == 0) return ComplexMatrix(0, 0);
    const double scale = std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
    if (eig.values(0) < -clamp_tol * scale)
        throw NotPSD("psd_sqrt: eigenvalue " + std::to_string(eig.values(0)) + " below clamp band");
    RealVector root = eig.values.cwiseMax(0.0).cwiseSqrt();
    ComplexMatrix r = eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
    return (r + r.adjoint()) * 0.5;
}

/// Largest singular value, as sqrt(lambda_max) of the smaller Gram matrix.
inline double operator_norm(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    const ComplexMatrix gram = m.rows() <= m.cols() ? ComplexMatrix(m * m.adjoint()) : ComplexMatrix(m.adjoint() * m);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((gram + gram.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1)));
}

inline double lambda_max(const ComplexMatrix& m) {
    return psd_margin(m).lambda_max;
}

inline double lambda_min(const ComplexMatrix& m) {
    return psd_margin(m).lambda_min;
}

/// Orthonormal basis of the column space of z: left singular vectors whose
/// singular value exceeds sv_tol * sigma_max.
inline ComplexMatrix orthonormal_basis(const ComplexMatrix& z, double sv_tol = 1e-10) {
    if (z.cols() == 0 || z.rows() == 0) return ComplexMatrix(z.rows(), 0);
    Eigen::BDCSVD<ComplexMatrix> svd(z, Eigen::ComputeThinU);
    const RealVector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return ComplexMatrix(z.rows(), 0);
    Eigen::Index kept = 0;
    while (kept < sv.size() && sv(kept) > sv_tol * sv(0)) ++kept;
    return svd.matrixU().leftCols(kept);
}

} // namespace momdil
