#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "momdil/linalg.hpp"
#include "momdil/ncpoly.hpp"
#include "momdil/rng.hpp"
#include "momdil/words.hpp"

using namespace momdil;

namespace {

ComplexMatrix diag(std::initializer_list<double> v) {
    RealVector d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) d(k++) = x;
    return d.cast<cplx>().asDiagonal();
}

} // namespace

// ---------------------------------------------------------------------------
// linear algebra

TEST(Linalg, EigenvaluesOfSmallCases) {
    EXPECT_NEAR(hermitian_eig(ComplexMatrix::Identity(2, 2)).values(0), 1.0, 1e-15);
    const auto e = hermitian_eig(diag({3.0, -1.0}));
    EXPECT_NEAR(e.values(0), -1.0, 1e-15);
    EXPECT_NEAR(e.values(1), 3.0, 1e-15);
    ComplexMatrix x(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    const auto px = hermitian_eig(x);
    EXPECT_NEAR(px.values(0), -1.0, 1e-15);
    EXPECT_NEAR(px.values(1), 1.0, 1e-15);
}

TEST(Linalg, RejectsBadInput) {
    ComplexMatrix up(2, 2);
    up << 0.0, 1.0, 0.0, 0.0;
    EXPECT_THROW(hermitian_eig(up), NonHermitianInput);
    EXPECT_THROW(hermitian_eig(ComplexMatrix::Zero(2, 3)), DimensionMismatch);
}

TEST(Linalg, PsdMargin) {
    const auto a = psd_margin(ComplexMatrix::Identity(3, 3));
    EXPECT_DOUBLE_EQ(a.lambda_min, 1.0);
    EXPECT_DOUBLE_EQ(a.lambda_max, 1.0);
    const auto z = psd_margin(ComplexMatrix::Zero(2, 2));
    EXPECT_DOUBLE_EQ(z.lambda_min, 0.0);
    EXPECT_DOUBLE_EQ(z.lambda_max, 0.0);
    const auto b = psd_margin(diag({2.0, -3.0}));
    EXPECT_NEAR(b.lambda_min, -3.0, 1e-15);
    EXPECT_NEAR(b.lambda_max, 2.0, 1e-15);
}

TEST(Linalg, PsdSqrt) {
    EXPECT_NEAR((psd_sqrt(ComplexMatrix::Identity(3, 3)) - ComplexMatrix::Identity(3, 3)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((psd_sqrt(diag({4.0, 9.0})) - diag({2.0, 3.0})).norm(), 0.0, 1e-14);
    EXPECT_NEAR((psd_sqrt(diag({1.0, -1e-14}), 1e-12) - diag({1.0, 0.0})).norm(), 0.0, 1e-15);
    EXPECT_THROW(psd_sqrt(diag({1.0, -1e-3})), NotPSD);
}

TEST(Linalg, OperatorNorm) {
    EXPECT_NEAR(operator_norm(ComplexMatrix::Identity(5, 5)), 1.0, 1e-15);
    EXPECT_NEAR(operator_norm(diag({2.0, 3.0})), 3.0, 1e-15);
    ComplexMatrix col(2, 1);
    col << 3.0, 4.0;
    EXPECT_NEAR(operator_norm(col), 5.0, 1e-14);
}

TEST(LinalgProperty, ReconstructionSqrtAndUnitaryInvariance) {
    Xoshiro256 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 1 + trial % 6;
        const ComplexMatrix g = ginibre(rng, n, n);
        const ComplexMatrix h = g + g.adjoint();
        const auto e = hermitian_eig(h);
        const ComplexMatrix rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
        EXPECT_LE((rec - h).norm(), 1e-10 * h.norm());
        EXPECT_LE((e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(n, n)).norm(), 1e-12);
        for (Eigen::Index k = 0; k < n; ++k)
            EXPECT_LE((h * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm(), 1e-12 * (1.0 + h.norm()));

        const ComplexMatrix psd = g.adjoint() * g;
        const ComplexMatrix root = psd_sqrt(psd);
        EXPECT_LE((root * root - psd).norm(), 1e-10 * (1.0 + psd.norm()));

        const ComplexMatrix u = haar_unitary(rng, n), v = haar_unitary(rng, n);
        EXPECT_NEAR(operator_norm(u * g * v), operator_norm(g), 1e-10 * (1.0 + operator_norm(g)));
    }
}

// ---------------------------------------------------------------------------
// words

std::vector<std::string> rendered(const WordTable& t) {
    std::vector<std::string> out;
    for (const auto& w : t.words()) out.push_back(render(w));
    return out;
}

TEST(Words, Enumeration) {
    EXPECT_EQ(rendered(enumerate_words(2, 2)), (std::vector<std::string>{"e", "1", "2", "11", "12", "21", "22"}));
    EXPECT_EQ(rendered(enumerate_words(1, 3)), (std::vector<std::string>{"e", "1", "11", "111"}));
    EXPECT_EQ(rendered(enumerate_words(3, 0)), (std::vector<std::string>{"e"}));
    EXPECT_EQ(enumerate_words(3, 4).size(), 121u);
    EXPECT_THROW(enumerate_words(2, 20), CapacityExceeded);
    EXPECT_THROW(enumerate_words(4, 9, 1000), CapacityExceeded);
}

TEST(Words, ConcatAndReverse) {
    const Word e(3), w12(3, {1, 2}), w3(3, {3});
    EXPECT_EQ(concat(e, w12), w12);
    EXPECT_EQ(render(concat(w12, w3)), "123");
    EXPECT_EQ(render(concat(Word(3, {1}), Word(3, {1}))), "11");
    EXPECT_THROW(concat(Word(2, {1}), Word(3, {1})), AlphabetMismatch);
    EXPECT_EQ(reverse(e), e);
    EXPECT_EQ(render(reverse(w12)), "21");
    EXPECT_EQ(render(reverse(Word(3, {1, 2, 3}))), "321");
    EXPECT_THROW(Word(2, {3}), GeneratorOutOfRange);
}

TEST(Words, Rendering) {
    EXPECT_EQ(render(Word(12, {10, 2, 3})), "10.2.3");
    EXPECT_EQ(parse_word("10.2.3", 12), Word(12, {10, 2, 3}));
    EXPECT_EQ(parse_word("e", 2), Word(2));
    EXPECT_EQ(parse_word("212", 2), Word(2, {2, 1, 2}));
    EXPECT_THROW(parse_word("13", 2), ParseError);
    EXPECT_THROW(parse_word("1..2", 12), ParseError);
}

TEST(WordsProperty, ReversalIsAntiHomomorphism) {
    for (int d = 1; d <= 3; ++d) {
        const WordTable t(d, 4);
        for (const auto& a : t.words())
            for (const auto& b : t.words()) {
                if (a.length() + b.length() > 4) continue;
                ASSERT_EQ(reverse(concat(a, b)), concat(reverse(b), reverse(a)));
            }
    }
}

TEST(WordsProperty, IndexBijectionAndPrefixClosure) {
    for (int d = 1; d <= 4; ++d) {
        const WordTable t(d, 5);
        const std::size_t expected = d == 1 ? 6u : (static_cast<std::size_t>(std::pow(d, 6)) - 1) / (d - 1);
        ASSERT_EQ(t.size(), expected);
        for (std::size_t k = 0; k < t.size(); ++k) {
            ASSERT_EQ(t.index(t[k]), k);
            if (k) {
                ASSERT_LT(t.index(t[k].parent()), k);
                ASSERT_LT(t[k - 1], t[k]);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// polynomials

TEST(NcPoly, Parsing) {
    const NcPoly c = parse_ncpoly("Z1*Z2 - Z2*Z1", 2);
    EXPECT_EQ(c.term_count(), 2u);
    EXPECT_EQ(c.coeff(Word(2, {1, 2})), cplx(1.0));
    EXPECT_EQ(c.coeff(Word(2, {2, 1})), cplx(-1.0));
    EXPECT_EQ(parse_ncpoly("1", 1), NcPoly::constant(1, 1.0));
    const NcPoly l = parse_ncpoly("(0.5+0.5i)*Z1^2 + Z1^2", 1);
    EXPECT_EQ(l.term_count(), 1u);
    EXPECT_EQ(l.coeff(Word(1, {1, 1})), cplx(1.5, 0.5));
    EXPECT_EQ(parse_ncpoly("(Z1 + 2)*(Z1 - 2)", 1), parse_ncpoly("Z1^2 - 4", 1));
    EXPECT_EQ(parse_ncpoly(" 2 *  Z2 ", 2), NcPoly::monomial(Word(2, {2}), 2.0));
    EXPECT_EQ(infer_alphabet("Z1 + Z3*Z2"), 3);
}

TEST(NcPoly, ParseErrors) {
    EXPECT_THROW(parse_ncpoly("Z3", 2), GeneratorOutOfRange);
    EXPECT_THROW(parse_ncpoly("   ", 2), EmptyInput);
    try {
        parse_ncpoly("Z1 + * Z2", 2);
        FAIL() << "expected a syntax error";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.position(), 5u);
        EXPECT_FALSE(e.expected().empty());
    }
}

TEST(NcPoly, RadialDilate) {
    const NcPoly p = parse_ncpoly("1 + (2-1i)*Z1*Z2 - Z2", 2);
    EXPECT_EQ(radial_dilate(p, 1.0), p);
    EXPECT_EQ(radial_dilate(parse_ncpoly("Z1", 1), 0.5), parse_ncpoly("0.5*Z1", 1));
    EXPECT_EQ(radial_dilate(parse_ncpoly("1 + Z1*Z2", 2), 0.5), parse_ncpoly("1 + 0.25*Z1*Z2", 2));
    EXPECT_EQ(radial_dilate(p, 0.0), NcPoly::constant(2, 1.0));
    EXPECT_THROW(radial_dilate(p, 1.5), RangeError);
    EXPECT_THROW(radial_dilate(p, -0.1), RangeError);
}

TEST(NcPoly, Arithmetic) {
    EXPECT_EQ(parse_ncpoly("Z1", 2) * parse_ncpoly("Z2", 2), NcPoly::monomial(Word(2, {1, 2})));
    EXPECT_EQ(parse_ncpoly("1 + Z1", 1) * parse_ncpoly("1 - Z1", 1), parse_ncpoly("1 - Z1^2", 1));
    EXPECT_TRUE((parse_ncpoly("Z1", 1) - parse_ncpoly("Z1", 1)).is_zero());
    EXPECT_THROW(parse_ncpoly("Z1", 1) + parse_ncpoly("Z1", 2), AlphabetMismatch);
}

TEST(NcPoly, CoefficientNorm) {
    EXPECT_DOUBLE_EQ(coeff_l2_norm(parse_ncpoly("1", 1)), 1.0);
    EXPECT_DOUBLE_EQ(coeff_l2_norm(parse_ncpoly("Z1 + Z2", 2)), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(coeff_l2_norm(parse_ncpoly("3*Z1*Z2", 2)), 3.0);
}

TEST(NcPoly, Evaluation) {
    Xoshiro256 rng(5);
    const ComplexMatrix X = ginibre(rng, 3, 3), Y = ginibre(rng, 3, 3);
    EXPECT_LE((evaluate_poly(NcPoly::constant(2, 1.0), {X, Y}) - ComplexMatrix::Identity(3, 3)).norm(), 0.0);
    EXPECT_LE((evaluate_poly(parse_ncpoly("Z1*Z2", 2), {X, Y}) - X * Y).norm(), 1e-13);
    ComplexMatrix nil(2, 2);
    nil << 0.0, 1.0, 0.0, 0.0;
    EXPECT_EQ(evaluate_poly(parse_ncpoly("Z1^2", 1), {nil}), ComplexMatrix::Zero(2, 2));
    EXPECT_THROW(evaluate_poly(parse_ncpoly("Z1", 2), {X}), DimensionMismatch);
}

TEST(NcPolyProperty, EvaluationIsMultiplicativeAndAdjointConsistent) {
    Xoshiro256 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + trial % 3;
        std::vector<ComplexMatrix> T;
        for (int i = 0; i < d; ++i) T.push_back(0.5 * ginibre(rng, 3, 3));
        const NcPoly p = random_poly(d, 3, rng), q = random_poly(d, 3, rng);
        const ComplexMatrix lhs = evaluate_poly(p * q, T);
        const ComplexMatrix rhs = evaluate_poly(p, T) * evaluate_poly(q, T);
        EXPECT_LE((lhs - rhs).norm(), 1e-10 * (1.0 + rhs.norm()));
        const ComplexMatrix direct = evaluate_poly(p, T);
        EXPECT_LE((evaluate_poly(p, T, Side::adjoint) - direct.adjoint()).norm(), 1e-12 * (1.0 + direct.norm()));
    }
}

TEST(NcPolyProperty, RadialDilatesCompose) {
    Xoshiro256 rng(78);
    for (int trial = 0; trial < 30; ++trial) {
        const NcPoly p = random_poly(2, 4, rng);
        const double r = rng.uniform(), s = rng.uniform();
        const NcPoly a = radial_dilate(radial_dilate(p, r), s), b = radial_dilate(p, r * s);
        for (const auto& [w, c] : b.coeffs()) EXPECT_LE(std::abs(a.coeff(w) - c), 1e-15 * (1.0 + std::abs(c)));
        for (const auto& [w, c] : a.coeffs()) EXPECT_LE(std::abs(b.coeff(w) - c), 1e-15 * (1.0 + std::abs(c)));
    }
}

TEST(NcPolyProperty, RenderParseRoundTrip) {
    Xoshiro256 rng(79);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 12;
        const NcPoly p = random_poly(d, 1 + trial % 3, rng, 0.3);
        const std::string text = render(p);
        ASSERT_EQ(parse_ncpoly(text, d), p) << text;
    }
}

// ---------------------------------------------------------------------------
// random streams

TEST(Rng, ReferenceSequence) {
    // first outputs of splitmix64 from state 0, the published test vector
    std::uint64_t s = 0;
    EXPECT_EQ(splitmix64(s), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(splitmix64(s), 0x6E789E6AA1B965F4ULL);
    Xoshiro256 a(42), b(42);
    for (int k = 0; k < 100; ++k) ASSERT_EQ(a(), b());
    EXPECT_NE(stream_seed(1, 0), stream_seed(1, 1));
}

TEST(Rng, MomentsAndHaar) {
    Xoshiro256 rng(3);
    double mean = 0.0, second = 0.0;
    const int count = 20000;
    for (int k = 0; k < count; ++k) {
        const cplx z = rng.complex_normal();
        mean += z.real();
        second += std::norm(z);
    }
    EXPECT_NEAR(mean / count, 0.0, 0.03);
    EXPECT_NEAR(second / count, 1.0, 0.03);
    const ComplexMatrix u = haar_unitary(rng, 5);
    EXPECT_LE((u.adjoint() * u - ComplexMatrix::Identity(5, 5)).norm(), 1e-13);
}
