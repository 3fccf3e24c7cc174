#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "momdil/ensemble.hpp"
#include "momdil/kernel.hpp"
#include "momdil/scenario_io.hpp"
#include "oracles.hpp"

using namespace momdil;

namespace {

ComplexMatrix scalar(double x) { return ComplexMatrix::Constant(1, 1, cplx(x, 0.0)); }

std::string temp_path(const std::string& name) { return std::string(MOMDIL_TEST_TMP) + "/" + name; }

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

OperatorEnsemble signs() {
    return OperatorEnsemble(1, 1, {Scenario{0.5, {scalar(1.0)}}, Scenario{0.5, {scalar(-1.0)}}});
}

OperatorEnsemble zero_ensemble(int d, Eigen::Index n) {
    return deterministic_ensemble(std::vector<ComplexMatrix>(static_cast<std::size_t>(d), ComplexMatrix::Zero(n, n)));
}

} // namespace

// ---------------------------------------------------------------------------
// scenario files

TEST(ScenarioFile, SingleScenario) {
    const auto path = temp_path("single.json");
    write(path, R"({"d":1,"n":1,"label":"two","scenarios":[{"weight":1,"ops":[{"rows":1,"cols":1,"re":[2],"im":[0]}]}]})");
    const OperatorEnsemble e = load_ensemble(path);
    EXPECT_EQ(e.label(), "two");
    EXPECT_EQ(apply_random(e, parse_ncpoly("Z1", 1)).values[0](0, 0), cplx(2.0));
}

TEST(ScenarioFile, TwoSignsAverageToZero) {
    const auto path = temp_path("signs.json");
    write(path, R"({"d":1,"n":1,"scenarios":[
        {"weight":0.5,"ops":[{"rows":1,"cols":1,"re":[1],"im":[0]}]},
        {"weight":0.5,"ops":[{"rows":1,"cols":1,"re":[-1],"im":[0]}]}]})");
    const OperatorEnsemble e = load_ensemble(path);
    EXPECT_EQ(word_moment(e, Word(1, {1}), Word(1))(0, 0), cplx(0.0));
    EXPECT_EQ(word_moment(e, Word(1, {1}), Word(1, {1}))(0, 0), cplx(1.0));
}

TEST(ScenarioFile, Rejections) {
    const auto path = temp_path("bad.json");
    write(path, R"({"d":1,"n":1,"scenarios":[{"weight":0.9,"ops":[{"rows":1,"cols":1,"re":[1],"im":[0]}]}]})");
    EXPECT_THROW(load_ensemble(path), ValidationError);
    write(path, R"({"d":1,"n":2,"scenarios":[{"weight":1,"ops":[{"rows":1,"cols":1,"re":[1],"im":[0]}]}]})");
    EXPECT_THROW(load_ensemble(path), ValidationError);
    write(path, R"({"d":1,"n":1,"scenarios":[{"weight":-1,"ops":[{"rows":1,"cols":1,"re":[1],"im":[0]}]}]})");
    EXPECT_THROW(load_ensemble(path), ValidationError);
    write(path, R"({"d":1,"n":1,"scenarios":[{"weight":1,"ops":[{"rows":1,"cols":1,"re":[1,2],"im":[0]}]}]})");
    EXPECT_THROW(load_ensemble(path), ValidationError);
    write(path, R"({"d":1,"n":1,"scenarios":[{"weight":1,"ops":)");
    EXPECT_THROW(load_ensemble(path), ParseError);
    EXPECT_THROW(load_ensemble(temp_path("missing.json")), ParseError);
}

TEST(ScenarioFile, NearUnitWeightsAreRenormalized) {
    const auto path = temp_path("near.json");
    write(path, R"({"d":1,"n":1,"scenarios":[
        {"weight":0.5000000001,"ops":[{"rows":1,"cols":1,"re":[1],"im":[0]}]},
        {"weight":0.5,"ops":[{"rows":1,"cols":1,"re":[1],"im":[0]}]}]})");
    const OperatorEnsemble e = load_ensemble(path);
    EXPECT_NEAR(e.scenarios()[0].weight + e.scenarios()[1].weight, 1.0, 1e-15);
}

TEST(ScenarioFile, SaveLoadIsBitExact) {
    const OperatorEnsemble e = gen_row_contraction_ensemble(2, 3, 4, 99, 0.2);
    const auto path = temp_path("roundtrip.json");
    save_ensemble(e, path);
    const OperatorEnsemble f = load_ensemble(path);
    ASSERT_EQ(f.size(), e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        EXPECT_EQ(f.scenarios()[k].weight, e.scenarios()[k].weight);
        for (int i = 0; i < 2; ++i) EXPECT_EQ(f.scenarios()[k].ops[static_cast<std::size_t>(i)], e.scenarios()[k].ops[static_cast<std::size_t>(i)]);
    }
}

// ---------------------------------------------------------------------------
// generators

TEST(Generators, RowContractionHitsTheSlack) {
    const OperatorEnsemble e = gen_row_contraction_ensemble(2, 2, 3, 7, 0.1);
    for (const auto& s : e.scenarios()) {
        const ComplexMatrix rows = s.ops[0] * s.ops[0].adjoint() + s.ops[1] * s.ops[1].adjoint();
        EXPECT_NEAR(lambda_max(rows), 0.9, 1e-12);
    }
    const OperatorEnsemble tiny = gen_row_contraction_ensemble(2, 2, 1, 7, 1.0 - 1e-12);
    EXPECT_LE(tiny.scenarios()[0].ops[0].norm(), 1e-5);
    EXPECT_THROW(gen_row_contraction_ensemble(2, 2, 1, 7, 1.0), RangeError);
}

TEST(Generators, CoisometryIsExact) {
    const OperatorEnsemble e = gen_coisometry_ensemble(2, 2, 1, 1);
    const auto& a = e.scenarios()[0].ops;
    EXPECT_LE((a[0] * a[0].adjoint() + a[1] * a[1].adjoint() - ComplexMatrix::Identity(2, 2)).norm(), 1e-12);
    const OperatorEnsemble u = gen_coisometry_ensemble(1, 3, 2, 5);
    for (const auto& s : u.scenarios())
        EXPECT_LE((s.ops[0].adjoint() * s.ops[0] - ComplexMatrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(Generators, SameSeedSameBits) {
    const auto a = gen_row_contraction_ensemble(3, 2, 4, 11, 0.3), b = gen_row_contraction_ensemble(3, 2, 4, 11, 0.3);
    const auto c = gen_coisometry_ensemble(3, 2, 4, 11), d = gen_coisometry_ensemble(3, 2, 4, 11);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(a.scenarios()[k].ops[i], b.scenarios()[k].ops[i]);
            EXPECT_EQ(c.scenarios()[k].ops[i], d.scenarios()[k].ops[i]);
        }
}

// ---------------------------------------------------------------------------
// moments and random operators

TEST(Moments, Examples) {
    const OperatorEnsemble e = gen_row_contraction_ensemble(2, 3, 3, 4, 0.2);
    EXPECT_LE((word_moment(e, Word(2), Word(2)) - ComplexMatrix::Identity(3, 3)).norm(), 1e-15);
    const OperatorEnsemble half = deterministic_ensemble({scalar(0.5)});
    EXPECT_DOUBLE_EQ(word_moment(half, Word(1, {1}), Word(1, {1}))(0, 0).real(), 0.25);
    EXPECT_EQ(word_moment(signs(), Word(1, {1}), Word(1))(0, 0), cplx(0.0));
    EXPECT_THROW(word_moment(e, Word(3, {1}), Word(2)), AlphabetMismatch);
}

TEST(Moments, HermitianSymmetry) {
    const OperatorEnsemble e = gen_coisometry_ensemble(3, 2, 3, 8);
    const WordTable t(3, 2);
    for (const auto& a : t.words())
        for (const auto& b : t.words())
            EXPECT_LE((word_moment(e, a, b).adjoint() - word_moment(e, b, a)).norm(), 1e-13);
}

TEST(RandomOperators, ApplyRandom) {
    const OperatorEnsemble e = gen_row_contraction_ensemble(2, 2, 3, 6, 0.1);
    const RandomOperator one = apply_random(e, NcPoly::constant(2, 1.0));
    for (const auto& v : one.values) EXPECT_EQ(v, ComplexMatrix::Identity(2, 2));
    const OperatorEnsemble det = deterministic_ensemble({ComplexMatrix::Random(2, 2), ComplexMatrix::Random(2, 2)});
    EXPECT_EQ(apply_random(det, parse_ncpoly("Z1", 2)).values[0], det.scenarios()[0].ops[0]);

    ComplexMatrix a = ComplexMatrix::Zero(2, 2), b = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = -1.0;
    b(0, 0) = cplx(0.0, 1.0);
    b(1, 1) = 3.0;
    const OperatorEnsemble commuting(2, 2, {Scenario{0.25, {a, b}}, Scenario{0.75, {b, a}}});
    for (const auto& v : apply_random(commuting, parse_ncpoly("Z1*Z2 - Z2*Z1", 2)).values) EXPECT_EQ(v.norm(), 0.0);
    EXPECT_THROW(apply_random(e, parse_ncpoly("Z1", 3)), AlphabetMismatch);
}

TEST(RandomOperators, Linearity) {
    Xoshiro256 rng(12);
    const OperatorEnsemble e = gen_row_contraction_ensemble(2, 3, 4, 12, 0.2);
    for (int trial = 0; trial < 10; ++trial) {
        const NcPoly p = random_poly(2, 3, rng), q = random_poly(2, 3, rng);
        const cplx a = rng.complex_normal(), b = rng.complex_normal();
        const RandomOperator lhs = apply_random(e, a * p + b * q);
        const RandomOperator rhs = linear_combination(a, apply_random(e, p), b, apply_random(e, q));
        for (std::size_t k = 0; k < e.size(); ++k)
            EXPECT_LE((lhs.values[k] - rhs.values[k]).norm(), 1e-12 * (1.0 + rhs.values[k].norm()));
    }
}

// ---------------------------------------------------------------------------
// kernels

TEST(Kernel, ScalarHalf) {
    const BlockKernel K = assemble_kernel(deterministic_ensemble({scalar(0.5)}), 2);
    ComplexMatrix expected(3, 3);
    expected << 1, .5, .25, .5, .25, .125, .25, .125, .0625;
    EXPECT_EQ(K.G, expected);
    EXPECT_LE((K.G - oracle::kernel(deterministic_ensemble({scalar(0.5)}), 2)).norm(), 0.0);
}

TEST(Kernel, MatchesBruteForce) {
    for (int d = 1; d <= 3; ++d) {
        const OperatorEnsemble e = gen_row_contraction_ensemble(d, 2, 3, 40 + static_cast<std::uint64_t>(d), 0.25);
        const BlockKernel K = assemble_kernel(e, 3);
        const ComplexMatrix G = oracle::kernel(e, 3);
        EXPECT_LE((K.G - G).norm(), 1e-13 * (1.0 + G.norm()));
        EXPECT_LE((K.block(Word(d), Word(d)) - ComplexMatrix::Identity(2, 2)).norm(), 1e-15);
        EXPECT_EQ((K.G - K.G.adjoint()).norm(), 0.0);
    }
}

TEST(Kernel, ZeroEnsemble) {
    const BlockKernel K = assemble_kernel(zero_ensemble(2, 2), 1);
    ComplexMatrix expected = ComplexMatrix::Zero(6, 6);
    expected.topLeftCorner(2, 2).setIdentity();
    EXPECT_EQ(K.G, expected);
    const BlockKernel S = assemble_sigma(K);
    EXPECT_EQ(S.G.norm(), 0.0);
}

TEST(Kernel, TruncationIsALeadingBlock) {
    for (int d = 1; d <= 3; ++d) {
        const OperatorEnsemble e = gen_coisometry_ensemble(d, 2, 3, 17);
        const BlockKernel deep = assemble_kernel(e, 3), shallow = assemble_kernel(e, 2);
        EXPECT_EQ(deep.G.topLeftCorner(shallow.G.rows(), shallow.G.cols()), shallow.G);
        EXPECT_EQ(restrict_kernel(deep, 2).G, shallow.G);
    }
}

TEST(Kernel, SigmaForOneLetterIsTheShiftedKernel) {
    const BlockKernel K = assemble_kernel(gen_row_contraction_ensemble(1, 3, 4, 23, 0.1), 4);
    const BlockKernel S = assemble_sigma(K);
    for (std::size_t a = 0; a < S.words(); ++a)
        for (std::size_t b = 0; b < S.words(); ++b) EXPECT_EQ(S.block(a, b), K.block(a + 1, b + 1));
    EXPECT_THROW(assemble_sigma(assemble_kernel(gen_coisometry_ensemble(1, 1, 1, 1), 0)), InsufficientDepth);
}

TEST(Kernel, SigmaOfCoisometryEqualsKernel) {
    const BlockKernel K = assemble_kernel(gen_coisometry_ensemble(2, 2, 3, 31), 3);
    EXPECT_LE((assemble_sigma(K).G - restrict_kernel(K, 2).G).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Kernel, GramIdentity) {
    Xoshiro256 rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 1 + trial % 3;
        const OperatorEnsemble e = gen_row_contraction_ensemble(d, 2, 3, 300 + static_cast<std::uint64_t>(trial), 0.2);
        const BlockKernel K = assemble_kernel(e, 2);
        std::vector<std::size_t> idx;
        std::vector<ComplexVector> u;
        for (int j = 0; j < 4; ++j) {
            idx.push_back(static_cast<std::size_t>(rng() % K.words()));
            u.push_back(ComplexVector::Random(2));
        }
        cplx quad = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) quad += u[i].dot(K.block(idx[i], idx[j]) * u[j]);
        double direct = 0.0;
        for (const auto& s : e.scenarios()) {
            ComplexVector acc = ComplexVector::Zero(2);
            for (std::size_t j = 0; j < idx.size(); ++j)
                acc += oracle::product(s.ops, K.table[idx[j]].letters(), 2).adjoint() * u[j];
            direct += s.weight * acc.squaredNorm();
        }
        EXPECT_NEAR(quad.real(), direct, 1e-10 * (1.0 + direct));
        EXPECT_NEAR(quad.imag(), 0.0, 1e-10 * (1.0 + direct));
    }
}

TEST(Kernel, PositivityVerdicts) {
    const PdResult ok = pd_check(assemble_kernel(gen_row_contraction_ensemble(2, 2, 2, 1, 0.1), 3));
    EXPECT_TRUE(ok.psd);
    BlockKernel neg = assemble_kernel(zero_ensemble(1, 2), 0);
    neg.G = -neg.G;
    const PdResult bad = pd_check(neg);
    EXPECT_FALSE(bad.psd);
    EXPECT_LE(bad.margin, -1.0);
    BlockKernel zero = neg;
    zero.G.setZero();
    const PdResult z = pd_check(zero);
    EXPECT_TRUE(z.psd);
    EXPECT_EQ(z.margin, 0.0);
}

TEST(Kernel, DominationVerdicts) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto r = pd_order_check(assemble_kernel(gen_row_contraction_ensemble(2, 2, 3, seed, 0.1), 3));
        EXPECT_TRUE(r.dominated);
        EXPECT_EQ(r.depth, 2u);
    }
    const auto two = pd_order_check(assemble_kernel(deterministic_ensemble({scalar(2.0)}), 1));
    EXPECT_FALSE(two.dominated);
    EXPECT_NEAR(two.margin, -3.0, 1e-12);
    ASSERT_EQ(two.witness.size(), 1u);
    EXPECT_EQ(render(two.witness[0].word), "e");
    const auto co = pd_order_check(assemble_kernel(gen_coisometry_ensemble(2, 2, 3, 9), 3));
    EXPECT_TRUE(co.dominated);
    EXPECT_LE(std::abs(co.margin), 1e-10);
    EXPECT_THROW(pd_order_check(assemble_kernel(zero_ensemble(1, 1), 0)), InsufficientDepth);
}

TEST(Kernel, ExportCarriesWordLabels) {
    const auto j = kernel_to_json(assemble_kernel(zero_ensemble(2, 1), 1));
    EXPECT_EQ(j["words"].size(), 3u);
    EXPECT_EQ(j["words"][2], "2");
    EXPECT_EQ(matrix_from_json(j["matrix"]).rows(), 3);
}
