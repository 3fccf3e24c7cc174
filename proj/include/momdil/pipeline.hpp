#pragma once

// End-to-end runs behind the command line tool. Each run returns a report
// whose body is a deterministic function of the configuration; wall-clock
// timings are kept in a separate object.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calculus.hpp"
#include "dilation.hpp"
#include "ensemble.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "gns.hpp"
#include "kernel.hpp"
#include "ncpoly.hpp"
#include "scenario_io.hpp"

namespace momdil {

enum ExitCode : int { kExitPass = 0, kExitMathFail = 2, kExitInputFail = 3, kExitCapacity = 4 };

struct GeneratorSpec {
    std::string kind = "row_contraction"; // or "coisometry"
    int d = 2;
    Eigen::Index n = 2;
    std::size_t k = 3;
    double slack = 0.1;
};

struct RunConfig {
    std::optional<std::string> scenario_path;
    GeneratorSpec generator;
    std::size_t N = 3;
    std::size_t M_fock = 3;
    double pd_tol = kDefaultPdTol;
    double rank_tol = kDefaultRankTol;
    double check_tol = kDefaultCheckTol;
    std::uint64_t seed = 1;
    std::string poly;
    std::optional<int> poly_alphabet;
    std::size_t levels = 6;        // norms: M in [deg p, deg p + levels]
    int r_points = 6;              // calculus: r_j = 1 - 2^{-j}
    std::vector<double> r_grid;    // explicit grid overrides r_points
    int vn_polys = 5;              // check: size of the von Neumann suite
    std::size_t capacity = kDefaultWordCapacity;

    void validate() const {
        if (N < 1) throw ValidationError("config: depth N must be >= 1");
        if (M_fock < N) throw ValidationError("config: Fock level must be >= depth N");
        if (!(pd_tol > 0.0) || !(rank_tol > 0.0) || !(check_tol > 0.0))
            throw ValidationError("config: tolerances must be positive");
    }
};

struct Report {
    nlohmann::ordered_json body;
    nlohmann::ordered_json timing = nlohmann::ordered_json::object();
    int exit_code = kExitPass;
    std::string csv;

    std::string body_text() const { return body.dump(2); }
    std::string text() const {
        nlohmann::ordered_json j;
        j["body"] = body;
        j["timing"] = timing;
        return j.dump(2);
    }
};

namespace detail {

class StageClock {
public:
    explicit StageClock(nlohmann::ordered_json& sink) : sink_(sink) {}
    template <class F>
    auto operator()(const char* stage, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto result = f();
        const auto t1 = std::chrono::steady_clock::now();
        sink_[stage] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        return result;
    }

private:
    nlohmann::ordered_json& sink_;
};

inline nlohmann::ordered_json judged(double value, double limit, bool pass, const char* rule) {
    nlohmann::ordered_json j;
    j["value"] = value;
    j["tolerance"] = limit;
    j["rule"] = rule;
    j["pass"] = pass;
    return j;
}

inline nlohmann::ordered_json config_json(const RunConfig& c, const char* command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    if (c.scenario_path) j["scenario"] = *c.scenario_path;
    else {
        j["generator"] = {{"kind", c.generator.kind}, {"d", c.generator.d},     {"n", c.generator.n},
                          {"k", c.generator.k},       {"slack", c.generator.slack}};
    }
    j["depth"] = c.N;
    j["fock"] = c.M_fock;
    j["pd_tol"] = c.pd_tol;
    j["rank_tol"] = c.rank_tol;
    j["check_tol"] = c.check_tol;
    j["seed"] = c.seed;
    if (!c.poly.empty()) j["poly"] = c.poly;
    return j;
}

inline nlohmann::ordered_json ms_json(const MsReport& r) {
    nlohmann::ordered_json j;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["tolerance"] = r.tol;
    j["rule"] = "margin >= -tol*max(1,rhs)";
    j["pass"] = r.pass;
    j["fock_levels"] = r.levels;
    j["hypothesis"] = to_string(r.hypothesis);
    if (r.capacity_limited) j["capacity_limited"] = true;
    return j;
}

inline nlohmann::ordered_json witness_json(const OrderResult& o) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& w : o.witness) {
        nlohmann::ordered_json e;
        e["word"] = render(w.word);
        std::vector<double> re, im;
        for (Eigen::Index k = 0; k < w.vector.size(); ++k) {
            re.push_back(w.vector(k).real());
            im.push_back(w.vector(k).imag());
        }
        e["re"] = re;
        e["im"] = im;
        arr.push_back(std::move(e));
    }
    return arr;
}

} // namespace detail

inline OperatorEnsemble resolve_ensemble(const RunConfig& c) {
    if (c.scenario_path) return load_ensemble(*c.scenario_path);
    const GeneratorSpec& g = c.generator;
    if (g.kind == "row_contraction") return gen_row_contraction_ensemble(g.d, g.n, g.k, c.seed, g.slack);
    if (g.kind == "coisometry") return gen_coisometry_ensemble(g.d, g.n, g.k, c.seed);
    throw ValidationError("config: unknown generator kind '" + g.kind + "' (expected row_contraction or coisometry)");
}

inline nlohmann::ordered_json ensemble_summary(const OperatorEnsemble& e) {
    return {{"label", e.label()}, {"d", e.d()}, {"n", e.n()}, {"scenarios", e.size()}};
}

/// kernel -> positivity -> domination -> factorization -> shifts -> dilation
/// -> identities -> von Neumann suite.
inline Report run_check(const RunConfig& c) {
    c.validate();
    Report rep;
    detail::StageClock clock(rep.timing);
    auto& body = rep.body;
    body["config"] = detail::config_json(c, "check");
    const OperatorEnsemble e = clock("load", [&] { return resolve_ensemble(c); });
    body["ensemble"] = ensemble_summary(e);
    auto& stages = body["stages"];
    bool ok = true;

    const BlockKernel K = clock("kernel", [&] { return assemble_kernel(e, c.N, c.capacity); });
    const double gnorm = K.G.norm();
    stages["kernel"] = {{"words", K.words()}, {"dimension", K.G.rows()}, {"frobenius_norm", gnorm}};

    const PdResult pd = clock("pd", [&] { return pd_check(K, c.pd_tol); });
    stages["pd"] = {{"verdict", pd.psd ? "PSD" : "NotPSD"},
                    {"margin", pd.margin},
                    {"lambda_max", pd.lambda_max},
                    {"tolerance", c.pd_tol},
                    {"rule", "lambda_min >= -tol*max(1,lambda_max)"}};
    ok = ok && pd.psd;

    const OrderResult order = clock("domination", [&] { return pd_order_check(K, c.pd_tol); });
    stages["domination"] = {{"verdict", order.dominated ? "Dominated" : "NotDominated"},
                            {"margin", order.margin},
                            {"scale", order.scale},
                            {"depth", order.depth},
                            {"tolerance", c.pd_tol},
                            {"rule", "margin >= -tol*max(1,lambda_max(K restricted))"}};
    if (!order.dominated || !pd.psd) {
        if (!order.dominated) stages["domination"]["witness"] = detail::witness_json(order);
        body["verdict"] = "fail";
        rep.exit_code = kExitMathFail;
        return rep;
    }

    const GnsModel g = clock("gns", [&] { return build_shifts(kolmogorov_factorize(K, c.rank_tol), K, c.pd_tol); });
    const double gns_limit = 1e-8 * (1.0 + gnorm);
    const double fact = factorization_residual(g, K);
    stages["gns"] = {{"rank", g.r},
                     {"factorization_residual", detail::judged(fact, gns_limit, fact <= gns_limit, "<= 1e-8*(1+|G|_F)")},
                     {"shift_residual", detail::judged(g.shift_residual, 1e-8, g.shift_residual <= 1e-8, "<= tol")},
                     {"cyclicity_residual", cyclicity_residual(g)}};
    ok = ok && fact <= gns_limit && g.shift_residual <= 1e-8;

    const ContractionResult cc = column_contraction_check(g);
    stages["contraction"] = detail::judged(cc.lambda_max, 1.0 + kContractionTol, cc.pass, "lambda_max(sum B_i* B_i) <= 1+tol");
    ok = ok && cc.pass;

    const DilationModel m = clock("dilation", [&] { return build_dilation(g, c.M_fock, c.capacity); });
    const CuntzResidual cr = cuntz_residual(m);
    stages["dilation"] = {{"fock_level", m.M_fock},
                          {"defect_dim", m.q},
                          {"dimension", m.dimK},
                          {"coinvariance_residual", coinvariance_residual(m)},
                          {"compression_residual", compression_residual(m, std::min(c.N, c.M_fock))},
                          {"isometry_residual", detail::judged(cr.isometry_residual, 1e-10,
                                                               cr.isometry_residual <= 1e-10, "<= tol")},
                          {"completeness_defect_rank", cr.completeness_defect_rank},
                          {"degenerate", cr.degenerate}};
    ok = ok && cr.isometry_residual <= 1e-10;

    const std::size_t depth = std::min(c.N, c.M_fock);
    const RealizationResult rz = clock("realization", [&] { return realization_check(K, m, depth); });
    stages["realization"] = detail::judged(rz.max_residual, gns_limit, rz.max_residual <= gns_limit, "<= 1e-8*(1+|G|_F)");
    stages["realization"]["depth"] = depth;
    ok = ok && rz.max_residual <= gns_limit;

    const std::size_t gamma_depth = std::min(c.N - 1, std::size_t{2});
    const DominationIdentityResult a2 =
        clock("a2", [&] { return domination_identity_check(m, K, gamma_depth, c.check_tol); });
    stages["a2"] = detail::judged(a2.margin, c.check_tol, a2.pass, "margin >= -tol");
    stages["a2"]["gamma_depth"] = gamma_depth;
    stages["a2"]["span_dim"] = a2.span_dim;
    ok = ok && a2.pass;

    const std::size_t eq_depth = std::min(c.N - 1, c.M_fock - 1);
    const EqualityCaseResult eq = clock("equality_case", [&] { return equality_case_check(K, m, eq_depth); });
    const bool near_equality = eq.sigma_gap <= 1e-9;
    const bool eq_ok = !near_equality || eq.a5_residual <= 1e-7;
    stages["equality_case"] = {{"depth", eq_depth},
                               {"sigma_gap", eq.sigma_gap},
                               {"a5_residual", eq.a5_residual},
                               {"near_equality", near_equality},
                               {"rule", "sigma_gap <= 1e-9 implies a5_residual <= 1e-7"},
                               {"pass", eq_ok}};
    ok = ok && eq_ok;

    auto suite = nlohmann::ordered_json::array();
    clock("vn_suite", [&] {
        Xoshiro256 rng(stream_seed(c.seed, 0x766eULL));
        for (int k = 0; k < c.vn_polys; ++k) {
            const std::size_t deg = std::min<std::size_t>(3, c.N);
            const NcPoly p = random_poly(e.d(), deg, rng);
            const MsReport r = vn_check(e, p, p.degree() + kDefaultFockHeadroom, c.check_tol, Hypothesis::verified,
                                        c.capacity);
            auto j = detail::ms_json(r);
            j["poly"] = render(p);
            suite.push_back(std::move(j));
            ok = ok && r.pass;
        }
        return 0;
    });
    stages["vn_suite"] = std::move(suite);

    body["verdict"] = ok ? "pass" : "fail";
    rep.exit_code = ok ? kExitPass : kExitMathFail;
    return rep;
}

inline NcPoly parse_config_poly(const RunConfig& c, std::optional<int> fallback_d = std::nullopt) {
    if (c.poly.empty()) throw ValidationError("config: --poly is required");
    int d = c.poly_alphabet.value_or(fallback_d.value_or(0));
    if (d == 0) d = infer_alphabet(c.poly);
    return parse_ncpoly(c.poly, d);
}

/// Fock norm convergence table over M = deg p .. deg p + levels.
inline Report run_norms(const RunConfig& c) {
    Report rep;
    detail::StageClock clock(rep.timing);
    rep.body["config"] = detail::config_json(c, "norms");
    const NcPoly p = parse_config_poly(c);
    rep.body["poly"] = render(p);
    rep.body["alphabet"] = p.alphabet();
    rep.body["degree"] = p.degree();
    auto rows = nlohmann::ordered_json::array();
    std::ostringstream csv;
    csv << "M,value,gap,lower_bound\n";
    bool ok = true;
    clock("norms", [&] {
        double previous = std::nan("");
        for (std::size_t M = p.degree(); M <= p.degree() + c.levels; ++M) {
            const FockNorm f = fock_norm(p, M, c.capacity);
            const double gap = std::isnan(previous) ? 0.0 : f.value - previous;
            ok = ok && f.value >= f.lower_bound - 1e-12 && gap >= -1e-12;
            rows.push_back({{"M", M}, {"value", f.value}, {"gap", gap}, {"lower_bound", f.lower_bound},
                            {"dimension", f.dim}, {"iterative", f.iterative}});
            nlohmann::ordered_json v = f.value, g = gap, lb = f.lower_bound;
            csv << M << ',' << v.dump() << ',' << g.dump() << ',' << lb.dump() << '\n';
            previous = f.value;
        }
        return 0;
    });
    rep.body["table"] = std::move(rows);
    rep.body["verdict"] = ok ? "pass" : "fail";
    rep.exit_code = ok ? kExitPass : kExitMathFail;
    rep.csv = csv.str();
    return rep;
}

/// Functional calculus on one polynomial: von Neumann bound, compression
/// identity on the probes, radial Cauchy table and the radial limit.
inline Report run_calculus(const RunConfig& c) {
    c.validate();
    Report rep;
    detail::StageClock clock(rep.timing);
    auto& body = rep.body;
    body["config"] = detail::config_json(c, "calculus");
    const OperatorEnsemble e = clock("load", [&] { return resolve_ensemble(c); });
    body["ensemble"] = ensemble_summary(e);
    const NcPoly p = parse_config_poly(c, e.d());
    if (p.alphabet() != e.d()) throw AlphabetMismatch("calculus: polynomial alphabet differs from ensemble d");
    body["poly"] = render(p);
    body["coefficients"] = "finitely supported truncation as supplied";

    const std::size_t N = std::max(c.N, std::max<std::size_t>(p.degree(), 1));
    const std::size_t M = std::max(c.M_fock, N);
    body["depth_used"] = N;
    body["fock_used"] = M;
    bool ok = true;

    const BlockKernel K = clock("kernel", [&] { return assemble_kernel(e, N, c.capacity); });
    const OrderResult order = pd_order_check(K, c.pd_tol);
    const Hypothesis h = order.dominated ? Hypothesis::verified : Hypothesis::failed;
    body["domination"] = {{"verdict", order.dominated ? "Dominated" : "NotDominated"}, {"margin", order.margin}};

    const MsReport vn = clock("vn", [&] {
        return vn_check(e, p, p.degree() + kDefaultFockHeadroom, c.check_tol, h, c.capacity);
    });
    body["vn"] = detail::ms_json(vn);
    ok = ok && vn.pass;

    RadialSeries series{p, c.r_grid.empty() ? dyadic_grid(c.r_points) : c.r_grid, default_probes(e.n(), c.seed)};
    series.validate();
    const MsSotLimit lim = ms_sot_limit(e, series);
    body["radial_limit"] = {{"r_max", series.r_grid.back()}, {"distances", lim.distances}};

    if (!order.dominated) {
        body["verdict"] = "fail";
        rep.exit_code = kExitMathFail;
        return rep;
    }

    const GnsModel g = build_shifts(kolmogorov_factorize(K, c.rank_tol), K, c.pd_tol);
    const DilationModel m = clock("dilation", [&] { return build_dilation(g, M, c.capacity); });
    const DilationProbe probe(m, p.degree());

    auto comp = nlohmann::ordered_json::array();
    for (const auto& u : series.probes) {
        const CompressionResult cr = compression_identity_check(e, probe, p, u);
        const double lim_u = 1e-8 * (1.0 + cr.lhs);
        comp.push_back({{"lhs", cr.lhs}, {"rhs", cr.rhs}, {"gap", cr.gap}, {"tolerance", lim_u}, {"pass", cr.gap <= lim_u}});
        ok = ok && cr.gap <= lim_u;
    }
    body["compression"] = std::move(comp);

    const RadialReport rad = clock("radial", [&] { return radial_diagnostic(e, K, m, series); });
    auto rows = nlohmann::ordered_json::array();
    std::ostringstream csv;
    csv << "probe,r,s,difference,dilation,identity_gap\n";
    for (const auto& row : rad.rows) {
        rows.push_back({{"probe", row.probe}, {"r", row.r}, {"s", row.s}, {"difference", row.difference},
                        {"dilation", row.dilation}, {"identity_gap", row.identity_gap}});
        nlohmann::ordered_json r = row.r, s = row.s, dv = row.difference, dl = row.dilation, ig = row.identity_gap;
        csv << row.probe << ',' << r.dump() << ',' << s.dump() << ',' << dv.dump() << ',' << dl.dump() << ','
            << ig.dump() << '\n';
    }
    body["radial"] = {{"rows", std::move(rows)},
                      {"cauchy_monotone", rad.cauchy_monotone},
                      {"max_identity_gap", detail::judged(rad.max_identity_gap, 1e-8, rad.max_identity_gap <= 1e-8, "<= tol")}};
    ok = ok && rad.max_identity_gap <= 1e-8;
    rep.csv = csv.str();

    body["verdict"] = ok ? "pass" : "fail";
    rep.exit_code = ok ? kExitPass : kExitMathFail;
    return rep;
}

/// Writes a generated ensemble; the report records where and what.
inline Report run_generate(const RunConfig& c, const std::string& out_path) {
    Report rep;
    rep.body["config"] = detail::config_json(c, "generate");
    if (c.scenario_path) throw ValidationError("generate: --scenario makes no sense here");
    const OperatorEnsemble e = resolve_ensemble(c);
    save_ensemble(e, out_path);
    rep.body["ensemble"] = ensemble_summary(e);
    rep.body["out"] = out_path;
    rep.body["verdict"] = "pass";
    return rep;
}

} // namespace momdil
