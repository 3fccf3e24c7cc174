#pragma once

// JSON scenario files:
//   {"d": 2, "n": 2, "label": "...",
//    "scenarios": [{"weight": 0.5, "ops": [{"rows": 2, "cols": 2, "re": [...], "im": [...]}, ...]}, ...]}
// Matrices are row-major. Doubles are written in shortest round-trip form so
// save -> load is bit exact.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ensemble.hpp"
#include "errors.hpp"
#include "linalg.hpp"

namespace momdil {

inline constexpr double kWeightRenormalizeTol = 1e-9;

inline nlohmann::ordered_json matrix_to_json(const ComplexMatrix& m) {
    nlohmann::ordered_json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> re, im;
    re.reserve(static_cast<std::size_t>(m.size()));
    im.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
    j["re"] = re;
    j["im"] = im;
    return j;
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j) {
    try {
        const auto rows = j.at("rows").get<Eigen::Index>();
        const auto cols = j.at("cols").get<Eigen::Index>();
        if (rows < 0 || cols < 0) throw ValidationError("matrix: negative dimension");
        const auto re = j.at("re").get<std::vector<double>>();
        std::vector<double> im;
        if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
        else im.assign(re.size(), 0.0);
        const auto count = static_cast<std::size_t>(rows * cols);
        if (re.size() != count || im.size() != count)
            throw ValidationError("matrix: expected " + std::to_string(count) + " entries, got re=" +
                                  std::to_string(re.size()) + " im=" + std::to_string(im.size()));
        ComplexMatrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) {
                const auto k = static_cast<std::size_t>(r * cols + c);
                m(r, c) = cplx(re[k], im[k]);
            }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("matrix: ") + e.what());
    }
}

inline nlohmann::ordered_json ensemble_to_json(const OperatorEnsemble& e) {
    nlohmann::ordered_json j;
    j["d"] = e.d();
    j["n"] = e.n();
    j["label"] = e.label();
    auto scen = nlohmann::ordered_json::array();
    for (const auto& s : e.scenarios()) {
        nlohmann::ordered_json js;
        js["weight"] = s.weight;
        auto ops = nlohmann::ordered_json::array();
        for (const auto& a : s.ops) ops.push_back(matrix_to_json(a));
        js["ops"] = std::move(ops);
        scen.push_back(std::move(js));
    }
    j["scenarios"] = std::move(scen);
    return j;
}

/// Weights summing to within 1e-9 of one are renormalized; anything further
/// off is rejected.
inline OperatorEnsemble ensemble_from_json(const nlohmann::json& j) {
    int d = 0;
    Eigen::Index n = 0;
    std::string label;
    std::vector<Scenario> scenarios;
    try {
        d = j.at("d").get<int>();
        n = j.at("n").get<Eigen::Index>();
        if (j.contains("label")) label = j.at("label").get<std::string>();
        for (const auto& js : j.at("scenarios")) {
            Scenario s;
            s.weight = js.at("weight").get<double>();
            for (const auto& jm : js.at("ops")) s.ops.push_back(matrix_from_json(jm));
            scenarios.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario file: ") + e.what());
    }
    double total = 0.0;
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
        if (!(scenarios[k].weight > 0.0) || !std::isfinite(scenarios[k].weight))
            throw ValidationError("scenario file: scenario " + std::to_string(k) + " has nonpositive weight");
        total += scenarios[k].weight;
    }
    if (!scenarios.empty()) {
        if (std::abs(total - 1.0) > kWeightRenormalizeTol)
            throw ValidationError("scenario file: weights sum to " + std::to_string(total) + ", expected 1");
        if (total != 1.0)
            for (auto& s : scenarios) s.weight /= total;
    }
    return OperatorEnsemble(d, n, std::move(scenarios), std::move(label));
}

inline OperatorEnsemble parse_ensemble(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("scenario file: ") + e.what());
    }
    return ensemble_from_json(j);
}

inline OperatorEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_ensemble: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ensemble(buf.str());
}

inline void save_ensemble(const OperatorEnsemble& e, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("save_ensemble: cannot write '" + path + "'");
    out << ensemble_to_json(e).dump(2) << '\n';
}

} // namespace momdil
