#pragma once

// Noncommutative polynomials sum_alpha c_alpha Z^alpha over Z_1..Z_d.
//
// Text grammar (whitespace insensitive):
//   poly   := [sign] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := scalar | gen ('^' uint)? | '(' poly ')'
//   gen    := 'Z' uint
//   scalar := '(' [sign] real (('+'|'-') real 'i')? ')' | real
// A '(' is first tried as a complex scalar and, failing that, as a
// parenthesised polynomial. The optional leading sign is an extension.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "words.hpp"

namespace momdil {

class NcPoly {
public:
    using Coeffs = std::map<Word, cplx>;

    explicit NcPoly(int alphabet) : d_(alphabet) {
        if (alphabet < 1) throw RangeError("NcPoly: alphabet size must be >= 1");
    }

    static NcPoly constant(int alphabet, cplx c) {
        NcPoly p(alphabet);
        p.add_term(Word(alphabet), c);
        return p;
    }
    static NcPoly generator(int alphabet, int k) {
        NcPoly p(alphabet);
        p.add_term(Word(alphabet, {k}), 1.0);
        return p;
    }
    static NcPoly monomial(const Word& w, cplx c = 1.0) {
        NcPoly p(w.alphabet());
        p.add_term(w, c);
        return p;
    }

    int alphabet() const noexcept { return d_; }
    const Coeffs& coeffs() const noexcept { return coeffs_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    std::size_t term_count() const noexcept { return coeffs_.size(); }

    /// Maximum word length with a nonzero coefficient; 0 for the zero polynomial.
    std::size_t degree() const noexcept { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first.length(); }

    cplx coeff(const Word& w) const {
        auto it = coeffs_.find(w);
        return it == coeffs_.end() ? cplx{} : it->second;
    }

    /// Adds c to the coefficient of w, erasing the entry if it cancels to zero.
    void add_term(const Word& w, cplx c) {
        if (w.alphabet() != d_) throw AlphabetMismatch("NcPoly::add_term: word alphabet differs");
        if (c == cplx{}) return;
        auto [it, inserted] = coeffs_.try_emplace(w, c);
        if (!inserted) {
            it->second += c;
            if (it->second == cplx{}) coeffs_.erase(it);
        }
    }

    bool operator==(const NcPoly& o) const { return d_ == o.d_ && coeffs_ == o.coeffs_; }

private:
    int d_;
    Coeffs coeffs_;
};

inline void require_same_alphabet(const NcPoly& p, const NcPoly& q, const char* what) {
    if (p.alphabet() != q.alphabet())
        throw AlphabetMismatch(std::string(what) + ": polynomial alphabets " + std::to_string(p.alphabet()) + " and " +
                               std::to_string(q.alphabet()) + " differ");
}

inline NcPoly add(const NcPoly& p, const NcPoly& q) {
    require_same_alphabet(p, q, "add");
    NcPoly r = p;
    for (const auto& [w, c] : q.coeffs()) r.add_term(w, c);
    return r;
}

inline NcPoly scale(const NcPoly& p, cplx s) {
    NcPoly r(p.alphabet());
    for (const auto& [w, c] : p.coeffs()) r.add_term(w, s * c);
    return r;
}

/// (pq)_gamma = sum over alpha beta = gamma of p_alpha q_beta.
inline NcPoly multiply(const NcPoly& p, const NcPoly& q) {
    require_same_alphabet(p, q, "multiply");
    NcPoly r(p.alphabet());
    for (const auto& [a, ca] : p.coeffs())
        for (const auto& [b, cb] : q.coeffs()) r.add_term(concat(a, b), ca * cb);
    return r;
}

inline NcPoly operator+(const NcPoly& p, const NcPoly& q) { return add(p, q); }
inline NcPoly operator-(const NcPoly& p, const NcPoly& q) { return add(p, scale(q, -1.0)); }
inline NcPoly operator*(const NcPoly& p, const NcPoly& q) { return multiply(p, q); }
inline NcPoly operator*(cplx s, const NcPoly& p) { return scale(p, s); }

/// phi_r: c_alpha -> r^|alpha| c_alpha.
inline NcPoly radial_dilate(const NcPoly& p, double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw RangeError("radial_dilate: r must lie in [0, 1]");
    NcPoly out(p.alphabet());
    for (const auto& [w, c] : p.coeffs()) out.add_term(w, c * std::pow(r, static_cast<double>(w.length())));
    return out;
}

inline double coeff_l2_norm(const NcPoly& p) {
    double s = 0.0;
    for (const auto& [w, c] : p.coeffs()) s += std::norm(c);
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// rendering

namespace detail {

inline std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string render_scalar(cplx c) {
    std::string s = "(" + shortest(c.real());
    s += std::signbit(c.imag()) ? "-" : "+";
    s += shortest(std::abs(c.imag())) + "i)";
    return s;
}

} // namespace detail

/// Canonical text: terms in graded-lex order, each "(re+imi)*Z1*Z2".
/// parse_ncpoly(render(p), d) == p exactly.
inline std::string render(const NcPoly& p) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [w, c] : p.coeffs()) {
        if (!first) out += " + ";
        first = false;
        out += detail::render_scalar(c);
        for (int l : w.letters()) out += "*Z" + std::to_string(l);
    }
    return out;
}

// ---------------------------------------------------------------------------
// parsing

namespace detail {

class PolyParser {
public:
    PolyParser(std::string_view text, int d) : text_(text), d_(d) {}

    NcPoly parse() {
        skip_ws();
        if (pos_ == text_.size()) throw EmptyInput("parse_ncpoly: empty input");
        NcPoly p = poly();
        skip_ws();
        if (pos_ != text_.size()) fail({"'+'", "'-'", "'*'", "end of input"});
        return p;
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
        throw SyntaxError(pos_, std::move(expected), found);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool at_number() {
        skip_ws();
        return pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.');
    }

    NcPoly poly() {
        double sign = 1.0;
        if (accept('-')) sign = -1.0;
        else accept('+');
        NcPoly acc = scale(term(), sign);
        for (;;) {
            if (accept('+')) acc = add(acc, term());
            else if (accept('-')) acc = add(acc, scale(term(), -1.0));
            else return acc;
        }
    }

    NcPoly term() {
        NcPoly acc = factor();
        while (accept('*')) acc = multiply(acc, factor());
        return acc;
    }

    NcPoly factor() {
        skip_ws();
        if (pos_ >= text_.size()) fail({"number", "'Z'", "'('"});
        const char c = text_[pos_];
        if (c == 'Z') return generator_power();
        if (c == '(') {
            const std::size_t save = pos_;
            if (auto s = try_complex_scalar()) return NcPoly::constant(d_, *s);
            pos_ = save;
            ++pos_;
            NcPoly inner = poly();
            if (!accept(')')) fail({"'+'", "'-'", "'*'", "')'"});
            return inner;
        }
        if (at_number()) return NcPoly::constant(d_, real());
        fail({"number", "'Z'", "'('"});
    }

    NcPoly generator_power() {
        const std::size_t gen_pos = pos_;
        ++pos_; // 'Z'
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail({"generator index"});
        const unsigned long k = uint_value();
        if (k < 1 || k > static_cast<unsigned long>(d_))
            throw GeneratorOutOfRange("parse_ncpoly: generator Z" + std::to_string(k) + " at position " +
                                      std::to_string(gen_pos) + " outside 1.." + std::to_string(d_));
        unsigned long power = 1;
        if (accept('^')) {
            skip_ws();
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail({"exponent"});
            power = uint_value();
            if (power > 64) throw RangeError("parse_ncpoly: exponent too large");
        }
        return NcPoly::monomial(Word(d_, std::vector<int>(power, static_cast<int>(k))));
    }

    unsigned long uint_value() {
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        unsigned long v = 0;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc()) fail({"unsigned integer"});
        pos_ += static_cast<std::size_t>(res.ptr - first);
        return v;
    }

    double real() {
        skip_ws();
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        if (pos_ >= text_.size() || !(std::isdigit(static_cast<unsigned char>(*first)) || *first == '.')) fail({"number"});
        double v = 0.0;
        auto res = std::from_chars(first, last, v, std::chars_format::general);
        if (res.ec != std::errc() || !std::isfinite(v)) fail({"number"});
        pos_ += static_cast<std::size_t>(res.ptr - first);
        return v;
    }

    // '(' [sign] real (('+'|'-') real 'i')? ')'
    std::optional<cplx> try_complex_scalar() {
        try {
            ++pos_; // '('
            double sr = 1.0;
            if (accept('-')) sr = -1.0;
            else accept('+');
            if (!at_number()) return std::nullopt;
            const double re = sr * real();
            double im = 0.0;
            if (peek('+') || peek('-')) {
                const double si = text_[pos_] == '-' ? -1.0 : 1.0;
                ++pos_;
                if (!at_number()) return std::nullopt;
                im = si * real();
                if (!accept('i')) return std::nullopt;
            }
            if (!accept(')')) return std::nullopt;
            return cplx(re, im);
        } catch (const SyntaxError&) {
            return std::nullopt;
        }
    }

    std::string_view text_;
    int d_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline NcPoly parse_ncpoly(std::string_view text, int d) {
    return detail::PolyParser(text, d).parse();
}

/// Smallest alphabet that contains every generator index mentioned in text
/// (at least 1). Used when the caller does not state d.
inline int infer_alphabet(std::string_view text) {
    int d = 1;
    for (std::size_t k = 0; k < text.size(); ++k) {
        if (text[k] != 'Z') continue;
        std::size_t j = k + 1;
        int v = 0;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])) && v < 1000000)
            v = v * 10 + (text[j++] - '0');
        d = std::max(d, v);
    }
    return d;
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

/// Word products T^w = T_{w1}...T_{wk}, memoised through the parent word.
class WordProducts {
public:
    WordProducts(const std::vector<ComplexMatrix>& ops, Eigen::Index n) : ops_(ops), n_(n) {}

    const ComplexMatrix& get(const Word& w) {
        auto it = cache_.find(w);
        if (it != cache_.end()) return it->second;
        ComplexMatrix value = w.is_empty() ? ComplexMatrix(ComplexMatrix::Identity(n_, n_))
                                           : ComplexMatrix(get(w.parent()) * ops_[static_cast<std::size_t>(w.back() - 1)]);
        return cache_.emplace(w, std::move(value)).first->second;
    }

private:
    const std::vector<ComplexMatrix>& ops_;
    Eigen::Index n_;
    std::map<Word, ComplexMatrix> cache_;
};

inline Eigen::Index check_tuple(const std::vector<ComplexMatrix>& ops, int d, const char* what) {
    if (static_cast<int>(ops.size()) != d)
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(d) + " operators, got " +
                                std::to_string(ops.size()));
    if (ops.empty()) throw DimensionMismatch(std::string(what) + ": empty operator tuple");
    const Eigen::Index n = ops.front().rows();
    for (const auto& t : ops)
        if (t.rows() != n || t.cols() != n)
            throw DimensionMismatch(std::string(what) + ": operators must be square and of equal size");
    return n;
}

} // namespace detail

enum class Side { direct, adjoint };

/// direct: sum c_alpha T^alpha. adjoint: (sum c_alpha T^alpha)* computed as
/// sum conj(c_alpha) (T*)^{reversed alpha}.
inline ComplexMatrix evaluate_poly(const NcPoly& p, const std::vector<ComplexMatrix>& ops, Side side = Side::direct) {
    const Eigen::Index n = detail::check_tuple(ops, p.alphabet(), "evaluate_poly");
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    if (side == Side::direct) {
        detail::WordProducts prod(ops, n);
        for (const auto& [w, c] : p.coeffs()) out += c * prod.get(w);
    } else {
        std::vector<ComplexMatrix> adj;
        adj.reserve(ops.size());
        for (const auto& t : ops) adj.push_back(t.adjoint());
        detail::WordProducts prod(adj, n);
        for (const auto& [w, c] : p.coeffs()) out += std::conj(c) * prod.get(reverse(w));
    }
    return out;
}

/// Random polynomial of degree <= max_degree: each word of length <= max_degree
/// is kept with probability density and given a standard complex Gaussian
/// coefficient. Never returns the zero polynomial.
inline NcPoly random_poly(int d, std::size_t max_degree, Xoshiro256& rng, double density = 0.6) {
    const WordTable table(d, max_degree);
    NcPoly p(d);
    for (const Word& w : table.words())
        if (rng.uniform() < density) p.add_term(w, rng.complex_normal());
    if (p.is_zero()) p.add_term(table.words().back(), rng.complex_normal() + cplx(1e-3, 0.0));
    return p;
}

} // namespace momdil
