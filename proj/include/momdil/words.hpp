#pragma once

// Words of the free semigroup on letters {1,...,d} and their graded
// truncations. The canonical basis order everywhere is graded lexicographic:
// first by length, then lexicographically on letters. Under that order the
// words of length <= N-1 are a prefix of the words of length <= N, so
// truncating a kernel or a Fock space is a leading principal submatrix.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace momdil {

inline constexpr std::size_t kDefaultWordCapacity = 100000;

class Word {
public:
    Word() = default;
    explicit Word(int alphabet) : d_(alphabet) {
        if (alphabet < 1) throw RangeError("Word: alphabet size must be >= 1");
    }
    Word(int alphabet, std::vector<int> letters) : d_(alphabet), letters_(std::move(letters)) {
        if (alphabet < 1) throw RangeError("Word: alphabet size must be >= 1");
        for (int l : letters_)
            if (l < 1 || l > d_)
                throw GeneratorOutOfRange("Word: letter " + std::to_string(l) + " outside [1, " +
                                          std::to_string(d_) + "]");
    }
    Word(int alphabet, std::initializer_list<int> letters) : Word(alphabet, std::vector<int>(letters)) {}

    static Word empty(int alphabet) { return Word(alphabet); }

    int alphabet() const noexcept { return d_; }
    std::size_t length() const noexcept { return letters_.size(); }
    bool is_empty() const noexcept { return letters_.empty(); }
    const std::vector<int>& letters() const noexcept { return letters_; }
    int operator[](std::size_t k) const { return letters_[k]; }
    int back() const { return letters_.back(); }

    /// The word with the last letter removed.
    Word parent() const {
        Word w = *this;
        w.letters_.pop_back();
        return w;
    }

    /// alpha -> alpha i
    Word append(int letter) const {
        if (letter < 1 || letter > d_) throw GeneratorOutOfRange("Word::append: letter out of range");
        Word w = *this;
        w.letters_.push_back(letter);
        return w;
    }

    /// alpha -> i alpha
    Word prepend(int letter) const {
        if (letter < 1 || letter > d_) throw GeneratorOutOfRange("Word::prepend: letter out of range");
        Word w(d_);
        w.letters_.reserve(letters_.size() + 1);
        w.letters_.push_back(letter);
        w.letters_.insert(w.letters_.end(), letters_.begin(), letters_.end());
        return w;
    }

    /// Graded lexicographic order (the alphabet must match).
    std::strong_ordering operator<=>(const Word& o) const {
        if (auto c = letters_.size() <=> o.letters_.size(); c != 0) return c;
        return letters_ <=> o.letters_;
    }
    bool operator==(const Word& o) const = default;

private:
    int d_ = 1;
    std::vector<int> letters_;
};

inline void require_same_alphabet(const Word& a, const Word& b, const char* what) {
    if (a.alphabet() != b.alphabet())
        throw AlphabetMismatch(std::string(what) + ": alphabet sizes " + std::to_string(a.alphabet()) + " and " +
                               std::to_string(b.alphabet()) + " differ");
}

inline Word concat(const Word& a, const Word& b) {
    require_same_alphabet(a, b, "concat");
    std::vector<int> letters = a.letters();
    letters.insert(letters.end(), b.letters().begin(), b.letters().end());
    return Word(a.alphabet(), std::move(letters));
}

inline Word reverse(const Word& a) {
    std::vector<int> letters(a.letters().rbegin(), a.letters().rend());
    return Word(a.alphabet(), std::move(letters));
}

/// "e" for the empty word, a digit string when d <= 9, dot-separated
/// integers otherwise ("10.2.3").
inline std::string render(const Word& w) {
    if (w.is_empty()) return "e";
    std::string out;
    for (std::size_t k = 0; k < w.length(); ++k) {
        if (w.alphabet() > 9 && k) out += '.';
        out += std::to_string(w[k]);
    }
    return out;
}

/// Inverse of render(); throws ParseError on malformed text.
inline Word parse_word(std::string_view text, int alphabet) {
    if (text == "e") return Word(alphabet);
    if (text.empty()) throw ParseError("parse_word: empty text");
    std::vector<int> letters;
    auto bad = [&] { return ParseError("parse_word: malformed word '" + std::string(text) + "'"); };
    if (alphabet <= 9) {
        for (char c : text) {
            if (c < '1' || c > '9') throw bad();
            letters.push_back(c - '0');
        }
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t dot = text.find('.', pos);
            const std::string_view tok = text.substr(pos, dot == std::string_view::npos ? text.size() - pos : dot - pos);
            if (tok.empty() || tok.size() > 9) throw bad();
            int v = 0;
            for (char c : tok) {
                if (c < '0' || c > '9') throw bad();
                v = v * 10 + (c - '0');
            }
            letters.push_back(v);
            if (dot == std::string_view::npos) break;
            pos = dot + 1;
        }
    }
    try {
        return Word(alphabet, std::move(letters));
    } catch (const GeneratorOutOfRange&) {
        throw bad();
    }
}

/// Number of words of length <= max_len over d letters, or nullopt-like
/// saturation to SIZE_MAX on overflow.
inline std::size_t count_words_upto(int d, std::size_t max_len) {
    constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
    std::size_t total = 0, level = 1;
    for (std::size_t k = 0; k <= max_len; ++k) {
        if (total > kMax - level) return kMax;
        total += level;
        if (k < max_len) {
            if (level > kMax / static_cast<std::size_t>(d)) return kMax;
            level *= static_cast<std::size_t>(d);
        }
    }
    return total;
}

/// All words of length <= N in graded lexicographic order, with O(length)
/// index lookup computed arithmetically.
class WordTable {
public:
    WordTable(int d, std::size_t max_len, std::size_t capacity = kDefaultWordCapacity) : d_(d), max_len_(max_len) {
        if (d < 1) throw RangeError("WordTable: alphabet size must be >= 1");
        const std::size_t total = count_words_upto(d, max_len);
        if (total > capacity)
            throw CapacityExceeded("WordTable: " + std::to_string(total == std::numeric_limits<std::size_t>::max() ? 0 : total) +
                                   " words for d=" + std::to_string(d) + ", N=" + std::to_string(max_len) +
                                   " exceed capacity " + std::to_string(capacity));
        words_.reserve(total);
        level_offset_.reserve(max_len + 2);
        std::size_t level_size = 1;
        level_offset_.push_back(0);
        words_.push_back(Word(d));
        // each level is the previous level with every letter appended, which
        // keeps lexicographic order inside the level
        for (std::size_t len = 1; len <= max_len; ++len) {
            const std::size_t prev_begin = level_offset_.back();
            level_offset_.push_back(words_.size());
            for (std::size_t k = 0; k < level_size; ++k)
                for (int letter = 1; letter <= d; ++letter) words_.push_back(words_[prev_begin + k].append(letter));
            level_size *= static_cast<std::size_t>(d);
        }
        level_offset_.push_back(words_.size());
    }

    int alphabet() const noexcept { return d_; }
    std::size_t max_length() const noexcept { return max_len_; }
    std::size_t size() const noexcept { return words_.size(); }
    const std::vector<Word>& words() const noexcept { return words_; }
    const Word& operator[](std::size_t k) const { return words_[k]; }

    /// Index of the first word of the given length; level_begin(N+1) == size().
    std::size_t level_begin(std::size_t len) const { return level_offset_.at(len); }
    /// Number of words of length <= len.
    std::size_t count_upto(std::size_t len) const { return level_offset_.at(len + 1); }

    bool contains(const Word& w) const { return w.alphabet() == d_ && w.length() <= max_len_; }

    std::size_t index(const Word& w) const {
        if (w.alphabet() != d_) throw AlphabetMismatch("WordTable::index: alphabet mismatch");
        if (w.length() > max_len_) throw RangeError("WordTable::index: word '" + render(w) + "' longer than table");
        std::size_t pos = 0;
        for (int l : w.letters()) pos = pos * static_cast<std::size_t>(d_) + static_cast<std::size_t>(l - 1);
        return level_offset_[w.length()] + pos;
    }

private:
    int d_;
    std::size_t max_len_;
    std::vector<Word> words_;
    std::vector<std::size_t> level_offset_;
};

inline WordTable enumerate_words(int d, std::size_t max_len, std::size_t capacity = kDefaultWordCapacity) {
    return WordTable(d, max_len, capacity);
}

} // namespace momdil
