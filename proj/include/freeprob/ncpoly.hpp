#pragma once

// Words in the generators X_1..X_n and their exact-rational linear
// combinations: the free *-algebra the rest of the library differentiates,
// traces and truncates.

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/rational.hpp"

namespace freeprob {

// A word is a finite sequence of generator indices in {1,..,n}; the empty
// word is the unit.
struct Word {
    std::vector<int> letters;

    Word() = default;
    explicit Word(std::vector<int> l) : letters(std::move(l)) {}

    int degree() const { return int(letters.size()); }
    bool is_unit() const { return letters.empty(); }

    Word reversed() const {
        Word w = *this;
        std::reverse(w.letters.begin(), w.letters.end());
        return w;
    }

    Word concat(const Word& o) const {
        Word w = *this;
        w.letters.insert(w.letters.end(), o.letters.begin(), o.letters.end());
        return w;
    }

    Word sub(int from, int len) const {
        return Word(std::vector<int>(letters.begin() + from, letters.begin() + from + len));
    }

    int max_index() const {
        int m = 0;
        for (int l : letters) m = std::max(m, l);
        return m;
    }

    // Graded lexicographic order keeps term maps deterministic.
    bool operator<(const Word& o) const {
        if (letters.size() != o.letters.size()) return letters.size() < o.letters.size();
        return letters < o.letters;
    }
    bool operator==(const Word& o) const { return letters == o.letters; }
    bool operator!=(const Word& o) const { return letters != o.letters; }

    std::string str() const {
        if (letters.empty()) return "1";
        std::string s;
        for (size_t i = 0; i < letters.size(); ++i) {
            if (i) s += "*";
            s += "X" + std::to_string(letters[i]);
        }
        return s;
    }
};

inline Word word_of(std::initializer_list<int> l) { return Word(std::vector<int>(l)); }

namespace detail {

// Shared canonical-form term map plumbing for NcPoly and the tensor ranks.
template <class Key>
class TermMap {
  public:
    using Terms = std::map<Key, Rational>;

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    size_t term_count() const { return terms_.size(); }

    void add_term(const Key& k, const Rational& c) {
        if (freeprob::is_zero(c)) return;
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, c);
        } else {
            it->second += c;
            if (freeprob::is_zero(it->second)) terms_.erase(it);
        }
    }

    Rational coeff(const Key& k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? Rational(0) : it->second;
    }

  protected:
    Terms terms_;
};

}  // namespace detail

class NcPoly : public detail::TermMap<Word> {
  public:
    NcPoly() : n_(0) {}
    explicit NcPoly(int n) : n_(n) {
        if (n < 0) throw std::invalid_argument("negative generator count");
    }

    static NcPoly zero(int n) { return NcPoly(n); }

    static NcPoly unit(int n) {
        NcPoly p(n);
        p.add_term(Word{}, 1);
        return p;
    }

    static NcPoly generator(int i, int n) {
        if (i < 1 || i > n) throw std::out_of_range("generator index out of range");
        NcPoly p(n);
        p.add_term(Word({i}), 1);
        return p;
    }

    static NcPoly monomial(const Word& w, int n, const Rational& c = Rational(1)) {
        if (w.max_index() > n) throw std::out_of_range("word letter exceeds generator count");
        NcPoly p(n);
        p.add_term(w, c);
        return p;
    }

    int gens() const { return n_; }

    int degree() const {  // degree of 0 is -1 by convention
        int d = -1;
        for (auto& [w, c] : terms_) d = std::max(d, w.degree());
        return d;
    }

    NcPoly& operator+=(const NcPoly& o) {
        check_same_gens(o);
        for (auto& [w, c] : o.terms_) add_term(w, c);
        return *this;
    }
    NcPoly& operator-=(const NcPoly& o) {
        check_same_gens(o);
        for (auto& [w, c] : o.terms_) add_term(w, -c);
        return *this;
    }
    NcPoly& operator*=(const Rational& s) {
        if (freeprob::is_zero(s)) {
            terms_.clear();
            return *this;
        }
        for (auto& [w, c] : terms_) c *= s;
        return *this;
    }

    friend NcPoly operator+(NcPoly a, const NcPoly& b) { return a += b; }
    friend NcPoly operator-(NcPoly a, const NcPoly& b) { return a -= b; }
    friend NcPoly operator*(NcPoly a, const Rational& s) { return a *= s; }
    friend NcPoly operator*(const Rational& s, NcPoly a) { return a *= s; }
    friend NcPoly operator-(const NcPoly& a) { return a * Rational(-1); }

    friend NcPoly operator*(const NcPoly& a, const NcPoly& b) { return mul(a, b); }

    // Concatenation product, extended bilinearly.
    static NcPoly mul(const NcPoly& a, const NcPoly& b) {
        a.check_same_gens(b);
        NcPoly p(a.n_);
        for (auto& [u, cu] : a.terms_)
            for (auto& [v, cv] : b.terms_) p.add_term(u.concat(v), cu * cv);
        return p;
    }

    bool operator==(const NcPoly& o) const { return n_ == o.n_ && terms_ == o.terms_; }
    bool operator!=(const NcPoly& o) const { return !(*this == o); }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [w, c] : terms_) {
            Rational a = c;
            if (first) {
                if (sgn(a) < 0) { os << "-"; a = -a; }
            } else {
                os << (sgn(a) < 0 ? " - " : " + ");
                if (sgn(a) < 0) a = -a;
            }
            if (w.is_unit()) {
                os << to_string(a);
            } else if (a == 1) {
                os << w.str();
            } else {
                os << to_string(a) << "*" << w.str();
            }
            first = false;
        }
        return os.str();
    }

  private:
    void check_same_gens(const NcPoly& o) const {
        if (n_ != o.n_) throw std::invalid_argument("mismatched generator counts");
    }

    int n_;
};

// Star involution: reverses each word; rational coefficients are their own
// conjugates. Anti-automorphism: (pq)* = q* p*.
inline NcPoly star(const NcPoly& p) {
    NcPoly q(p.gens());
    for (auto& [w, c] : p.terms()) q.add_term(w.reversed(), c);
    return q;
}

inline bool is_self_adjoint(const NcPoly& p) { return p == star(p); }

inline NcPoly commutator(const NcPoly& a, const NcPoly& b) { return a * b - b * a; }

}  // namespace freeprob
