#pragma once

// Elements of M0 (x) M0 and M0 (x) M0 (x) M0, with the involutions and
// bimodule/sharp actions used throughout: dagger (a(x)b -> b*(x)a*), the
// flip, the legwise star, a(x*y)b bimodule action and the right-leg sharp
// products.

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "freeprob/ncpoly.hpp"

namespace freeprob {

using WordPair = std::pair<Word, Word>;
struct WordTriple {
    Word a, b, c;
    bool operator<(const WordTriple& o) const {
        if (!(a == o.a)) return a < o.a;
        if (!(b == o.b)) return b < o.b;
        return c < o.c;
    }
    bool operator==(const WordTriple& o) const { return a == o.a && b == o.b && c == o.c; }
};

namespace detail {

template <class Derived, class Key>
class TensorBase : public TermMap<Key> {
  public:
    TensorBase() : n_(0) {}
    explicit TensorBase(int n) : n_(n) {}

    int gens() const { return n_; }

    Derived& operator+=(const Derived& o) {
        check_same_gens(o);
        for (auto& [k, c] : o.terms()) this->add_term(k, c);
        return derived();
    }
    Derived& operator-=(const Derived& o) {
        check_same_gens(o);
        for (auto& [k, c] : o.terms()) this->add_term(k, -c);
        return derived();
    }
    Derived& operator*=(const Rational& s) {
        if (freeprob::is_zero(s)) {
            this->terms_.clear();
            return derived();
        }
        for (auto& [k, c] : this->terms_) c *= s;
        return derived();
    }

    friend Derived operator+(Derived a, const Derived& b) { return a += b; }
    friend Derived operator-(Derived a, const Derived& b) { return a -= b; }
    friend Derived operator*(Derived a, const Rational& s) { return a *= s; }
    friend Derived operator*(const Rational& s, Derived a) { return a *= s; }
    friend Derived operator-(const Derived& a) { return a * Rational(-1); }

    bool operator==(const Derived& o) const { return n_ == o.n_ && this->terms_ == o.terms_; }
    bool operator!=(const Derived& o) const { return !(*this == o); }

    void check_same_gens(const TensorBase& o) const {
        if (n_ != o.n_) throw std::invalid_argument("mismatched generator counts");
    }

  protected:
    Derived& derived() { return static_cast<Derived&>(*this); }
    int n_;
};

}  // namespace detail

class TensorPoly2 : public detail::TensorBase<TensorPoly2, WordPair> {
  public:
    TensorPoly2() = default;
    explicit TensorPoly2(int n) : TensorBase(n) {}

    static TensorPoly2 zero(int n) { return TensorPoly2(n); }

    static TensorPoly2 unit(int n) {  // 1 (x) 1
        TensorPoly2 u(n);
        u.add_term({Word{}, Word{}}, 1);
        return u;
    }

    static TensorPoly2 simple(const Word& a, const Word& b, int n, const Rational& c = Rational(1)) {
        TensorPoly2 t(n);
        t.add_term({a, b}, c);
        return t;
    }

    int degree() const {  // total degree over both legs; -1 for 0
        int d = -1;
        for (auto& [k, c] : terms_) d = std::max(d, k.first.degree() + k.second.degree());
        return d;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [k, c] : terms_) {
            Rational a = c;
            if (first) {
                if (sgn(a) < 0) { os << "-"; a = -a; }
            } else {
                os << (sgn(a) < 0 ? " - " : " + ");
                if (sgn(a) < 0) a = -a;
            }
            if (a != 1) os << to_string(a) << "*";
            os << k.first.str() << " (x) " << k.second.str();
            first = false;
        }
        return os.str();
    }
};

class TensorPoly3 : public detail::TensorBase<TensorPoly3, WordTriple> {
  public:
    TensorPoly3() = default;
    explicit TensorPoly3(int n) : TensorBase(n) {}

    static TensorPoly3 zero(int n) { return TensorPoly3(n); }

    static TensorPoly3 simple(const Word& a, const Word& b, const Word& c, int n,
                              const Rational& coeff = Rational(1)) {
        TensorPoly3 t(n);
        t.add_term({a, b, c}, coeff);
        return t;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [k, c] : terms_) {
            Rational a = c;
            if (first) {
                if (sgn(a) < 0) { os << "-"; a = -a; }
            } else {
                os << (sgn(a) < 0 ? " - " : " + ");
                if (sgn(a) < 0) a = -a;
            }
            if (a != 1) os << to_string(a) << "*";
            os << k.a.str() << " (x) " << k.b.str() << " (x) " << k.c.str();
            first = false;
        }
        return os.str();
    }
};

// (a (x) b)^dagger = b* (x) a*: the Hilbert-Schmidt real structure.
inline TensorPoly2 dagger(const TensorPoly2& u) {
    TensorPoly2 v(u.gens());
    for (auto& [k, c] : u.terms()) v.add_term({k.second.reversed(), k.first.reversed()}, c);
    return v;
}

// Flip sigma(a (x) b) = b (x) a.
inline TensorPoly2 flip(const TensorPoly2& u) {
    TensorPoly2 v(u.gens());
    for (auto& [k, c] : u.terms()) v.add_term({k.second, k.first}, c);
    return v;
}

// Legwise star (a (x) b)* = a* (x) b*: the involution of M (x) M^op.
inline TensorPoly2 star2(const TensorPoly2& u) {
    TensorPoly2 v(u.gens());
    for (auto& [k, c] : u.terms()) v.add_term({k.first.reversed(), k.second.reversed()}, c);
    return v;
}

// Bimodule action a (x (x) y) b = (a x) (x) (y b), extended linearly.
inline TensorPoly2 bimodule_act(const NcPoly& a, const TensorPoly2& u, const NcPoly& b) {
    if (a.gens() != u.gens() || b.gens() != u.gens())
        throw std::invalid_argument("mismatched generator counts");
    TensorPoly2 v(u.gens());
    for (auto& [wa, ca] : a.terms())
        for (auto& [k, c] : u.terms())
            for (auto& [wb, cb] : b.terms())
                v.add_term({wa.concat(k.first), k.second.concat(wb)}, ca * c * cb);
    return v;
}

// Right-leg product (a (x) b) # (x (x) y) = ax (x) yb: the multiplication of
// M (x) M^op acting on the tensor square. Associative with unit 1 (x) 1.
inline TensorPoly2 sharp2(const TensorPoly2& u, const TensorPoly2& v) {
    u.check_same_gens(v);
    TensorPoly2 w(u.gens());
    for (auto& [ku, cu] : u.terms())
        for (auto& [kv, cv] : v.terms())
            w.add_term({ku.first.concat(kv.first), kv.second.concat(ku.second)}, cu * cv);
    return w;
}

// (a (x) b) # (d (x) e (x) f) = ad (x) e (x) bf.
inline TensorPoly3 sharp23(const TensorPoly2& u, const TensorPoly3& t) {
    if (u.gens() != t.gens()) throw std::invalid_argument("mismatched generator counts");
    TensorPoly3 w(u.gens());
    for (auto& [ku, cu] : u.terms())
        for (auto& [kt, ct] : t.terms())
            w.add_term({ku.first.concat(kt.a), kt.b, ku.second.concat(kt.c)}, cu * ct);
    return w;
}

inline TensorPoly2 tensor_of(const NcPoly& a, const NcPoly& b) {
    if (a.gens() != b.gens()) throw std::invalid_argument("mismatched generator counts");
    TensorPoly2 t(a.gens());
    for (auto& [wa, ca] : a.terms())
        for (auto& [wb, cb] : b.terms()) t.add_term({wa, wb}, ca * cb);
    return t;
}

// Slice maps against a functional phi on words (used with phi = trace):
// (phi (x) id)(a (x) b) = phi(a) b and (id (x) phi)(a (x) b) = phi(b) a.
template <class Phi>
NcPoly slice_left(const TensorPoly2& u, Phi&& phi) {
    NcPoly p(u.gens());
    for (auto& [k, c] : u.terms()) p.add_term(k.second, c * phi(k.first));
    return p;
}

template <class Phi>
NcPoly slice_right(const TensorPoly2& u, Phi&& phi) {
    NcPoly p(u.gens());
    for (auto& [k, c] : u.terms()) p.add_term(k.first, c * phi(k.second));
    return p;
}

}  // namespace freeprob
