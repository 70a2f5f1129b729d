#pragma once

// The exact trace of a free semicircular family with prescribed covariance,
// evaluated by non-crossing pairing combinatorics, plus the induced inner
// products on polynomials and their tensor powers.

#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "freeprob/calculus.hpp"
#include "freeprob/linalg.hpp"
#include "freeprob/ncpoly.hpp"
#include "freeprob/tensor.hpp"

namespace freeprob {

namespace detail {

// Memoised word traces. Keys are the minimal cyclic rotation of the word,
// which is sound because the pairing trace is cyclically invariant for every
// covariance. Guarded so concurrent readers of a shared model stay consistent.
class TraceCache {
  public:
    std::optional<Rational> lookup(const std::string& key) const {
        std::lock_guard<std::mutex> g(mu_);
        auto it = memo_.find(key);
        if (it == memo_.end()) return std::nullopt;
        return it->second;
    }
    void store(const std::string& key, const Rational& v) {
        std::lock_guard<std::mutex> g(mu_);
        memo_.emplace(key, v);
    }

  private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, Rational> memo_;
};

inline std::string min_rotation_key(const std::vector<int>& w) {
    const size_t L = w.size();
    std::string best;
    for (size_t s = 0; s < L; ++s) {
        std::string cand(L, '\0');
        for (size_t k = 0; k < L; ++k) cand[k] = char(w[(s + k) % L]);
        if (s == 0 || cand < best) best = std::move(cand);
    }
    return best;
}

}  // namespace detail

// Symmetric positive-definite rational covariance fixing the trace of a
// semicircular family. The standard model is C = I.
class CovarianceModel {
  public:
    static CovarianceModel standard(int n) { return CovarianceModel(RatMatrix::identity(n)); }

    static CovarianceModel from_covariance(RatMatrix C) { return CovarianceModel(std::move(C)); }

    // C = A^{-1} for a quadratic-form matrix A; the linear conjugates are AX.
    static CovarianceModel from_quadratic_form(const RatMatrix& A) {
        if (!A.is_symmetric()) throw std::invalid_argument("quadratic-form matrix must be symmetric");
        if (!is_positive_definite(A))
            throw std::invalid_argument("quadratic-form matrix must be positive definite");
        auto C = inverse(A);
        CovarianceModel m(std::move(*C));
        m.A_ = A;
        return m;
    }

    int gens() const { return n_; }
    const RatMatrix& covariance() const { return C_; }
    bool is_standard() const { return C_ == RatMatrix::identity(n_); }

    // A = C^{-1}, cached.
    const RatMatrix& quadratic_form() const {
        if (!A_) A_ = *inverse(C_);
        return *A_;
    }

    // The conjugate system of the model: xi_i = sum_j A_ij X_j.
    std::vector<NcPoly> conjugates() const {
        const RatMatrix& A = quadratic_form();
        std::vector<NcPoly> xi;
        xi.reserve(n_);
        for (int i = 0; i < n_; ++i) {
            NcPoly p(n_);
            for (int j = 0; j < n_; ++j) p.add_term(Word({j + 1}), A(i, j));
            xi.push_back(std::move(p));
        }
        return xi;
    }

    // Sum over non-crossing pairings, by first-letter decomposition.
    Rational trace_word(const Word& w) const {
        if (w.max_index() > n_) throw std::out_of_range("word letter exceeds generator count");
        return trace_rec(w.letters);
    }

    Rational trace(const NcPoly& p) const {
        if (p.gens() > n_) throw std::invalid_argument("polynomial has more generators than model");
        Rational t(0);
        for (auto& [w, c] : p.terms()) t += c * trace_word(w);
        return t;
    }

    bool operator==(const CovarianceModel& o) const { return C_ == o.C_; }

  private:
    explicit CovarianceModel(RatMatrix C) : n_(C.rows()), C_(std::move(C)), cache_(std::make_shared<detail::TraceCache>()) {
        if (!C_.is_symmetric()) throw std::invalid_argument("covariance must be symmetric");
        if (!is_positive_definite(C_)) throw std::invalid_argument("covariance must be positive definite");
    }

    Rational trace_rec(const std::vector<int>& w) const {
        const size_t L = w.size();
        if (L == 0) return Rational(1);
        if (L % 2 == 1) return Rational(0);
        if (L == 2) return C_(w[0] - 1, w[1] - 1);
        const std::string key = detail::min_rotation_key(w);
        if (auto hit = cache_->lookup(key)) return *hit;
        // Pair position 0 with an odd position m; the pairing is non-crossing
        // iff the inside and outside segments pair among themselves.
        Rational total(0);
        for (size_t m = 1; m < L; m += 2) {
            const Rational& cw = C_(w[0] - 1, w[m] - 1);
            if (is_zero(cw)) continue;
            std::vector<int> inside(w.begin() + 1, w.begin() + m);
            std::vector<int> outside(w.begin() + m + 1, w.end());
            Rational ti = trace_rec(inside);
            if (is_zero(ti)) continue;
            total += cw * ti * trace_rec(outside);
        }
        cache_->store(key, total);
        return total;
    }

    int n_;
    RatMatrix C_;
    mutable std::optional<RatMatrix> A_;
    std::shared_ptr<detail::TraceCache> cache_;
};

inline Rational trace(const NcPoly& p, const CovarianceModel& m) { return m.trace(p); }

// <p, q> = tau(q* p).
inline Rational inner(const NcPoly& p, const NcPoly& q, const CovarianceModel& m) {
    return m.trace(star(q) * p);
}

inline Rational norm_sq(const NcPoly& p, const CovarianceModel& m) { return inner(p, p, m); }

// Legwise inner products; by traciality tau(y* x) = tau(x y*), so the M and
// M^op legs need no separate bookkeeping.
inline Rational tensor_inner(const TensorPoly2& u, const TensorPoly2& v, const CovarianceModel& m) {
    Rational t(0);
    for (auto& [ku, cu] : u.terms())
        for (auto& [kv, cv] : v.terms()) {
            Rational left = m.trace_word(kv.first.reversed().concat(ku.first));
            if (is_zero(left)) continue;
            Rational right = m.trace_word(ku.second.concat(kv.second.reversed()));
            if (is_zero(right)) continue;
            t += cu * cv * left * right;
        }
    return t;
}

inline Rational tensor_inner(const TensorPoly3& u, const TensorPoly3& v, const CovarianceModel& m) {
    Rational t(0);
    for (auto& [ku, cu] : u.terms())
        for (auto& [kv, cv] : v.terms()) {
            Rational a = m.trace_word(kv.a.reversed().concat(ku.a));
            if (is_zero(a)) continue;
            Rational b = m.trace_word(ku.b.concat(kv.b.reversed()));
            if (is_zero(b)) continue;
            Rational c = m.trace_word(ku.c.concat(kv.c.reversed()));
            if (is_zero(c)) continue;
            t += cu * cv * a * b * c;
        }
    return t;
}

inline Rational tensor_norm_sq(const TensorPoly2& u, const CovarianceModel& m) {
    return tensor_inner(u, u, m);
}

inline Rational tensor_norm_sq(const TensorPoly3& u, const CovarianceModel& m) {
    return tensor_inner(u, u, m);
}

// (tau (x) tau) of a rank-2 tensor.
inline Rational tau_tau(const TensorPoly2& u, const CovarianceModel& m) {
    Rational t(0);
    for (auto& [k, c] : u.terms()) {
        Rational a = m.trace_word(k.first);
        if (is_zero(a)) continue;
        t += c * a * m.trace_word(k.second);
    }
    return t;
}

// tau(xi_i P) - (tau (x) tau)(d_i P): zero iff the conjugate relation holds
// for this P. Exposed for arbitrary candidate xi so Schwinger-Dyson failure
// can be measured, not only certified.
inline Rational conjugate_relation_residual(int i, const NcPoly& xi, const NcPoly& P,
                                            const CovarianceModel& m) {
    detail::check_index(i, P.gens());
    return m.trace(xi * P) - tau_tau(fdq(i, P), m);
}

// (id (x) tau) and (tau (x) id) slices under the model trace.
inline NcPoly slice_id_tau(const TensorPoly2& u, const CovarianceModel& m) {
    return slice_right(u, [&](const Word& w) { return m.trace_word(w); });
}

inline NcPoly slice_tau_id(const TensorPoly2& u, const CovarianceModel& m) {
    return slice_left(u, [&](const Word& w) { return m.trace_word(w); });
}

}  // namespace freeprob
