#pragma once

// Free difference quotients, cyclic gradients and second-order quotients on
// non-commutative polynomials. Everything here is exact and purely symbolic.

#include <stdexcept>
#include <vector>

#include "freeprob/ncpoly.hpp"
#include "freeprob/tensor.hpp"

namespace freeprob {

namespace detail {
inline void check_index(int i, int n) {
    if (i < 1 || i > n) throw std::out_of_range("derivative index out of range");
}
}  // namespace detail

// d_i, determined by d_i(X_j) = delta_ij 1 (x) 1: on a word w the sum of
// u (x) v over decompositions w = u X_i v.
inline TensorPoly2 fdq(int i, const NcPoly& p) {
    detail::check_index(i, p.gens());
    TensorPoly2 out(p.gens());
    for (auto& [w, c] : p.terms()) {
        for (int k = 0; k < w.degree(); ++k) {
            if (w.letters[k] != i) continue;
            out.add_term({w.sub(0, k), w.sub(k + 1, w.degree() - k - 1)}, c);
        }
    }
    return out;
}

// Cyclic gradient D_i: each occurrence w = A X_i B contributes BA.
inline NcPoly cyclic_grad(int i, const NcPoly& p) {
    detail::check_index(i, p.gens());
    NcPoly out(p.gens());
    for (auto& [w, c] : p.terms()) {
        for (int k = 0; k < w.degree(); ++k) {
            if (w.letters[k] != i) continue;
            out.add_term(w.sub(k + 1, w.degree() - k - 1).concat(w.sub(0, k)), c);
        }
    }
    return out;
}

struct Gradient {
    std::vector<TensorPoly2> components;  // length exactly n

    explicit Gradient(const NcPoly& p) {
        components.reserve(p.gens());
        for (int i = 1; i <= p.gens(); ++i) components.push_back(fdq(i, p));
    }
};

enum class Leg { Left, Right };

// Apply d_j to one leg of each simple tensor.
inline TensorPoly3 tensor_fdq(int j, Leg side, const TensorPoly2& u) {
    detail::check_index(j, u.gens());
    TensorPoly3 out(u.gens());
    for (auto& [k, c] : u.terms()) {
        const Word& w = (side == Leg::Left) ? k.first : k.second;
        for (int t = 0; t < w.degree(); ++t) {
            if (w.letters[t] != j) continue;
            Word a = w.sub(0, t), b = w.sub(t + 1, w.degree() - t - 1);
            if (side == Leg::Left)
                out.add_term({a, b, k.second}, c);
            else
                out.add_term({k.first, a, b}, c);
        }
    }
    return out;
}

// (d_i (x) id) o d_j.
inline TensorPoly3 second_fdq_left(int i, int j, const NcPoly& p) {
    detail::check_index(i, p.gens());
    return tensor_fdq(i, Leg::Left, fdq(j, p));
}

// (id (x) d_i) o d_j.
inline TensorPoly3 second_fdq_right(int i, int j, const NcPoly& p) {
    detail::check_index(i, p.gens());
    return tensor_fdq(i, Leg::Right, fdq(j, p));
}

}  // namespace freeprob
