#pragma once

// Seeded generators for random words, polynomials, self-adjoint potentials
// and covariance models. Draws come from raw mt19937_64 output so streams are
// identical across standard libraries.

#include <random>
#include <vector>

#include "freeprob/linalg.hpp"
#include "freeprob/ncpoly.hpp"
#include "freeprob/state.hpp"
#include "freeprob/tensor.hpp"

namespace freeprob {

class RandomGen {
  public:
    explicit RandomGen(uint64_t seed) : rng_(seed) {}

    uint64_t raw() { return rng_(); }

    int uniform(int lo, int hi) {  // inclusive bounds
        return lo + int(rng_() % uint64_t(hi - lo + 1));
    }

    Rational small_rational(int max_abs_num = 4, int max_den = 3) {
        long num = uniform(-max_abs_num, max_abs_num);
        long den = uniform(1, max_den);
        return rat(num, den);
    }

    Word word(int n, int max_degree) {
        int len = uniform(0, max_degree);
        std::vector<int> letters(len);
        for (int k = 0; k < len; ++k) letters[k] = uniform(1, n);
        return Word(std::move(letters));
    }

    NcPoly poly(int n, int max_degree, int terms = 4) {
        NcPoly p(n);
        for (int t = 0; t < terms; ++t) p.add_term(word(n, max_degree), small_rational());
        return p;
    }

    NcPoly self_adjoint_poly(int n, int max_degree, int terms = 3) {
        NcPoly p = poly(n, max_degree, terms);
        return (p + star(p)) * rat(1, 2);
    }

    TensorPoly2 tensor2(int n, int max_leg_degree, int terms = 3) {
        TensorPoly2 u(n);
        for (int t = 0; t < terms; ++t)
            u.add_term({word(n, max_leg_degree), word(n, max_leg_degree)}, small_rational());
        return u;
    }

    // Quadratic plus a small self-adjoint perturbation: a potential whose
    // cyclic gradient is a nontrivial conjugate candidate.
    NcPoly potential(int n, int max_degree = 4, int terms = 2) {
        NcPoly V(n);
        for (int j = 1; j <= n; ++j) {
            NcPoly Xj = NcPoly::generator(j, n);
            V += rat(1, 2) * (Xj * Xj);
        }
        V += self_adjoint_poly(n, max_degree, terms);
        return V;
    }

    // Random symmetric positive-definite rational matrix, as B^T B + I.
    RatMatrix spd_matrix(int n, int entry_range = 2) {
        RatMatrix B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) B(i, j) = rat(uniform(-entry_range, entry_range), uniform(1, 2));
        RatMatrix A = B.transposed() * B;
        for (int i = 0; i < n; ++i) A(i, i) += 1;
        return A;
    }

    CovarianceModel model(int n) { return CovarianceModel::from_quadratic_form(spd_matrix(n)); }

  private:
    std::mt19937_64 rng_;
};

}  // namespace freeprob
