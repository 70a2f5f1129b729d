#include <catch2/catch_amalgamated.hpp>

#include "freeprob/io.hpp"
#include "freeprob/parse.hpp"
#include "freeprob/random_gen.hpp"
#include "freeprob/spectral.hpp"
#include "freeprob/state.hpp"

using namespace freeprob;

namespace {

// Independent moment oracle: the single-variable recursion
// m_{k+1} = v * sum_{j=0}^{k-1} m_j m_{k-1-j} with m_0 = 1, m_1 = 0; odd
// moments vanish on their own and m_2 = v.
std::vector<Rational> semicircle_moments(int order, const Rational& v) {
    std::vector<Rational> m(order + 1, Rational(0));
    m[0] = 1;
    for (int k = 2; k <= order; ++k) {
        Rational s(0);
        for (int j = 0; j <= k - 2; ++j) s += m[j] * m[k - 2 - j];
        m[k] = v * s;
    }
    return m;
}

}  // namespace

TEST_CASE("word traces in the standard model", "[state]") {
    CovarianceModel m = CovarianceModel::standard(2);
    CHECK(m.trace_word(Word{}) == 1);
    CHECK(m.trace_word(Word({1, 1})) == 1);
    CHECK(m.trace_word(Word({1, 2, 1, 2})) == 0);
    CHECK(m.trace_word(Word({1, 2, 2, 1})) == 1);
    CHECK(m.trace_word(Word({1})) == 0);
    CHECK(m.trace_word(Word({1, 1, 2})) == 0);
}

TEST_CASE("single-variable moments follow the recursion oracle", "[state]") {
    CovarianceModel m = CovarianceModel::standard(1);
    std::vector<Rational> expect = semicircle_moments(10, Rational(1));
    NcPoly s = parse_poly("X1", 1), p = NcPoly::unit(1);
    for (int k = 1; k <= 10; ++k) {
        p = p * s;
        CHECK(m.trace(p) == expect[k]);
    }
    CHECK(expect[4] == 2);
    CHECK(expect[6] == 5);
    CHECK(expect[8] == 14);

    // variance-v semicircular: X1 under C = (v)
    RatMatrix C(1, 1);
    C(0, 0) = rat(3, 2);
    CovarianceModel mv = CovarianceModel::from_covariance(C);
    std::vector<Rational> expect_v = semicircle_moments(8, rat(3, 2));
    NcPoly q = NcPoly::unit(1);
    for (int k = 1; k <= 8; ++k) {
        q = q * s;
        CHECK(mv.trace(q) == expect_v[k]);
    }
}

TEST_CASE("trace is unital, centered on generators, tracial", "[state][property]") {
    RandomGen rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        int n = rng.uniform(1, 3);
        CovarianceModel m = rng.model(n);
        CHECK(m.trace(NcPoly::unit(n)) == 1);
        for (int i = 1; i <= n; ++i) CHECK(m.trace(NcPoly::generator(i, n)) == 0);
        NcPoly p = rng.poly(n, 4), q = rng.poly(n, 4);
        CHECK(m.trace(p * q) == m.trace(q * p));
    }
}

TEST_CASE("trace is invariant under cyclic rotation of words", "[state][property]") {
    RandomGen rng(32);
    for (int rep = 0; rep < 40; ++rep) {
        int n = rng.uniform(1, 3);
        CovarianceModel m = rng.model(n);
        Word w = rng.word(n, 8);
        if (w.degree() == 0) continue;
        Rational t = m.trace_word(w);
        for (int r = 1; r < w.degree(); ++r) {
            Word rot = w.sub(r, w.degree() - r).concat(w.sub(0, r));
            CHECK(m.trace_word(rot) == t);
        }
    }
}

TEST_CASE("trace is invariant under relabeling matched by permuting C", "[state][property]") {
    RandomGen rng(33);
    for (int rep = 0; rep < 25; ++rep) {
        int n = 3;
        CovarianceModel m = rng.model(n);
        std::vector<int> perm = {1, 2, 3};
        std::swap(perm[size_t(rng.uniform(0, 2))], perm[size_t(rng.uniform(0, 2))]);
        RatMatrix Cp(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Cp(i, j) = m.covariance()(perm[i] - 1, perm[j] - 1);
        CovarianceModel mp = CovarianceModel::from_covariance(Cp);
        Word w = rng.word(n, 8);
        Word relabeled = w;
        for (int& l : relabeled.letters)
            l = int(std::find(perm.begin(), perm.end(), l) - perm.begin()) + 1;
        CHECK(m.trace_word(w) == mp.trace_word(relabeled));
    }
}

TEST_CASE("L2 inner product", "[state]") {
    CovarianceModel m = CovarianceModel::standard(2);
    CHECK(inner(parse_poly("X1", 2), parse_poly("X1", 2), m) == 1);

    RatMatrix C(2, 2);
    C(0, 0) = 1; C(1, 1) = 1; C(0, 1) = rat(1, 2); C(1, 0) = rat(1, 2);
    CovarianceModel mc = CovarianceModel::from_covariance(C);
    CHECK(inner(parse_poly("X1", 2), parse_poly("X2", 2), mc) == rat(1, 2));

    RandomGen rng(34);
    for (int rep = 0; rep < 25; ++rep) {
        NcPoly p = rng.poly(2, 5);
        Rational nsq = norm_sq(p, mc);
        CHECK(sgn(nsq) >= 0);
        CHECK((is_zero(nsq)) == p.is_zero());
    }
}

TEST_CASE("Gram matrices are positive definite", "[state]") {
    RandomGen rng(35);
    CovarianceModel m1 = CovarianceModel::standard(1);
    CHECK(is_positive_definite(TruncatedSpace(m1, 6).gram()));
    for (int rep = 0; rep < 3; ++rep) {
        CovarianceModel m = rng.model(2);
        CHECK(is_positive_definite(TruncatedSpace(m, rep == 0 ? 4 : 3).gram()));
    }
}

TEST_CASE("tensor inner products", "[state]") {
    CovarianceModel m = CovarianceModel::standard(2);
    CHECK(tensor_inner(TensorPoly2::unit(2), TensorPoly2::unit(2), m) == 1);

    RandomGen rng(36);
    for (int rep = 0; rep < 30; ++rep) {
        int n = rng.uniform(1, 3);
        CovarianceModel mm = rng.model(n);
        NcPoly x = rng.poly(n, 4);
        TensorPoly2 t = tensor_of(x, NcPoly::unit(n)) - tensor_of(NcPoly::unit(n), x);
        NcPoly centered = x - NcPoly::unit(n) * mm.trace(x);
        CHECK(tensor_norm_sq(t, mm) == Rational(2) * norm_sq(centered, mm));
    }
}

TEST_CASE("tensor inner product agrees with the Gram contraction", "[state][property]") {
    RandomGen rng(37);
    CovarianceModel m = rng.model(2);
    TensorSpace2 s2(m, 4);
    RatMatrix G2 = s2.gram();
    for (int rep = 0; rep < 15; ++rep) {
        NcPoly p = rng.poly(2, 3), q = rng.poly(2, 3);
        TensorPoly2 u = fdq(1, p), v = fdq(1, q);
        std::vector<Rational> cu = s2.expand(u), cv = s2.expand(v);
        Rational via_gram(0);
        for (int i = 0; i < s2.dim(); ++i) {
            if (is_zero(cu[i])) continue;
            for (int j = 0; j < s2.dim(); ++j) via_gram += cv[j] * G2(j, i) * cu[i];
        }
        CHECK(via_gram == tensor_inner(u, v, m));
    }
}

TEST_CASE("conjugate relation residuals", "[state]") {
    RandomGen rng(38);
    CovarianceModel std2 = CovarianceModel::standard(2);
    for (int rep = 0; rep < 20; ++rep) {
        NcPoly p = rng.poly(2, 6);
        for (int i = 1; i <= 2; ++i)
            CHECK(is_zero(conjugate_relation_residual(i, NcPoly::generator(i, 2), p, std2)));
    }
    for (int rep = 0; rep < 10; ++rep) {
        CovarianceModel m = rng.model(2);
        std::vector<NcPoly> xi = m.conjugates();
        NcPoly p = rng.poly(2, 6);
        for (int i = 1; i <= 2; ++i) CHECK(is_zero(conjugate_relation_residual(i, xi[i - 1], p, m)));
    }
    CHECK(conjugate_relation_residual(1, parse_poly("X2", 2), parse_poly("X1", 2), std2) == rat(-1));
}

TEST_CASE("model JSON round trip and validation", "[state][io]") {
    RandomGen rng(39);
    CovarianceModel m = rng.model(3);
    json j = model_to_json(m);
    CovarianceModel back = model_from_json(j);
    CHECK(back.covariance() == m.covariance());

    RatMatrix bad(2, 2);
    bad(0, 0) = 1; bad(0, 1) = 2; bad(1, 0) = 3; bad(1, 1) = 1;
    CHECK_THROWS_AS(CovarianceModel::from_covariance(bad), std::invalid_argument);
    RatMatrix indef(2, 2);
    indef(0, 0) = 1; indef(0, 1) = 2; indef(1, 0) = 2; indef(1, 1) = 1;
    CHECK_THROWS_AS(CovarianceModel::from_covariance(indef), std::invalid_argument);

    json ja;
    ja["n"] = 2;
    ja["A"] = json::array({json::array({"2", "0"}), json::array({"0", "1"})});
    CovarianceModel ma = model_from_json(ja);
    CHECK(ma.covariance()(0, 0) == rat(1, 2));
    CHECK(ma.quadratic_form()(0, 0) == 2);
}
