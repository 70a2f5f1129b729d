#include <catch2/catch_amalgamated.hpp>

#include "freeprob/parse.hpp"
#include "freeprob/random_gen.hpp"
#include "freeprob/rigidity.hpp"

using namespace freeprob;

namespace {

RatMatrix diag2(const Rational& a, const Rational& b) {
    RatMatrix m(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("saturator eigenspaces", "[rigidity]") {
    CovarianceModel std2 = CovarianceModel::standard(2);
    TruncatedSpace s(std2, 4);
    SaturatorBasis sat = find_saturators(s);
    CHECK(sat.r() == 2);

    CovarianceModel m12 = CovarianceModel::from_quadratic_form(diag2(1, 2));
    SaturatorBasis sat12 = find_saturators(TruncatedSpace(m12, 4));
    REQUIRE(sat12.r() == 1);
    CHECK(sat12.directions[0] == std::vector<Rational>{Rational(1), Rational(0)});

    CovarianceModel m32 = CovarianceModel::from_quadratic_form(diag2(rat(3, 2), 2));
    CHECK(find_saturators(TruncatedSpace(m32, 4)).r() == 0);
}

TEST_CASE("affine check", "[rigidity]") {
    CovarianceModel m = CovarianceModel::standard(2);
    TruncatedSpace s(m, 4);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(s.dim());
    f(s.index_of(Word({1}))) = 1.0;
    CHECK(affine_check(f, s) < 1e-14);

    // f = X1 + X1^2: the non-affine component is X1^2 - 1, of norm 1
    f(s.index_of(Word({1, 1}))) = 1.0;
    CHECK(std::abs(affine_check(f, s) - 1.0) < 1e-12);

    SaturatorBasis sat = find_saturators(s);
    for (auto& v : sat.vectors) CHECK(affine_check(v, s) <= 1e-8);
}

TEST_CASE("realify", "[rigidity]") {
    NcPoly x1 = parse_poly("X1", 2);
    auto [re1, sk1] = realify(x1);
    CHECK(re1 == x1);
    CHECK(sk1.is_zero());

    NcPoly sa = parse_poly("X1X2 + X2X1", 2);
    auto [re2, sk2] = realify(sa);
    CHECK(re2 == sa);
    CHECK(sk2.is_zero());

    NcPoly f = parse_poly("X1 + X1X2", 2);
    auto [re3, sk3] = realify(f);
    CHECK(re3 == parse_poly("X1 + 1/2*X1X2 + 1/2*X2X1", 2));
    CHECK(sk3 == parse_poly("1/2*X1X2 - 1/2*X2X1", 2));
    CHECK(re3 + sk3 == f);

    CovarianceModel m = CovarianceModel::standard(2);
    TruncatedSpace s(m, 3);
    CHECK(dirichlet_energy(f, s) == dirichlet_energy(re3, s) + dirichlet_energy(sk3, s));
    CHECK(norm_sq(f, m) == norm_sq(re3, m) + norm_sq(sk3, m));
}

TEST_CASE("orthogonal completion", "[rigidity]") {
    Eigen::VectorXd e1(2);
    e1 << 1, 0;
    CHECK(orthogonal_completion({e1}, 2).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));

    Eigen::VectorXd u(2);
    u << 0.6, 0.8;
    Eigen::MatrixXd U = orthogonal_completion({u}, 2);
    CHECK(std::abs(U(1, 0) + 0.8) < 1e-12);
    CHECK(std::abs(U(1, 1) - 0.6) < 1e-12);
    CHECK(std::abs(U.determinant() - 1.0) < 1e-12);

    RandomGen rng(61);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd v(3);
        for (int i = 0; i < 3; ++i) v(i) = double(rng.uniform(-5, 5)) + 0.25;
        v.normalize();
        Eigen::MatrixXd Q = orthogonal_completion({v}, 3);
        CHECK((Q * Q.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }

    Eigen::VectorXd bad(2);
    bad << 2.0, 0.0;
    CHECK_THROWS_AS(orthogonal_completion({bad}, 2), std::invalid_argument);
}

TEST_CASE("change of variables", "[rigidity]") {
    CovarianceModel m = CovarianceModel::standard(2);
    std::vector<NcPoly> xi = m.conjugates();

    ChangeOfVariables id = change_of_variables(Eigen::MatrixXd::Identity(2, 2), m, xi);
    CHECK(id.Y[0] == parse_poly("X1", 2));
    CHECK(id.xiY[1] == xi[1]);
    CHECK(id.covariance == RatMatrix::identity(2));

    // any orthogonal U keeps the standard family standard
    Eigen::VectorXd u(2);
    u << 0.6, 0.8;
    Eigen::MatrixXd U = orthogonal_completion({u}, 2);
    ChangeOfVariables rot = change_of_variables(U, m, xi);
    Eigen::MatrixXd covd = rot.covariance.to_double();
    CHECK((covd - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd notorth = Eigen::MatrixXd::Identity(2, 2) * 1.5;
    CHECK_THROWS_AS(change_of_variables(notorth, m, xi), std::invalid_argument);

    // exact variant with orthogonal (unnormalized) rational rows
    RatMatrix rows(2, 2);
    rows(0, 0) = 1; rows(0, 1) = 1;
    rows(1, 0) = 1; rows(1, 1) = -1;
    RatMatrix C(2, 2);
    C(0, 0) = 1; C(1, 1) = 1; C(0, 1) = rat(1, 2); C(1, 0) = rat(1, 2);
    CovarianceModel mc = CovarianceModel::from_covariance(C);
    ChangeOfVariables diag = change_of_variables_exact(rows, mc, mc.conjugates());
    CHECK(diag.covariance(0, 1) == 0);
    CHECK(diag.covariance(0, 0) == 3);
    CHECK(diag.covariance(1, 1) == 1);
}

TEST_CASE("semicircular moment residuals", "[rigidity]") {
    CovarianceModel m = CovarianceModel::standard(2);
    for (const char* text : {"X1", "X1 + X2"}) {
        std::vector<Rational> res = semicircular_check(parse_poly(text, 2), m, 8);
        for (auto& r : res) CHECK(is_zero(r));
    }
    // X1^2 - 1 is centered but not semicircular: the 4th normalized moment
    // differs from Catalan_2
    std::vector<Rational> res = semicircular_check(parse_poly("X1X1 - 1", 2), m, 4);
    CHECK(is_zero(res[0]));
    CHECK_FALSE(is_zero(res[3]));
    CHECK_THROWS_AS(semicircular_check(parse_poly("X1X1", 2), m, 4), std::invalid_argument);
}

TEST_CASE("freeness residuals", "[rigidity]") {
    CovarianceModel std2 = CovarianceModel::standard(2);
    CHECK(is_zero(freeness_check(parse_poly("X1", 2), {parse_poly("X2", 2)}, std2, 6)));

    RatMatrix C(2, 2);
    C(0, 0) = 1; C(1, 1) = 1; C(0, 1) = rat(1, 2); C(1, 0) = rat(1, 2);
    CovarianceModel mc = CovarianceModel::from_covariance(C);
    Rational bad = freeness_check(parse_poly("X1", 2), {parse_poly("X2", 2)}, mc, 4);
    CHECK(bad >= rat(1, 2));

    // diagonalizing the covariance restores freeness
    RatMatrix rows(2, 2);
    rows(0, 0) = 1; rows(0, 1) = 1;
    rows(1, 0) = 1; rows(1, 1) = -1;
    ChangeOfVariables cv = change_of_variables_exact(rows, mc, mc.conjugates());
    CHECK(is_zero(freeness_check(cv.Y[0], {cv.Y[1]}, mc, 6)));
}

TEST_CASE("Stein identity for saturator directions", "[rigidity][property]") {
    RatMatrix A(2, 2);
    A(0, 0) = 1;
    A(1, 1) = 2;
    CovarianceModel m = CovarianceModel::from_quadratic_form(A);
    NcPoly f = parse_poly("X1", 2);  // A e_1 = e_1
    RandomGen rng(62);
    for (int rep = 0; rep < 25; ++rep) {
        NcPoly g = rng.poly(2, 5);
        Rational lhs = m.trace(f * g);
        Rational rhs = tau_tau(fdq(1, g), m);  // c = e_1
        CHECK(lhs == rhs);
    }
}

TEST_CASE("Obata pipeline, standard model", "[rigidity]") {
    CovarianceModel m = CovarianceModel::standard(2);
    TruncatedSpace s(m, 4);
    RigidityReport rep = obata_report(m, m.conjugates(), s);
    CHECK(rep.passed);
    CHECK(rep.r == 2);
    CHECK(rep.verdict.find("L(F_2)") != std::string::npos);
    for (auto& res : rep.moment_residuals)
        for (auto& r : res) CHECK(is_zero(r));
    CHECK(is_zero(rep.freeness_residual));
    for (double res : rep.affine_residuals) CHECK(res <= 1e-8);
    CHECK((rep.U * rep.U.transpose() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    for (auto& e2 : rep.energy2_values) CHECK(is_zero(e2));
}

TEST_CASE("Obata pipeline, anisotropic split", "[rigidity]") {
    CovarianceModel m = CovarianceModel::from_quadratic_form(diag2(1, 2));
    TruncatedSpace s(m, 4);
    RigidityReport rep = obata_report(m, m.conjugates(), s);
    CHECK(rep.passed);
    CHECK(rep.r == 1);
    CHECK(rep.verdict.find("L(F_1)") != std::string::npos);
    CHECK(rep.y_variances[0] == 1);
    CHECK(rep.y_variances[1] == rat(1, 2));

    // non-diagonal A with spectrum {1, 3/2}: the split direction is (1,-1)
    RatMatrix B(2, 2);
    B(0, 0) = rat(5, 4); B(0, 1) = rat(1, 4);
    B(1, 0) = rat(1, 4); B(1, 1) = rat(5, 4);
    CovarianceModel mb = CovarianceModel::from_quadratic_form(B);
    RigidityReport repb = obata_report(mb, mb.conjugates(), TruncatedSpace(mb, 4));
    CHECK(repb.passed);
    CHECK(repb.r == 1);
    CHECK(repb.y_variances[0] == 1);
    CHECK(repb.y_variances[1] == rat(2, 3));
}

TEST_CASE("Obata pipeline, negative control and CD failure", "[rigidity]") {
    RatMatrix B(2, 2);
    B(0, 0) = rat(11, 8); B(0, 1) = rat(1, 8);
    B(1, 0) = rat(1, 8); B(1, 1) = rat(11, 8);
    CovarianceModel m = CovarianceModel::from_quadratic_form(B);
    RigidityReport rep = obata_report(m, m.conjugates(), TruncatedSpace(m, 4));
    CHECK(rep.passed);
    CHECK(rep.r == 0);
    CHECK(rep.verdict.find("vacuous") != std::string::npos);

    CovarianceModel weak = CovarianceModel::from_quadratic_form(diag2(rat(1, 2), 1));
    RigidityReport repw = obata_report(weak, weak.conjugates(), TruncatedSpace(weak, 3));
    CHECK_FALSE(repw.passed);
    CHECK_FALSE(repw.stages.empty());
    CHECK(repw.stages[0].name == "cd");
    CHECK_FALSE(repw.stages[0].passed);
}

TEST_CASE("saturator count never exceeds n", "[rigidity][property]") {
    RandomGen rng(63);
    for (int rep = 0; rep < 6; ++rep) {
        int n = rng.uniform(2, 3);
        CovarianceModel m = rng.model(n);
        SaturatorBasis sat = find_saturators(TruncatedSpace(m, 3));
        CHECK(sat.r() <= n);
    }
}
