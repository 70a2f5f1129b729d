#include <catch2/catch_amalgamated.hpp>

#include "freeprob/curvature.hpp"
#include "freeprob/parse.hpp"
#include "freeprob/random_gen.hpp"

using namespace freeprob;

TEST_CASE("conjugates from potentials", "[curvature]") {
    NcPoly quad = parse_poly("1/2*(X1X1 + X2X2)", 2);
    std::vector<NcPoly> xi = conjugates_from_potential(PotentialSpec(quad));
    CHECK(xi[0] == parse_poly("X1", 2));
    CHECK(xi[1] == parse_poly("X2", 2));

    RandomGen rng(51);
    RatMatrix A = rng.spd_matrix(2);
    NcPoly vA(2);
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            vA += rat(1, 2) * A(i - 1, j - 1) * (NcPoly::generator(i, 2) * NcPoly::generator(j, 2));
    std::vector<NcPoly> xiA = conjugates_from_potential(PotentialSpec(vA));
    for (int i = 0; i < 2; ++i) {
        NcPoly expect(2);
        for (int j = 0; j < 2; ++j) expect += A(i, j) * NcPoly::generator(j + 1, 2);
        CHECK(xiA[i] == expect);
    }

    CHECK_THROWS_AS(PotentialSpec(parse_poly("X1X2", 2)), std::invalid_argument);
}

TEST_CASE("Jacobian of linear conjugates", "[curvature]") {
    CovarianceModel m = CovarianceModel::standard(2);
    JacobianTensor J = jacobian(m.conjugates(), true);
    CHECK(J.entry(1, 1) == TensorPoly2::unit(2));
    CHECK(J.entry(1, 2).is_zero());

    RandomGen rng(52);
    RatMatrix A = rng.spd_matrix(3);
    CovarianceModel ma = CovarianceModel::from_quadratic_form(A);
    JacobianTensor Ja = jacobian(ma.conjugates(), true);
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
            CHECK(Ja.entry(i, j) == TensorPoly2::unit(3) * A(i - 1, j - 1));
}

TEST_CASE("Jacobian symmetry triple for perturbed potentials", "[curvature][property]") {
    RandomGen rng(53);
    for (int rep = 0; rep < 25; ++rep) {
        int n = rng.uniform(2, 3);
        PotentialSpec spec(rng.potential(n));
        JacobianTensor J = jacobian(spec);
        CHECK(J.symmetries_hold());
    }
    // quartic term contributes degree-2 tensor legs off the diagonal
    NcPoly v = parse_poly("1/2*(X1X1+X2X2) + 1/10*(X1X2X1X2 + X2X1X2X1)", 2);
    JacobianTensor J = jacobian(PotentialSpec(v));
    int deg = 0;
    for (auto& [k, c] : J.entry(1, 2).terms())
        deg = std::max(deg, k.first.degree() + k.second.degree());
    CHECK(deg == 2);
}

TEST_CASE("right-leg action is an anti-representation", "[curvature][property]") {
    RandomGen rng(54);
    const int n = 2;
    auto random_matrix = [&](int leg_deg) {
        std::vector<std::vector<TensorPoly2>> e(n, std::vector<TensorPoly2>(n, TensorPoly2::zero(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) e[i][j] = rng.tensor2(n, leg_deg, 2);
        return e;
    };
    auto apply = [&](const std::vector<std::vector<TensorPoly2>>& t,
                     const std::vector<TensorPoly2>& eta) {
        std::vector<TensorPoly2> out(n, TensorPoly2::zero(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out[i] += sharp2(eta[j], t[j][i]);
        return out;
    };
    CovarianceModel m = CovarianceModel::standard(n);
    for (int rep = 0; rep < 10; ++rep) {
        auto T = random_matrix(1), S = random_matrix(1);
        std::vector<TensorPoly2> eta = {rng.tensor2(n, 2), rng.tensor2(n, 2)};
        // R_S(R_T eta) = R_{T sharp S} eta
        std::vector<std::vector<TensorPoly2>> TS(n, std::vector<TensorPoly2>(n, TensorPoly2::zero(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) TS[i][j] += sharp2(T[i][k], S[k][j]);
        std::vector<TensorPoly2> lhs = apply(S, apply(T, eta)), rhs = apply(TS, eta);
        for (int i = 0; i < n; ++i) CHECK(lhs[i] == rhs[i]);

        // <R_T eta, zeta> = <eta, R_{T*} zeta> with (T*)_ij = star2(T_ji)
        std::vector<TensorPoly2> zeta = {rng.tensor2(n, 2), rng.tensor2(n, 2)};
        std::vector<std::vector<TensorPoly2>> Tstar(n, std::vector<TensorPoly2>(n, TensorPoly2::zero(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Tstar[i][j] = star2(T[j][i]);
        std::vector<TensorPoly2> Teta = apply(T, eta), Tsz = apply(Tstar, zeta);
        Rational lhs_ip(0), rhs_ip(0);
        for (int i = 0; i < n; ++i) {
            lhs_ip += tensor_inner(Teta[i], zeta[i], m);
            rhs_ip += tensor_inner(eta[i], Tsz[i], m);
        }
        CHECK(lhs_ip == rhs_ip);
    }
}

TEST_CASE("right-leg matrix of the identity tensor", "[curvature]") {
    CovarianceModel m = CovarianceModel::standard(2);
    TensorSpace2 s2(m, 2);
    JacobianTensor J = JacobianTensor::identity(2);
    OperatorMatrix R = right_leg_matrix(J, s2);
    CHECK(R.mat == RatMatrix::identity(2 * s2.dim()));

    // entries with polynomial legs push top-degree basis tensors out
    NcPoly v = parse_poly("1/2*(X1X1+X2X2) + 1/10*(X1X2X1X2 + X2X1X2X1)", 2);
    CHECK_THROWS_AS(right_leg_matrix(jacobian(PotentialSpec(v)), s2), std::out_of_range);
}

TEST_CASE("CD certificates", "[curvature]") {
    CovarianceModel m = CovarianceModel::standard(2);
    TensorSpace2 s2(m, 2);
    CdCertificate std_cert = cd_certificate(JacobianTensor::identity(2), s2);
    CHECK(std::abs(std_cert.min_eigenvalue - 1.0) < 1e-8);
    CHECK(std_cert.label.find("C*") != std::string::npos);  // labelled as state-relative

    RatMatrix A(2, 2);
    A(0, 0) = 1;
    A(1, 1) = 2;
    CovarianceModel md = CovarianceModel::from_quadratic_form(A);
    TensorSpace2 sd(md, 2);
    CdCertificate cert = cd_certificate(jacobian(md.conjugates()), sd);
    CHECK(std::abs(cert.min_eigenvalue - 1.0) < 1e-8);

    // deliberately indefinite: -2 (1 (x) 1) on the diagonal
    std::vector<std::vector<TensorPoly2>> bad(2, std::vector<TensorPoly2>(2, TensorPoly2::zero(2)));
    bad[0][0] = TensorPoly2::unit(2) * rat(-2);
    bad[1][1] = TensorPoly2::unit(2);
    CdCertificate neg = cd_certificate(JacobianTensor(2, bad, false), s2);
    CHECK(neg.min_eigenvalue < 0);
    CHECK_FALSE(neg.holds(1.0));
}

TEST_CASE("positivity transfers to the quadratic form", "[curvature][property]") {
    RandomGen rng(55);
    CovarianceModel m = CovarianceModel::standard(2);
    TensorSpace2 s2(m, 2);
    NcPoly v = parse_poly("1/2*(X1X1+X2X2) + 1/20*(X1X2X1X2 + X2X1X2X1)", 2);
    JacobianTensor J = jacobian(PotentialSpec(v));
    CdCertificate cert = cd_certificate(J, s2);
    RatMatrix Q = right_leg_form(J, s2);
    Eigen::MatrixXd Qd = Q.to_double();
    Eigen::MatrixXd G2 = s2.gram().to_double();
    const int N = s2.dim();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    B.block(0, 0, N, N) = G2;
    B.block(N, N, N, N) = G2;
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd eta(2 * N);
        for (int i = 0; i < 2 * N; ++i) eta(i) = double(rng.uniform(-3, 3));
        double quad = eta.dot(Qd * eta);
        double nrm = eta.dot(B * eta);
        CHECK(quad >= cert.min_eigenvalue * nrm - 1e-6);
    }
}

TEST_CASE("sum-of-squares witness check", "[curvature]") {
    const int n = 2;
    JacobianTensor J = JacobianTensor::identity(n);
    std::vector<std::vector<TensorPoly2>> Q(n, std::vector<TensorPoly2>(n, TensorPoly2::zero(n)));
    Q[0][0] = TensorPoly2::unit(n) * rat(1, 2);
    Q[1][1] = TensorPoly2::unit(n) * rat(1, 2);
    CHECK(sos_check(J, rat(3, 4), Q));
    CHECK_FALSE(sos_check(J, rat(1, 2), Q));
}

TEST_CASE("Brascamp-Lieb bound", "[curvature]") {
    CovarianceModel m = CovarianceModel::standard(2);
    TruncatedSpace s(m, 4);
    JacobianTensor J = jacobian(m.conjugates());

    BlBound b1 = bl_bound(parse_poly("X1", 2), J, s);
    CHECK(std::abs(b1.variance - 1.0) < 1e-10);
    CHECK(std::abs(b1.bl_value - 1.0) < 1e-10);
    CHECK(std::abs(b1.plain_bound - 1.0) < 1e-8);

    BlBound b2 = bl_bound(parse_poly("X1X1", 2), J, s);
    CHECK(std::abs(b2.variance - 1.0) < 1e-10);
    CHECK(std::abs(b2.bl_value - 2.0) < 1e-10);
    CHECK(std::abs(b2.plain_bound - 2.0) < 1e-8);

    RatMatrix A(2, 2);
    A(0, 0) = 2;
    A(1, 1) = 1;
    CovarianceModel md = CovarianceModel::from_quadratic_form(A);
    TruncatedSpace sd(md, 3);
    BlBound b3 = bl_bound(parse_poly("X1", 2), jacobian(md.conjugates()), sd);
    CHECK(std::abs(b3.variance - 0.5) < 1e-10);
    CHECK(std::abs(b3.bl_value - 0.5) < 1e-10);
    CHECK(std::abs(b3.plain_bound - 1.0) < 1e-8);

    RandomGen rng(56);
    for (int rep = 0; rep < 8; ++rep) {
        CovarianceModel mr = rng.model(2);
        TruncatedSpace sr(mr, 3);
        NcPoly y = rng.poly(2, 3);
        if (y.is_zero()) continue;
        BlBound b = bl_bound(y, jacobian(mr.conjugates()), sr);
        CHECK(b.variance <= b.bl_value + 1e-8);
        CHECK(b.bl_value <= b.plain_bound + 1e-8);
    }
}

TEST_CASE("Fisher information", "[curvature]") {
    CovarianceModel std3 = CovarianceModel::standard(3);
    CHECK(fisher_information(std3.conjugates(), std3) == 3);

    RandomGen rng(57);
    RatMatrix A = rng.spd_matrix(2);
    CovarianceModel ma = CovarianceModel::from_quadratic_form(A);
    CHECK(fisher_information(ma.conjugates(), ma) == A(0, 0) + A(1, 1));

    // scaling X -> tX with C -> t^2 C sends Phi* to Phi*/t^2
    RatMatrix C4 = RatMatrix::identity(2);
    C4(0, 0) = 4;
    C4(1, 1) = 4;
    CovarianceModel scaled = CovarianceModel::from_covariance(C4);
    CHECK(fisher_information(scaled.conjugates(), scaled) == rat(2, 4));
}

TEST_CASE("Clark-Ocone-type identity", "[curvature][property]") {
    CovarianceModel m = CovarianceModel::standard(2);
    std::vector<NcPoly> xi = m.conjugates();
    JacobianTensor J = jacobian(xi);
    CHECK(is_zero(clark_ocone_residual_sq(1, xi, J, m)));

    RandomGen rng(58);
    for (int rep = 0; rep < 15; ++rep) {
        int n = rng.uniform(2, 3);
        CovarianceModel mr = rng.model(n);
        std::vector<NcPoly> xir = conjugates_from_potential(PotentialSpec(rng.potential(n)));
        JacobianTensor Jr = jacobian(xir, true);
        for (int j = 1; j <= n; ++j) CHECK(is_zero(clark_ocone_residual_sq(j, xir, Jr, mr)));
    }
}

TEST_CASE("curvature contraction", "[curvature]") {
    CovarianceModel m = CovarianceModel::standard(2);
    TruncatedSpace s(m, 3);
    CHECK(curvature_contraction(parse_poly("X1", 2), JacobianTensor::identity(2), s) == 1);

    RandomGen rng(59);
    for (int rep = 0; rep < 10; ++rep) {
        NcPoly y = rng.poly(2, 3);
        CHECK(curvature_contraction(y, JacobianTensor::identity(2), s) == dirichlet_energy(y, s));
    }
}

TEST_CASE("eigenfunction energy identity", "[curvature]") {
    // E_2(Y) = E(Y) - C_xi(Y) whenever Delta Y = Y, here for Y = X1 in an
    // anisotropic model with lambda_min(A) = 1.
    RatMatrix A(2, 2);
    A(0, 0) = 1;
    A(1, 1) = 2;
    CovarianceModel m = CovarianceModel::from_quadratic_form(A);
    TruncatedSpace s(m, 3);
    JacobianTensor J = jacobian(m.conjugates());
    NcPoly y = parse_poly("X1", 2);
    CHECK(energy2(y, s) == dirichlet_energy(y, s) - curvature_contraction(y, J, s));
    CHECK(energy2(y, s) == 0);
}
