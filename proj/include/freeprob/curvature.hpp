#pragma once

// Conjugate variables from potentials, the non-commutative Jacobian and its
// symmetry certificates, the right-leg action R_T, the curvature-dimension
// certificate and the Brascamp-Lieb-Poincare bound.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/spectral.hpp"

namespace freeprob {

struct PotentialSpec {
    NcPoly V;

    explicit PotentialSpec(NcPoly v) : V(std::move(v)) {
        if (!is_self_adjoint(V)) throw std::invalid_argument("potential must be self-adjoint");
    }
};

// xi_i = D_i V.
inline std::vector<NcPoly> conjugates_from_potential(const PotentialSpec& spec) {
    std::vector<NcPoly> xi;
    xi.reserve(spec.V.gens());
    for (int i = 1; i <= spec.V.gens(); ++i) xi.push_back(cyclic_grad(i, spec.V));
    return xi;
}

// J xi with the reversed index convention: entry (i,j) = d_j xi_i.
class JacobianTensor {
  public:
    JacobianTensor(int n, std::vector<std::vector<TensorPoly2>> entries, bool from_potential)
        : n_(n), e_(std::move(entries)), from_potential_(from_potential) {}

    // Identity tensor (1 (x) 1) (x) I_n: the standard-model Jacobian.
    static JacobianTensor identity(int n) {
        std::vector<std::vector<TensorPoly2>> e(n, std::vector<TensorPoly2>(n, TensorPoly2::zero(n)));
        for (int i = 0; i < n; ++i) e[i][i] = TensorPoly2::unit(n);
        return JacobianTensor(n, std::move(e), true);
    }

    int gens() const { return n_; }
    bool from_potential() const { return from_potential_; }

    const TensorPoly2& entry(int i, int j) const { return e_.at(i - 1).at(j - 1); }  // 1-based

    int max_entry_degree() const {
        int d = 0;
        for (auto& row : e_)
            for (auto& t : row) d = std::max(d, t.degree());
        return d;
    }

    // Schwarz / star / dagger symmetry triple; exact.
    bool symmetries_hold() const {
        for (int i = 1; i <= n_; ++i)
            for (int j = 1; j <= n_; ++j) {
                if (entry(i, j) != flip(entry(j, i))) return false;
                if (star2(entry(i, j)) != entry(j, i)) return false;
                if (dagger(entry(i, j)) != entry(i, j)) return false;
            }
        return true;
    }

  private:
    int n_;
    std::vector<std::vector<TensorPoly2>> e_;
    bool from_potential_;
};

inline JacobianTensor jacobian(const std::vector<NcPoly>& xi, bool from_potential = false) {
    if (xi.empty()) throw std::invalid_argument("empty conjugate vector");
    const int n = xi[0].gens();
    if (int(xi.size()) != n) throw std::invalid_argument("conjugate vector has wrong length");
    std::vector<std::vector<TensorPoly2>> e(n, std::vector<TensorPoly2>(n, TensorPoly2::zero(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e[i][j] = fdq(j + 1, xi[i]);
    JacobianTensor J(n, std::move(e), from_potential);
    if (from_potential && !J.symmetries_hold())
        throw std::logic_error("Jacobian of a potential violates its symmetry triple (internal error)");
    return J;
}

inline JacobianTensor jacobian(const PotentialSpec& spec) {
    return jacobian(conjugates_from_potential(spec), true);
}

// Matrix of (R_T eta)_i = sum_j eta_j # T_ji on the n-fold direct sum of the
// truncated tensor space. Errors out when an entry of T pushes a basis tensor
// past the truncation degree.
inline OperatorMatrix right_leg_matrix(const JacobianTensor& J, const TensorSpace2& space2) {
    const int n = J.gens();
    if (n != space2.gens()) throw std::invalid_argument("generator count mismatch");
    const int N = space2.dim();
    RatMatrix M(n * N, n * N);
    for (int j = 0; j < n; ++j)
        for (int col = 0; col < N; ++col) {
            const WordPair& wp = space2.basis()[col];
            TensorPoly2 eta = TensorPoly2::simple(wp.first, wp.second, n);
            for (int i = 0; i < n; ++i) {
                const TensorPoly2& t = J.entry(j + 1, i + 1);
                if (t.is_zero()) continue;
                std::vector<Rational> out = space2.expand(sharp2(eta, t));
                for (int r = 0; r < N; ++r) M(i * N + r, j * N + col) = out[r];
            }
        }
    return OperatorMatrix{std::move(M)};
}

// Exact matrix of the quadratic form Q(eta, zeta) = sum_i <(R_J eta)_i, zeta_i>
// on the n-fold direct sum. Assembled by symbolic pairing, so it tolerates
// Jacobian entries whose sharp action leaves the truncation.
inline RatMatrix right_leg_form(const JacobianTensor& J, const TensorSpace2& space2) {
    const int n = J.gens();
    const int N = space2.dim();
    const CovarianceModel& m = space2.model();
    RatMatrix Q(n * N, n * N);
    for (int j = 0; j < n; ++j)
        for (int col = 0; col < N; ++col) {
            const WordPair& wp = space2.basis()[col];
            TensorPoly2 eta = TensorPoly2::simple(wp.first, wp.second, n);
            for (int i = 0; i < n; ++i) {
                const TensorPoly2& t = J.entry(j + 1, i + 1);
                if (t.is_zero()) continue;
                TensorPoly2 image = sharp2(eta, t);
                for (int row = 0; row < N; ++row) {
                    const WordPair& wr = space2.basis()[row];
                    Q(i * N + row, j * N + col) =
                        tensor_inner(image, TensorPoly2::simple(wr.first, wr.second, n), m);
                }
            }
        }
    return Q;
}

struct CdCertificate {
    double min_eigenvalue;
    int degree;
    std::string label;  // always a state-relative statement, never C*-positivity

    bool holds(double c, double tol = 1e-8) const { return min_eigenvalue >= c - tol; }
};

// Minimum eigenvalue of the symmetrized right-leg form in the tensor G-metric.
inline CdCertificate cd_certificate(const JacobianTensor& J, const TensorSpace2& space2) {
    const int n = J.gens();
    const int N = space2.dim();
    RatMatrix Q = right_leg_form(J, space2);
    Eigen::MatrixXd A = Q.to_double();
    A = 0.5 * (A + A.transpose().eval());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n * N, n * N);
    Eigen::MatrixXd G2 = space2.gram().to_double();
    for (int b = 0; b < n; ++b) B.block(b * N, b * N, N, N) = G2;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("CD eigensolver failed");
    double mineig = es.eigenvalues()(0);
    CdCertificate cert;
    cert.min_eigenvalue = mineig;
    cert.degree = space2.degree_bound();
    cert.label = "numeric certificate at degree " + std::to_string(space2.degree_bound()) +
                 " (state-relative, not C*-positivity)";
    return cert;
}

// Symbolic sum-of-squares witness check: J - c (1(x)1 (x) I_n) == Q* # Q with
// (Q*)_ij = star2(Q_ji). Exact; certifies the algebraic CD(c) positivity when
// the caller supplies Q.
inline bool sos_check(const JacobianTensor& J, const Rational& c,
                      const std::vector<std::vector<TensorPoly2>>& Q) {
    const int n = J.gens();
    if (int(Q.size()) != n) throw std::invalid_argument("witness has wrong dimensions");
    for (auto& row : Q)
        if (int(row.size()) != n) throw std::invalid_argument("witness has wrong dimensions");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            TensorPoly2 s(TensorPoly2::zero(n));
            for (int k = 0; k < n; ++k) s += sharp2(star2(Q[k][i]), Q[k][j]);
            TensorPoly2 expect = J.entry(i + 1, j + 1);
            if (i == j) expect -= TensorPoly2::unit(n) * c;
            if (s != expect) return false;
        }
    return true;
}

struct BlBound {
    double variance;     // ||Y - tau(Y) 1||^2
    double bl_value;     // <R_J^{-1} grad Y, grad Y> in the tensor G-metric
    double plain_bound;  // (1/c) E(Y)
    double c;            // CD certificate used for the plain bound
};

// Brascamp-Lieb-Poincare data for one observable: Var(Y) <= BL <= (1/c) E(Y).
// The inverse Jacobian acts through the matrix inverse of R_J on the
// truncation (the R_{T^{-1}} = (R_T)^{-1} rule).
inline BlBound bl_bound(const NcPoly& y, const JacobianTensor& J, const TruncatedSpace& space) {
    const int n = y.gens();
    const CovarianceModel& m = space.model();
    if (y.degree() > space.degree_bound()) throw std::out_of_range("degree overflow in bl_bound");
    TensorSpace2 space2(m, std::max(0, space.degree_bound() - 1 + J.max_entry_degree()));
    const int N = space2.dim();

    CdCertificate cert = cd_certificate(J, space2);
    if (cert.min_eigenvalue <= 0)
        throw std::invalid_argument("Jacobian not invertible on the truncation (min eigenvalue <= 0)");

    Eigen::MatrixXd R = right_leg_matrix(J, space2).dense();
    Eigen::VectorXd grad(n * N);
    Eigen::MatrixXd G2 = space2.gram().to_double();
    std::vector<Eigen::VectorXd> gcols(n);
    for (int i = 0; i < n; ++i) {
        std::vector<Rational> col = space2.expand(fdq(i + 1, y));
        Eigen::VectorXd v(N);
        for (int r = 0; r < N; ++r) v(r) = to_double(col[r]);
        gcols[i] = v;
        grad.segment(i * N, N) = v;
    }
    Eigen::VectorXd w = R.partialPivLu().solve(grad);
    double bl = 0;
    for (int i = 0; i < n; ++i) bl += w.segment(i * N, N).dot(G2 * gcols[i]);

    Rational mean = m.trace(y);
    NcPoly centered = y - NcPoly::unit(n) * mean;
    double var = to_double(norm_sq(centered, m));
    double energy = to_double(dirichlet_energy(y, space));
    return BlBound{var, bl, energy / cert.min_eigenvalue, cert.min_eigenvalue};
}

// Phi*(X) = sum_i ||xi_i||^2.
inline Rational fisher_information(const std::vector<NcPoly>& xi, const CovarianceModel& m) {
    Rational f(0);
    for (const NcPoly& x : xi) f += norm_sq(x, m);
    return f;
}

// C_xi(Y) = sum_{i,j} <d_j Y # d_i xi_j, d_i Y>; the Jacobian supplies
// d_i xi_j as entry (j,i).
inline Rational curvature_contraction(const NcPoly& y, const JacobianTensor& J,
                                      const TruncatedSpace& space) {
    if (y.degree() > space.degree_bound())
        throw std::out_of_range("degree overflow in curvature_contraction");
    if (y.gens() != J.gens()) throw std::invalid_argument("generator count mismatch");
    const CovarianceModel& m = space.model();
    Rational c(0);
    for (int i = 1; i <= y.gens(); ++i) {
        TensorPoly2 gi = fdq(i, y);
        if (gi.is_zero()) continue;
        for (int j = 1; j <= y.gens(); ++j)
            c += tensor_inner(sharp2(fdq(j, y), J.entry(j, i)), gi, m);
    }
    return c;
}

// L2 norm squared of the Clark-Ocone-type defect
//   xi_j - tau(xi_j) 1 - (id (x) tau)[ sum_i (X_i (x) 1) d_j xi_i - d_j xi_i (1 (x) X_i) ];
// identically zero for conjugates of polynomial potentials, under any model.
inline Rational clark_ocone_residual_sq(int j, const std::vector<NcPoly>& xi, const JacobianTensor& J,
                                        const CovarianceModel& m) {
    const int n = J.gens();
    detail::check_index(j, n);
    NcPoly rhs(n);
    for (int i = 1; i <= n; ++i) {
        const TensorPoly2& dji = J.entry(i, j);  // d_j xi_i
        if (dji.is_zero()) continue;
        NcPoly Xi = NcPoly::generator(i, n);
        TensorPoly2 t = bimodule_act(Xi, dji, NcPoly::unit(n));
        t -= bimodule_act(NcPoly::unit(n), dji, Xi);
        rhs += slice_id_tau(t, m);
    }
    NcPoly lhs = xi[j - 1] - NcPoly::unit(n) * m.trace(xi[j - 1]);
    return norm_sq(lhs - rhs, m);
}

}  // namespace freeprob
