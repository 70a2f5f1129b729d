#pragma once

// The free Obata pipeline: saturators of the free Poincare inequality,
// affine rigidity, orthogonal change of variables, semicircularity and
// freeness certificates. Saturator directions are recovered twice: by the
// floating-point eigensolve and by the exact rational eigenspace of the
// Laplacian restricted to the linear span of the generators; moment and
// freeness residuals are then exact rationals.

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/curvature.hpp"
#include "freeprob/spectral.hpp"

namespace freeprob {

struct Tolerances {
    double eig = 1e-8;      // eigenvalue clustering
    double orth = 1e-12;    // orthogonality of U
    double affine = 1e-8;   // affine residual of saturators
    double moment = 1e-10;  // float fallback for moment residuals (exact models use 0)
};

struct SaturatorBasis {
    // Full-space coefficient vectors at eigenvalue 1, G-orthonormal.
    std::vector<Eigen::VectorXd> vectors;
    // The same eigenspace as exact directions in R^n (saturators are affine):
    // pairwise orthogonal, unnormalized.
    std::vector<std::vector<Rational>> directions;

    int r() const { return int(directions.size()); }
};

// G-norm of f minus its G-orthogonal projection onto span{1, X_1..X_n}.
inline double affine_check(const Eigen::VectorXd& f, const TruncatedSpace& space) {
    const int N = space.dim();
    const int n = space.gens();
    if (f.size() != N) throw std::invalid_argument("coefficient vector has wrong length");
    Eigen::MatrixXd G = space.gram_dense();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, n + 1);
    for (int j = 0; j <= n; ++j) S(j, j) = 1.0;  // graded order: 1, X_1, .., X_n first
    Eigen::MatrixXd A = S.transpose() * G * S;
    Eigen::VectorXd b = S.transpose() * G * f;
    Eigen::VectorXd a = A.ldlt().solve(b);
    Eigen::VectorXd res = f - S * a;
    return std::sqrt(std::max(0.0, res.dot(G * res)));
}

// Orthonormal basis of ker(Delta - id) intersected with the centered
// subspace. Throws when the float eigenspace does not match the exact affine
// eigenspace dimension (which would mean a non-affine eigenvector at 1).
inline SaturatorBasis find_saturators(const TruncatedSpace& space, double tol = 1e-8) {
    const CovarianceModel& m = space.model();
    const int n = space.gens();

    OperatorMatrix L = laplacian(space, m.conjugates());
    Eigensystem es = eigensystem(L, space.gram());

    SaturatorBasis out;
    for (int i = 0; i < es.values.size(); ++i)
        if (std::abs(es.values(i) - 1.0) <= tol) out.vectors.push_back(es.vectors.col(i));

    // Delta acts on span{X_1..X_n} by the quadratic-form matrix A = C^{-1}.
    RatMatrix A = m.quadratic_form();
    RatMatrix AmI = A - RatMatrix::identity(n);
    std::vector<std::vector<Rational>> ker = kernel(AmI);
    // Gram-Schmidt without normalization keeps the directions rational.
    for (auto& v : ker) {
        for (auto& prev : out.directions) {
            Rational num(0), den(0);
            for (int k = 0; k < n; ++k) {
                num += prev[k] * v[k];
                den += prev[k] * prev[k];
            }
            Rational f = num / den;
            for (int k = 0; k < n; ++k) v[k] -= f * prev[k];
        }
        bool nonzero = false;
        for (auto& c : v) nonzero = nonzero || !is_zero(c);
        if (nonzero) out.directions.push_back(v);
    }

    if (out.vectors.size() != out.directions.size())
        throw std::logic_error("eigenvalue-1 cluster does not match the affine eigenspace; "
                               "check the clustering tolerance");
    return out;
}

// Re f = (f + f*)/2 and the skew part (f - f*)/2. Scalars here are real
// rationals, so the skew part stands in for i Im f; it carries the same norm
// and energy, and is zero exactly when f is self-adjoint.
inline std::pair<NcPoly, NcPoly> realify(const NcPoly& f) {
    Rational half(1, 2);
    NcPoly fs = star(f);
    return {(f + fs) * half, (f - fs) * half};
}

// Completes orthonormal rows u_1..u_r to U in O(n) by Gram-Schmidt over the
// seed order e_1,..,e_n; when rows were added, the last one is flipped if
// needed to fix det U = +1.
inline Eigen::MatrixXd orthogonal_completion(const std::vector<Eigen::VectorXd>& u, int n) {
    const int r = int(u.size());
    if (r > n) throw std::invalid_argument("more rows than columns");
    Eigen::MatrixXd U(n, n);
    for (int i = 0; i < r; ++i) {
        if (u[i].size() != n) throw std::invalid_argument("row has wrong length");
        U.row(i) = u[i].transpose();
    }
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(U.row(i).dot(U.row(j))) > 1e-10)
                throw std::invalid_argument("input rows are not orthonormal");
    for (int i = 0; i < r; ++i)
        if (std::abs(U.row(i).norm() - 1.0) > 1e-10)
            throw std::invalid_argument("input rows are not unit vectors");

    int have = r;
    for (int s = 0; s < n && have < n; ++s) {
        Eigen::VectorXd cand = Eigen::VectorXd::Zero(n);
        cand(s) = 1.0;
        for (int k = 0; k < have; ++k) cand -= U.row(k).dot(cand) * U.row(k).transpose();
        double norm = cand.norm();
        if (norm < 1e-8) continue;  // e_s already spanned
        U.row(have) = (cand / norm).transpose();
        ++have;
    }
    if (have < n) throw std::invalid_argument("rank deficiency: could not complete to O(n)");
    if (r < n && U.determinant() < 0) U.row(n - 1) = -U.row(n - 1);
    return U;
}

struct ChangeOfVariables {
    std::vector<NcPoly> Y;    // Y_i = sum_j U_ij (X_j - tau(X_j) 1)
    std::vector<NcPoly> xiY;  // transformed conjugates
    RatMatrix covariance;     // U C U^T
};

// Change of variables for a floating-point orthogonal U; the entries are
// rationalized exactly (doubles are binary rationals), so the outputs stay in
// the exact algebra.
inline ChangeOfVariables change_of_variables(const Eigen::MatrixXd& U, const CovarianceModel& m,
                                             const std::vector<NcPoly>& xi, double tol = 1e-10) {
    const int n = m.gens();
    if (U.rows() != n || U.cols() != n) throw std::invalid_argument("U has wrong dimensions");
    double orth = (U * U.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (orth > tol) throw std::invalid_argument("U is not orthogonal within tolerance");
    RatMatrix Ur(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Ur(i, j) = Rational(U(i, j));
    ChangeOfVariables cv;
    for (int i = 0; i < n; ++i) {
        NcPoly y(n), xy(n);
        for (int j = 0; j < n; ++j) {
            NcPoly Xc = NcPoly::generator(j + 1, n);
            Rational mj = m.trace(Xc);
            if (!is_zero(mj)) Xc -= NcPoly::unit(n) * mj;
            y += Ur(i, j) * Xc;
            xy += Ur(i, j) * xi[j];
        }
        cv.Y.push_back(std::move(y));
        cv.xiY.push_back(std::move(xy));
    }
    cv.covariance = Ur * m.covariance() * Ur.transposed();
    return cv;
}

// Exact variant: rows need only be pairwise orthogonal rationals. The
// conjugates transform with the 1/||row||^2 scaling that replaces the missing
// normalization.
inline ChangeOfVariables change_of_variables_exact(const RatMatrix& rows, const CovarianceModel& m,
                                                   const std::vector<NcPoly>& xi) {
    const int n = m.gens();
    if (rows.rows() != n || rows.cols() != n) throw std::invalid_argument("U has wrong dimensions");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Rational dot(0);
            for (int k = 0; k < n; ++k) dot += rows(i, k) * rows(j, k);
            if (!is_zero(dot)) throw std::invalid_argument("rows are not orthogonal");
        }
    ChangeOfVariables cv;
    for (int i = 0; i < n; ++i) {
        NcPoly y(n), xy(n);
        Rational nrm2(0);
        for (int k = 0; k < n; ++k) nrm2 += rows(i, k) * rows(i, k);
        for (int j = 0; j < n; ++j) {
            y += rows(i, j) * NcPoly::generator(j + 1, n);
            xy += rows(i, j) * xi[j];
        }
        xy *= Rational(1) / nrm2;
        cv.Y.push_back(std::move(y));
        cv.xiY.push_back(std::move(xy));
    }
    cv.covariance = rows * m.covariance() * rows.transposed();
    return cv;
}

inline Rational catalan_number(int k) {
    Rational c(1);
    for (int i = 0; i < k; ++i) c = c * Rational(2 * (2 * i + 1), i + 2);
    return c;
}

// Residuals of the moments of f/||f|| against the standard semicircular
// moments, for m = 1..max_moment. Odd entries are the raw odd moments of f;
// even entries are tau(f^{2k}) / tau(f^2)^k - Catalan_k. All exact.
inline std::vector<Rational> semicircular_check(const NcPoly& f, const CovarianceModel& m,
                                                int max_moment) {
    if (!is_zero(m.trace(f))) throw std::invalid_argument("semicircular_check requires a centered f");
    Rational sigma2 = norm_sq(f, m);
    if (is_zero(sigma2)) throw std::invalid_argument("semicircular_check requires f != 0");
    std::vector<Rational> residuals;
    NcPoly power = NcPoly::unit(f.gens());
    Rational sig_pow(1);
    for (int mm = 1; mm <= max_moment; ++mm) {
        power = power * f;
        Rational mom = m.trace(power);
        if (mm % 2 == 1) {
            residuals.push_back(mom);
        } else {
            sig_pow *= sigma2;
            residuals.push_back(mom / sig_pow - catalan_number(mm / 2));
        }
    }
    return residuals;
}

// Mutual freeness of the given families, by exhaustive alternating centered
// moments: max |tau(c_1 c_2 ... c_k)| over products of centered words with
// adjacent factors from different families, total degree <= max_degree.
inline Rational freeness_families(const std::vector<std::vector<NcPoly>>& families,
                                  const CovarianceModel& m, int max_degree) {
    const int nf = int(families.size());
    if (nf < 2) return Rational(0);
    int n = 0;
    for (auto& fam : families)
        for (auto& y : fam) n = std::max(n, y.gens());

    // Centered spanning words per family and degree.
    std::vector<std::vector<std::vector<NcPoly>>> words(nf);  // [family][degree-1] -> list
    for (int f = 0; f < nf; ++f) {
        words[f].resize(max_degree);
        std::vector<NcPoly> cur{NcPoly::unit(n)};
        for (int deg = 1; deg <= max_degree; ++deg) {
            std::vector<NcPoly> next;
            for (const NcPoly& w : cur)
                for (const NcPoly& g : families[f]) next.push_back(w * g);
            for (const NcPoly& w : next) {
                NcPoly c = w - NcPoly::unit(n) * m.trace(w);
                words[f][deg - 1].push_back(c);
            }
            cur = std::move(next);
        }
    }

    Rational worst(0);
    // DFS over alternating sequences, tracking the running product.
    struct Frame {
        int last_family;
        int used_degree;
        NcPoly product;
    };
    std::vector<Frame> stack;
    for (int f = 0; f < nf; ++f)
        for (int deg = 1; deg <= max_degree; ++deg)
            for (const NcPoly& w : words[f][deg - 1]) stack.push_back({f, deg, w});
    while (!stack.empty()) {
        Frame fr = std::move(stack.back());
        stack.pop_back();
        Rational t = m.trace(fr.product);
        Rational a = abs(t);
        if (a > worst) worst = a;
        for (int f = 0; f < nf; ++f) {
            if (f == fr.last_family) continue;
            for (int deg = 1; deg + fr.used_degree <= max_degree; ++deg)
                for (const NcPoly& w : words[f][deg - 1])
                    stack.push_back({f, fr.used_degree + deg, fr.product * w});
        }
    }
    return worst;
}

inline Rational freeness_check(const NcPoly& y1, const std::vector<NcPoly>& others,
                               const CovarianceModel& m, int max_degree) {
    if (others.empty()) return Rational(0);
    return freeness_families({{y1}, others}, m, max_degree);
}

struct StageResult {
    std::string name;
    bool passed;
    double residual;
    std::string note;
};

struct RigidityReport {
    int r = 0;
    double cd_value = 0;
    std::vector<std::vector<double>> saturators;        // r unit coefficient vectors
    Eigen::MatrixXd U;                                  // orthogonal, first r rows = saturators
    std::vector<double> affine_residuals;               // per saturator
    std::vector<std::vector<Rational>> moment_residuals; // per saturator, m = 1..max_moment
    std::vector<Rational> y_variances;                  // variances of all Y_i (unnormalized dirs scaled out)
    Rational freeness_residual = Rational(0);
    std::vector<Rational> energy2_values;               // E_2(Y_k), zero for saturators
    std::vector<StageResult> stages;
    bool passed = false;
    std::string verdict;
    std::string truncation_note;
    int max_moment = 8;
    int freeness_degree = 6;
};

// The full pipeline: saturators -> realify -> affine -> completion -> change
// of variables -> semicircular and freeness certificates.
inline RigidityReport obata_report(const CovarianceModel& m, const std::vector<NcPoly>& xi,
                                   const TruncatedSpace& space, const Tolerances& tols = {}) {
    const int n = m.gens();
    RigidityReport rep;
    rep.truncation_note =
        "dim ker(Delta - id) is finite here because the space is truncated at degree " +
        std::to_string(space.degree_bound()) + "; finiteness is an artifact of truncation";
    auto stage = [&rep](const std::string& name, bool ok, double res, const std::string& note) {
        rep.stages.push_back({name, ok, res, note});
        return ok;
    };

    // CD(1,infinity) certificate.
    JacobianTensor J = jacobian(xi);
    TensorSpace2 space2(m, std::max(1, space.degree_bound() - 1));
    CdCertificate cert = cd_certificate(J, space2);
    rep.cd_value = cert.min_eigenvalue;
    if (!stage("cd", cert.holds(1.0, tols.eig), cert.min_eigenvalue, cert.label)) {
        rep.verdict = "CD(1,infinity) certificate failed; rigidity pipeline not applicable";
        return rep;
    }

    SaturatorBasis sat = find_saturators(space, tols.eig);
    rep.r = sat.r();
    if (rep.r > n) throw std::logic_error("more saturators than generators");
    stage("saturators", true, double(rep.r), "dim ker(Delta - id) = " + std::to_string(rep.r));
    if (rep.r == 0) {
        rep.passed = true;
        rep.verdict = "no saturator; rigidity hypothesis vacuous";
        rep.U = Eigen::MatrixXd::Identity(n, n);
        return rep;
    }

    bool affine_ok = true;
    for (auto& v : sat.vectors) {
        double res = affine_check(v, space);
        rep.affine_residuals.push_back(res);
        affine_ok = affine_ok && res <= tols.affine;
    }
    if (!stage("affine", affine_ok, *std::max_element(rep.affine_residuals.begin(), rep.affine_residuals.end()),
               "saturators project onto span{1, X_1..X_n}")) {
        rep.verdict = "saturator failed the affine check";
        return rep;
    }

    // Exact orthogonal completion: extend the saturator directions by seed
    // vectors e_1..e_n, Gram-Schmidt without normalization.
    RatMatrix rows(n, n);
    std::vector<std::vector<Rational>> all = sat.directions;
    for (int s = 0; s < n && int(all.size()) < n; ++s) {
        std::vector<Rational> v(n, Rational(0));
        v[s] = 1;
        for (auto& prev : all) {
            Rational num(0), den(0);
            for (int k = 0; k < n; ++k) {
                num += prev[k] * v[k];
                den += prev[k] * prev[k];
            }
            Rational f = num / den;
            for (int k = 0; k < n; ++k) v[k] -= f * prev[k];
        }
        bool nonzero = false;
        for (auto& c : v) nonzero = nonzero || !is_zero(c);
        if (nonzero) all.push_back(std::move(v));
    }
    if (int(all.size()) != n) throw std::logic_error("completion failed");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rows(i, j) = all[i][j];

    // Float U for the report: normalized rows, det +1 on the completed block.
    Eigen::MatrixXd U(n, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(n);
        for (int j = 0; j < n; ++j) v(j) = to_double(rows(i, j));
        U.row(i) = v.transpose() / v.norm();
    }
    if (rep.r < n && U.determinant() < 0) U.row(n - 1) = -U.row(n - 1);
    rep.U = U;
    for (int i = 0; i < rep.r; ++i)
        rep.saturators.push_back(std::vector<double>(U.row(i).data(), U.row(i).data() + n));
    double orth = (U * U.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!stage("orthogonality", orth <= tols.orth, orth, "rows of U orthonormal")) {
        rep.verdict = "orthogonal completion failed its tolerance";
        return rep;
    }

    ChangeOfVariables cv = change_of_variables_exact(rows, m, xi);
    for (int i = 0; i < n; ++i) {
        Rational nrm2(0);
        for (int k = 0; k < n; ++k) nrm2 += rows(i, k) * rows(i, k);
        rep.y_variances.push_back(norm_sq(cv.Y[i], m) / nrm2);
    }

    // xi_{Y_k} = Y_k symbolically for every saturator direction.
    bool conj_ok = true;
    for (int k = 0; k < rep.r; ++k) {
        NcPoly lhs(n);
        for (int j = 0; j < n; ++j) lhs += rows(k, j) * xi[j];
        conj_ok = conj_ok && (lhs == cv.Y[k]);
    }
    if (!stage("conjugate-fixed", conj_ok, conj_ok ? 0.0 : 1.0, "xi_Y = Y on saturators, symbolically")) {
        rep.verdict = "transformed conjugate does not fix the saturator direction";
        return rep;
    }

    bool sc_ok = true;
    for (int k = 0; k < rep.r; ++k) {
        std::vector<Rational> res = semicircular_check(cv.Y[k], m, rep.max_moment);
        for (auto& rr : res) sc_ok = sc_ok && is_zero(rr);
        rep.moment_residuals.push_back(std::move(res));
    }
    if (!stage("semicircular", sc_ok, 0.0,
               "Catalan moments through order " + std::to_string(rep.max_moment) + ", exact")) {
        rep.verdict = "saturator direction is not standard semicircular";
        return rep;
    }

    // E_2 vanishes on saturators, and matches E - C_xi there.
    bool e2_ok = true;
    for (int k = 0; k < rep.r; ++k) {
        Rational e2 = energy2(cv.Y[k], space);
        Rational diff = dirichlet_energy(cv.Y[k], space) - curvature_contraction(cv.Y[k], J, space);
        e2_ok = e2_ok && is_zero(e2) && e2 == diff;
        rep.energy2_values.push_back(e2);
    }
    if (!stage("second-gradient", e2_ok, 0.0, "E_2 = 0 and E_2 = E - C_xi on saturators, exact")) {
        rep.verdict = "second-gradient energy does not vanish on a saturator";
        return rep;
    }

    std::vector<std::vector<NcPoly>> fams;
    for (int k = 0; k < rep.r; ++k) fams.push_back({cv.Y[k]});
    if (rep.r < n) {
        std::vector<NcPoly> rest(cv.Y.begin() + rep.r, cv.Y.end());
        fams.push_back(std::move(rest));
    }
    rep.freeness_residual = freeness_families(fams, m, rep.freeness_degree);
    if (!stage("freeness", is_zero(rep.freeness_residual), to_double(rep.freeness_residual),
               "alternating centered moments through degree " + std::to_string(rep.freeness_degree) +
                   ", exact")) {
        rep.verdict = "freeness certificate failed";
        return rep;
    }

    rep.passed = true;
    rep.verdict = "splits off L(F_" + std::to_string(rep.r) +
                  ") factor (numerically certified at degree " + std::to_string(space.degree_bound()) + ")";
    return rep;
}

}  // namespace freeprob
