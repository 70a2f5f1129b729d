#pragma once

// Finite-dimensional realizations of the free Laplacian, its tensor
// extension, resolvents, Dirichlet energies and the Poincare constant on
// degree-truncated polynomial spaces. Matrices are exact rationals; only the
// eigensolves run in floating point.

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/calculus.hpp"
#include "freeprob/linalg.hpp"
#include "freeprob/state.hpp"

namespace freeprob {

// Monomial basis of all words of length <= d, with exact Gram matrix.
class TruncatedSpace {
  public:
    TruncatedSpace(const CovarianceModel& model, int d) : n_(model.gens()), d_(d), model_(model) {
        if (d < 0) throw std::invalid_argument("negative degree bound");
        std::vector<Word> level{Word{}};
        basis_ = level;
        for (int k = 1; k <= d; ++k) {
            std::vector<Word> next;
            next.reserve(level.size() * n_);
            for (const Word& w : level)
                for (int i = 1; i <= n_; ++i) {
                    Word v = w;
                    v.letters.push_back(i);
                    next.push_back(std::move(v));
                }
            basis_.insert(basis_.end(), next.begin(), next.end());
            level = std::move(next);
        }
        for (size_t i = 0; i < basis_.size(); ++i) index_[basis_[i]] = int(i);

        const int N = dim();
        gram_ = RatMatrix(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = i; j < N; ++j) {
                Rational g = model_.trace_word(basis_[j].reversed().concat(basis_[i]));
                gram_(i, j) = g;
                gram_(j, i) = g;
            }
        if (!is_positive_definite(gram_))
            throw std::logic_error("Gram matrix of the truncated space is not positive definite");
    }

    int gens() const { return n_; }
    int degree_bound() const { return d_; }
    int dim() const { return int(basis_.size()); }
    const std::vector<Word>& basis() const { return basis_; }
    const CovarianceModel& model() const { return model_; }
    const RatMatrix& gram() const { return gram_; }

    int index_of(const Word& w) const {
        auto it = index_.find(w);
        if (it == index_.end()) throw std::out_of_range("word outside the truncated space");
        return it->second;
    }

    std::vector<Rational> expand(const NcPoly& p) const {
        std::vector<Rational> col(dim(), Rational(0));
        for (auto& [w, c] : p.terms()) {
            if (w.degree() > d_)
                throw std::out_of_range("degree overflow: polynomial does not fit the truncated space");
            col[index_of(w)] = c;
        }
        return col;
    }

    NcPoly poly_of(const std::vector<Rational>& col) const {
        NcPoly p(n_);
        for (int i = 0; i < dim(); ++i) p.add_term(basis_[i], col[i]);
        return p;
    }

    Eigen::MatrixXd gram_dense() const { return gram_.to_double(); }

  private:
    int n_, d_;
    std::vector<Word> basis_;
    std::map<Word, int> index_;
    CovarianceModel model_;
    RatMatrix gram_;
};

// Word-pair basis of total degree <= d for M0 (x) M0.
class TensorSpace2 {
  public:
    TensorSpace2(const CovarianceModel& model, int d) : n_(model.gens()), d_(d), model_(model) {
        for (int t = 0; t <= d; ++t)
            for (int a = 0; a <= t; ++a) append_pairs(a, t - a);
        for (size_t i = 0; i < basis_.size(); ++i) index_[basis_[i]] = int(i);
        const int N = dim();
        gram_ = RatMatrix(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = i; j < N; ++j) {
                Rational left = model_.trace_word(basis_[j].first.reversed().concat(basis_[i].first));
                Rational g(0);
                if (!is_zero(left))
                    g = left * model_.trace_word(basis_[i].second.concat(basis_[j].second.reversed()));
                gram_(i, j) = g;
                gram_(j, i) = g;
            }
    }

    int gens() const { return n_; }
    int degree_bound() const { return d_; }
    int dim() const { return int(basis_.size()); }
    const std::vector<WordPair>& basis() const { return basis_; }
    const CovarianceModel& model() const { return model_; }
    const RatMatrix& gram() const { return gram_; }

    int index_of(const WordPair& p) const {
        auto it = index_.find(p);
        if (it == index_.end()) throw std::out_of_range("word pair outside the truncated tensor space");
        return it->second;
    }

    std::vector<Rational> expand(const TensorPoly2& u) const {
        std::vector<Rational> col(dim(), Rational(0));
        for (auto& [k, c] : u.terms()) {
            if (k.first.degree() + k.second.degree() > d_)
                throw std::out_of_range("degree overflow: tensor does not fit the truncated space");
            col[index_of(k)] = c;
        }
        return col;
    }

    TensorPoly2 tensor_of_col(const std::vector<Rational>& col) const {
        TensorPoly2 u(n_);
        for (int i = 0; i < dim(); ++i) u.add_term(basis_[i], col[i]);
        return u;
    }

  private:
    void append_pairs(int la, int lb) {
        std::vector<Word> as = words_of_length(la), bs = words_of_length(lb);
        for (const Word& a : as)
            for (const Word& b : bs) basis_.push_back({a, b});
    }

    std::vector<Word> words_of_length(int len) const {
        std::vector<Word> out{Word{}};
        for (int k = 0; k < len; ++k) {
            std::vector<Word> next;
            next.reserve(out.size() * n_);
            for (const Word& w : out)
                for (int i = 1; i <= n_; ++i) {
                    Word v = w;
                    v.letters.push_back(i);
                    next.push_back(std::move(v));
                }
            out = std::move(next);
        }
        return out;
    }

    int n_, d_;
    std::vector<WordPair> basis_;
    std::map<WordPair, int> index_;
    CovarianceModel model_;
    RatMatrix gram_;
};

// Exact matrix of an operator between truncated spaces (columns = images of
// domain basis vectors), with a floating-point shadow on demand.
struct OperatorMatrix {
    RatMatrix mat;
    Eigen::MatrixXd dense() const { return mat.to_double(); }
    int rows() const { return mat.rows(); }
    int cols() const { return mat.cols(); }
};

// Voiculescu's adjoint identity:
//   d_i^*(p (x) q) = p xi_i q - p (tau (x) id)(d_i q) - (id (x) tau)(d_i p) q,
// extended bilinearly. Exact adjoint of d_i whenever xi is the conjugate
// system of the model.
inline NcPoly adjoint_fdq(int i, const TensorPoly2& u, const std::vector<NcPoly>& xi,
                          const CovarianceModel& m) {
    const int n = u.gens();
    detail::check_index(i, n);
    if (int(xi.size()) != n) throw std::invalid_argument("conjugate vector has wrong length");
    NcPoly out(n);
    for (auto& [k, c] : u.terms()) {
        NcPoly p = NcPoly::monomial(k.first, n), q = NcPoly::monomial(k.second, n);
        out += c * (p * xi[i - 1] * q);
        out -= c * (p * slice_tau_id(fdq(i, q), m));
        out -= c * (slice_id_tau(fdq(i, p), m) * q);
    }
    return out;
}

inline void require_linear_conjugates(const std::vector<NcPoly>& xi) {
    for (size_t i = 0; i < xi.size(); ++i)
        if (xi[i].degree() > 1)
            throw std::invalid_argument(
                "nonlinear conjugate variable xi_" + std::to_string(i + 1) +
                " (degree " + std::to_string(xi[i].degree()) +
                "): the Laplacian would leak degree past the truncation; "
                "only linear conjugates are accepted for operator construction");
}

// Delta applied symbolically to a polynomial.
inline NcPoly laplacian_apply(const NcPoly& y, const std::vector<NcPoly>& xi, const CovarianceModel& m) {
    NcPoly out(y.gens());
    for (int i = 1; i <= y.gens(); ++i) out += adjoint_fdq(i, fdq(i, y), xi, m);
    return out;
}

// Delta (x) id + id (x) Delta applied symbolically to a rank-2 tensor.
inline TensorPoly2 tensor_laplacian_apply(const TensorPoly2& u, const std::vector<NcPoly>& xi,
                                          const CovarianceModel& m) {
    TensorPoly2 out(u.gens());
    for (auto& [k, c] : u.terms()) {
        NcPoly a = NcPoly::monomial(k.first, u.gens()), b = NcPoly::monomial(k.second, u.gens());
        out += c * tensor_of(laplacian_apply(a, xi, m), b);
        out += c * tensor_of(a, laplacian_apply(b, xi, m));
    }
    return out;
}

// Matrix of Delta = sum_i d_i^* d_i in the monomial basis. Built through the
// adjoint formula and cross-checked exactly against the Gram-adjoint
// construction: G * M must equal the Dirichlet form matrix
// D[i][j] = sum_k <d_k b_j, d_k b_i>.
inline OperatorMatrix laplacian(const TruncatedSpace& space, const std::vector<NcPoly>& xi) {
    require_linear_conjugates(xi);
    const int N = space.dim();
    const int n = space.gens();
    RatMatrix M(N, N);
    std::vector<std::vector<TensorPoly2>> grads(N);
    for (int j = 0; j < N; ++j) {
        NcPoly bj = NcPoly::monomial(space.basis()[j], n);
        grads[j].reserve(n);
        NcPoly img(n);
        for (int i = 1; i <= n; ++i) {
            TensorPoly2 g = fdq(i, bj);
            img += adjoint_fdq(i, g, xi, space.model());
            grads[j].push_back(std::move(g));
        }
        std::vector<Rational> col = space.expand(img);
        for (int r = 0; r < N; ++r) M(r, j) = col[r];
    }
    RatMatrix D(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
            Rational s(0);
            for (int k = 0; k < n; ++k) s += tensor_inner(grads[j][k], grads[i][k], space.model());
            D(i, j) = s;
            D(j, i) = s;
        }
    if (!(space.gram() * M == D))
        throw std::logic_error(
            "Laplacian cross-check failed: adjoint-formula matrix disagrees with the "
            "Gram-adjoint construction");
    return OperatorMatrix{std::move(M)};
}

// Matrix of Delta (x) id + id (x) Delta on the word-pair basis, composed from
// a verified one-leg Laplacian.
inline OperatorMatrix tensor_laplacian(const TensorSpace2& space2, const std::vector<NcPoly>& xi) {
    require_linear_conjugates(xi);
    const int N = space2.dim();
    RatMatrix M(N, N);
    for (int j = 0; j < N; ++j) {
        const WordPair& wp = space2.basis()[j];
        TensorPoly2 u = TensorPoly2::simple(wp.first, wp.second, space2.gens());
        std::vector<Rational> col = space2.expand(tensor_laplacian_apply(u, xi, space2.model()));
        for (int r = 0; r < N; ++r) M(r, j) = col[r];
    }
    return OperatorMatrix{std::move(M)};
}

// E(Y) = sum_i <d_i Y, d_i Y>.
inline Rational dirichlet_energy(const NcPoly& y, const TruncatedSpace& space) {
    if (y.degree() > space.degree_bound()) throw std::out_of_range("degree overflow in dirichlet_energy");
    Rational e(0);
    for (int i = 1; i <= y.gens(); ++i) e += tensor_norm_sq(fdq(i, y), space.model());
    return e;
}

struct Eigensystem {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns, G-orthonormal
};

// Eigensystem of a G-self-adjoint operator via the symmetric-definite pencil
// (G*M, G), reduced by congruence inside Eigen.
inline Eigensystem eigensystem(const OperatorMatrix& op, const RatMatrix& gram) {
    RatMatrix GM = gram * op.mat;
    Eigen::MatrixXd A = GM.to_double();
    A = 0.5 * (A + A.transpose().eval());
    Eigen::MatrixXd B = gram.to_double();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
    return Eigensystem{es.eigenvalues(), es.eigenvectors()};
}

struct EigenCluster {
    double value;
    int multiplicity;
};

inline std::vector<EigenCluster> cluster_eigenvalues(const Eigen::VectorXd& vals, double tol) {
    std::vector<EigenCluster> out;
    for (int i = 0; i < vals.size(); ++i) {
        if (!out.empty() && std::abs(vals[i] - out.back().value) <= tol) {
            auto& c = out.back();
            c.value = (c.value * c.multiplicity + vals[i]) / (c.multiplicity + 1);
            ++c.multiplicity;
        } else {
            out.push_back({vals[i], 1});
        }
    }
    return out;
}

struct PoincareResult {
    double constant;          // 1 / lambda_1
    double gap;               // lambda_1
    Eigen::VectorXd minimizer;  // coefficients in the monomial basis
    double coarse_bound;      // 4 n max_i ||X_i||^2 with ||X_i|| = 2 sqrt(C_ii)
};

// Minimum of the Rayleigh quotient E(f)/||f||^2 over the G-orthogonal
// complement of the constants.
inline PoincareResult poincare_constant(const TruncatedSpace& space) {
    const int N = space.dim();
    if (N < 2) throw std::invalid_argument("truncated space too small for a spectral gap");
    OperatorMatrix L = laplacian(space, space.model().conjugates());
    Eigen::MatrixXd G = space.gram_dense();
    RatMatrix GM = space.gram() * L.mat;
    Eigen::MatrixXd D = GM.to_double();
    D = 0.5 * (D + D.transpose().eval());

    // Centered subspace {f : <f,1>_G = 0} = the hyperplane with normal G e_0.
    Eigen::VectorXd g0 = G.col(0);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g0);
    Eigen::MatrixXd Qfull = qr.householderQ();
    Eigen::MatrixXd Q = Qfull.rightCols(N - 1);

    Eigen::MatrixXd Dr = Q.transpose() * D * Q;
    Eigen::MatrixXd Gr = Q.transpose() * G * Q;
    Dr = 0.5 * (Dr + Dr.transpose().eval());
    Gr = 0.5 * (Gr + Gr.transpose().eval());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Dr, Gr);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
    double lambda1 = es.eigenvalues()(0);
    Eigen::VectorXd minimizer = Q * es.eigenvectors().col(0);

    double maxc = 0;
    for (int i = 0; i < space.gens(); ++i)
        maxc = std::max(maxc, to_double(space.model().covariance()(i, i)));
    return PoincareResult{1.0 / lambda1, lambda1, minimizer, 4.0 * space.gens() * 4.0 * maxc};
}

// eta_alpha = alpha (alpha + Delta)^{-1} as a dense matrix in the monomial
// basis, with the residuals of its contractivity/unitality/trace properties.
struct ResolventResult {
    Eigen::MatrixXd eta;
    double unital_residual;        // ||eta(1) - 1||_G
    double trace_residual;         // max_j |tau(eta b_j) - tau(b_j)|
    double contraction_excess;     // max(0, ||eta||_G - 1)
    double max_deviation_ratio;    // max_j ||b_j - eta b_j||_G / ||b_j||_G
};

inline ResolventResult resolvent(double alpha, const OperatorMatrix& L, const TruncatedSpace& space) {
    if (!(alpha > 0)) throw std::invalid_argument("resolvent parameter must be positive");
    const int N = space.dim();
    Eigen::MatrixXd M = L.dense();
    Eigen::MatrixXd eta =
        alpha * (alpha * Eigen::MatrixXd::Identity(N, N) + M).partialPivLu().solve(
                    Eigen::MatrixXd::Identity(N, N));
    Eigen::MatrixXd G = space.gram_dense();

    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(N);
    e0(0) = 1.0;
    Eigen::VectorXd du = eta * e0 - e0;
    double unital = std::sqrt(std::max(0.0, du.dot(G * du)));

    Eigen::VectorXd t(N);
    for (int j = 0; j < N; ++j) t(j) = to_double(space.model().trace_word(space.basis()[j]));
    double trace_res = (t.transpose() * eta - t.transpose()).cwiseAbs().maxCoeff();

    Eigen::LLT<Eigen::MatrixXd> llt(G);
    Eigen::MatrixXd Lc = llt.matrixL();
    Eigen::MatrixXd B = Lc.transpose() * eta * Lc.transpose().triangularView<Eigen::Upper>().solve(
                                              Eigen::MatrixXd::Identity(N, N));
    double opnorm = B.jacobiSvd().singularValues()(0);

    double worst = 0;
    for (int j = 0; j < N; ++j) {
        Eigen::VectorXd ej = Eigen::VectorXd::Zero(N);
        ej(j) = 1.0;
        Eigen::VectorXd d = ej - eta * ej;
        double num = std::sqrt(std::max(0.0, d.dot(G * d)));
        double den = std::sqrt(G(j, j));
        worst = std::max(worst, num / den);
    }
    return ResolventResult{eta, unital, trace_res, std::max(0.0, opnorm - 1.0), worst};
}

// Second-gradient energy, computed along two independent routes and compared
// exactly:
//   (a) sum_i <Delta^(x) d_i Y, d_i Y>
//   (b) sum_{i,j} ||(d_j (x) id) d_i Y||^2 + ||(id (x) d_j) d_i Y||^2.
inline Rational energy2(const NcPoly& y, const TruncatedSpace& space) {
    if (y.degree() > space.degree_bound()) throw std::out_of_range("degree overflow in energy2");
    const int n = y.gens();
    const CovarianceModel& m = space.model();
    std::vector<NcPoly> xi = m.conjugates();
    Rational via_tensor_laplacian(0), via_second_quotients(0);
    for (int i = 1; i <= n; ++i) {
        TensorPoly2 gi = fdq(i, y);
        via_tensor_laplacian += tensor_inner(tensor_laplacian_apply(gi, xi, m), gi, m);
        for (int j = 1; j <= n; ++j) {
            via_second_quotients += tensor_norm_sq(tensor_fdq(j, Leg::Left, gi), m);
            via_second_quotients += tensor_norm_sq(tensor_fdq(j, Leg::Right, gi), m);
        }
    }
    if (via_tensor_laplacian != via_second_quotients)
        throw std::logic_error("energy2: tensor Dirichlet identity violated (internal error)");
    return via_tensor_laplacian;
}

// L2 norm squared of d_i Delta x - Delta^(x) d_i x - sum_j d_j x # d_i xi_j;
// identically zero for the models in scope.
inline Rational almost_commutation_residual_sq(int i, const NcPoly& x, const std::vector<NcPoly>& xi,
                                               const TruncatedSpace& space) {
    detail::check_index(i, x.gens());
    require_linear_conjugates(xi);
    if (x.degree() > space.degree_bound() - 1)
        throw std::out_of_range("degree overflow in almost_commutation_residual");
    const CovarianceModel& m = space.model();
    TensorPoly2 r = fdq(i, laplacian_apply(x, xi, m));
    r -= tensor_laplacian_apply(fdq(i, x), xi, m);
    for (int j = 1; j <= x.gens(); ++j) r -= sharp2(fdq(j, x), fdq(i, xi[j - 1]));
    return tensor_norm_sq(r, m);
}

}  // namespace freeprob
