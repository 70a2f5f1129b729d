#pragma once

// JSON (de)serialization of covariance models and the CSV exports.

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeprob/rigidity.hpp"
#include "freeprob/spectral.hpp"
#include "freeprob/state.hpp"

namespace freeprob {

using json = nlohmann::ordered_json;

inline json rat_matrix_to_json(const RatMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline RatMatrix rat_matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw std::invalid_argument("expected a matrix as array of rows");
    const int n = int(rows.size());
    RatMatrix m(n, int(rows[0].size()));
    for (int i = 0; i < n; ++i) {
        if (int(rows[i].size()) != m.cols()) throw std::invalid_argument("ragged matrix rows");
        for (int j = 0; j < m.cols(); ++j) {
            const json& cell = rows[i][j];
            if (cell.is_string())
                m(i, j) = parse_rational(cell.get<std::string>());
            else if (cell.is_number_integer())
                m(i, j) = Rational(cell.get<long>());
            else
                throw std::invalid_argument("matrix entries must be rational strings or integers");
        }
    }
    return m;
}

// {"n": int, "C": [[rational strings]]}
inline json model_to_json(const CovarianceModel& m) {
    json j;
    j["n"] = m.gens();
    j["C"] = rat_matrix_to_json(m.covariance());
    return j;
}

inline CovarianceModel model_from_json(const json& j) {
    if (!j.contains("n")) throw std::invalid_argument("model JSON needs an \"n\" field");
    int n = j["n"].get<int>();
    if (j.contains("C")) {
        RatMatrix C = rat_matrix_from_json(j["C"]);
        if (C.rows() != n || C.cols() != n) throw std::invalid_argument("covariance has wrong dimensions");
        return CovarianceModel::from_covariance(std::move(C));
    }
    if (j.contains("A")) {
        RatMatrix A = rat_matrix_from_json(j["A"]);
        if (A.rows() != n || A.cols() != n)
            throw std::invalid_argument("quadratic form has wrong dimensions");
        return CovarianceModel::from_quadratic_form(A);
    }
    throw std::invalid_argument("model JSON needs a \"C\" or \"A\" matrix");
}

inline CovarianceModel model_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    json j = json::parse(in);
    return model_from_json(j);
}

// Jacobian export: n x n array of tensor-term lists.
inline json jacobian_to_json(const JacobianTensor& J) {
    json rows = json::array();
    for (int i = 1; i <= J.gens(); ++i) {
        json row = json::array();
        for (int j = 1; j <= J.gens(); ++j) {
            json terms = json::array();
            for (auto& [k, c] : J.entry(i, j).terms()) {
                json t;
                t["coeff"] = to_string(c);
                t["left"] = k.first.str();
                t["right"] = k.second.str();
                terms.push_back(t);
            }
            row.push_back(terms);
        }
        rows.push_back(row);
    }
    return rows;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

// One row per eigenvector: value, multiplicity of its tolerance-cluster,
// coefficients in the monomial basis.
inline void write_spectrum_csv(const std::string& path, const Eigensystem& es,
                               const TruncatedSpace& space, double cluster_tol) {
    std::string out = "value,multiplicity";
    for (const Word& w : space.basis()) out += "," + w.str();
    out += "\n";
    std::vector<EigenCluster> clusters = cluster_eigenvalues(es.values, cluster_tol);
    int at = 0, within = 0;
    for (int i = 0; i < es.values.size(); ++i) {
        if (within == clusters[at].multiplicity) {
            ++at;
            within = 0;
        }
        ++within;
        out += detail::fmt(es.values(i)) + "," + std::to_string(clusters[at].multiplicity);
        for (int r = 0; r < es.vectors.rows(); ++r) out += "," + detail::fmt(es.vectors(r, i));
        out += "\n";
    }
    detail::write_file(path, out);
}

inline void write_saturators_csv(const std::string& path, const RigidityReport& rep) {
    std::string out = "saturator,affine_residual";
    const int n = int(rep.U.cols());
    for (int j = 1; j <= n; ++j) out += ",u" + std::to_string(j);
    out += "\n";
    for (int k = 0; k < rep.r; ++k) {
        out += std::to_string(k + 1) + "," + detail::fmt(rep.affine_residuals[k]);
        for (int j = 0; j < n; ++j) out += "," + detail::fmt(rep.saturators[k][j]);
        out += "\n";
    }
    detail::write_file(path, out);
}

inline void write_moments_csv(const std::string& path, const RigidityReport& rep) {
    std::string out = "saturator,order,residual\n";
    for (int k = 0; k < rep.r; ++k)
        for (size_t m = 0; m < rep.moment_residuals[k].size(); ++m)
            out += std::to_string(k + 1) + "," + std::to_string(m + 1) + "," +
                   to_string(rep.moment_residuals[k][m]) + "\n";
    detail::write_file(path, out);
}

}  // namespace freeprob
