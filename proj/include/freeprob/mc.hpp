#pragma once

// Random-matrix cross-check of the exact trace: correlated GUE families whose
// normalized word traces converge to the model's semicircular moments.
// Deterministic for a fixed seed: trial t draws from an mt19937_64 seeded by
// splitmix64(seed ^ (t+1)), so parallel and serial runs agree.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "freeprob/ncpoly.hpp"
#include "freeprob/state.hpp"

namespace freeprob {

struct McConfig {
    int N = 300;
    int T = 50;
    uint64_t seed = 1;
    CovarianceModel model = CovarianceModel::standard(1);

    void validate() const {
        if (N < 2) throw std::invalid_argument("matrix size must be at least 2");
        if (T < 1) throw std::invalid_argument("trial count must be at least 1");
    }
};

struct McEstimate {
    double value = 0;
    double std_error = 0;
};

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t trial_seed(uint64_t seed, int trial) { return splitmix64(seed ^ uint64_t(trial + 1)); }

// Normalized traces of a batch of words under one sampled family, sharing
// prefix products across the batch. tau(w) finishes with an elementwise
// contraction instead of a final matrix product.
inline std::vector<double> trial_word_traces(const std::vector<Word>& words,
                                             const std::vector<Eigen::MatrixXcd>& X, int N) {
    std::map<std::vector<int>, Eigen::MatrixXcd> prefix;
    auto product_of = [&](const std::vector<int>& head) -> const Eigen::MatrixXcd& {
        if (head.size() == 1) return X[head[0] - 1];
        auto it = prefix.find(head);
        if (it != prefix.end()) return it->second;
        size_t have = 1;
        Eigen::MatrixXcd acc = X[head[0] - 1];
        for (size_t len = head.size() - 1; len >= 2; --len) {
            auto jt = prefix.find(std::vector<int>(head.begin(), head.begin() + len));
            if (jt != prefix.end()) {
                have = len;
                acc = jt->second;
                break;
            }
        }
        for (size_t k = have; k < head.size(); ++k) {
            acc = acc * X[head[k] - 1];
            prefix.emplace(std::vector<int>(head.begin(), head.begin() + k + 1), acc);
        }
        return prefix.at(head);
    };

    std::vector<double> out;
    out.reserve(words.size());
    for (const Word& w : words) {
        const int L = w.degree();
        if (L == 0) {
            out.push_back(1.0);
            continue;
        }
        if (L == 1) {
            out.push_back(X[w.letters[0] - 1].trace().real() / N);
            continue;
        }
        std::vector<int> head(w.letters.begin(), w.letters.end() - 1);
        const Eigen::MatrixXcd& hp = product_of(head);
        const Eigen::MatrixXcd& last = X[w.letters[L - 1] - 1];
        std::complex<double> tr = (hp.array() * last.transpose().array()).sum();
        out.push_back(tr.real() / N);
    }
    return out;
}

inline McEstimate summarize(const std::vector<double>& samples) {
    const int T = int(samples.size());
    double mean = 0;
    for (double v : samples) mean += v;
    mean /= T;
    double var = 0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var = (T > 1) ? var / (T - 1) : 0.0;
    return McEstimate{mean, std::sqrt(var / T)};
}

}  // namespace detail

// One trial's family: S_1..S_n independent normalized GUE samples
// (H = (A + A^*)/sqrt(2) with A_ij complex Gaussian of variance 1/N), mixed
// by the symmetric square root of the covariance.
inline std::vector<Eigen::MatrixXcd> sample_family(const McConfig& cfg, int trial) {
    cfg.validate();
    const int N = cfg.N;
    const int n = cfg.model.gens();
    std::mt19937_64 rng(detail::trial_seed(cfg.seed, trial));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double entry_sd = 1.0 / std::sqrt(2.0 * N);

    std::vector<Eigen::MatrixXcd> gue;
    gue.reserve(n);
    for (int s = 0; s < n; ++s) {
        Eigen::MatrixXcd A(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                A(i, j) = std::complex<double>(entry_sd * gauss(rng), entry_sd * gauss(rng));
        gue.push_back((A + A.adjoint()) / std::sqrt(2.0));
    }

    Eigen::MatrixXd C = cfg.model.covariance().to_double();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    Eigen::MatrixXd sqrtC =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
        es.eigenvectors().transpose();

    std::vector<Eigen::MatrixXcd> X(n, Eigen::MatrixXcd::Zero(N, N));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (sqrtC(i, j) != 0.0) X[i] += sqrtC(i, j) * gue[j];
    return X;
}

namespace detail {

// Trials are independent; they are distributed over a small pool and reduced
// in trial order, so the result matches a serial run.
inline std::vector<std::vector<double>> mc_per_trial_word_traces_impl(const std::vector<Word>& words,
                                                                      const McConfig& cfg) {
    const int T = cfg.T;
    std::vector<std::vector<double>> per_trial(T);
    std::atomic<int> next{0};
    auto run = [&]() {
        for (;;) {
            int t = next.fetch_add(1);
            if (t >= T) return;
            std::vector<Eigen::MatrixXcd> X = sample_family(cfg, t);
            per_trial[t] = trial_word_traces(words, X, cfg.N);
        }
    };
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < workers; ++k) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    return per_trial;
}

}  // namespace detail

// Monte-Carlo estimates for a batch of words under a shared trial stream.
inline std::vector<McEstimate> mc_trace_words(const std::vector<Word>& words, const McConfig& cfg) {
    cfg.validate();
    for (const Word& w : words)
        if (w.degree() > 10) throw std::invalid_argument("degree cap for mc_trace is 10");
    auto per_trial = detail::mc_per_trial_word_traces_impl(words, cfg);
    std::vector<McEstimate> out(words.size());
    for (size_t w = 0; w < words.size(); ++w) {
        std::vector<double> samples(cfg.T);
        for (int t = 0; t < cfg.T; ++t) samples[t] = per_trial[t][w];
        out[w] = detail::summarize(samples);
    }
    return out;
}

// Mean over trials of the normalized trace of p at the sampled family.
inline McEstimate mc_trace(const NcPoly& p, const McConfig& cfg) {
    cfg.validate();
    if (p.degree() > 10) throw std::invalid_argument("degree cap for mc_trace is 10");
    std::vector<Word> words;
    std::vector<double> coeffs;
    for (auto& [w, c] : p.terms()) {
        words.push_back(w);
        coeffs.push_back(to_double(c));
    }
    if (words.empty()) return McEstimate{0.0, 0.0};
    auto per_trial = detail::mc_per_trial_word_traces_impl(words, cfg);
    std::vector<double> samples(cfg.T);
    for (int t = 0; t < cfg.T; ++t) {
        double s = 0;
        for (size_t w = 0; w < words.size(); ++w) s += coeffs[w] * per_trial[t][w];
        samples[t] = s;
    }
    return detail::summarize(samples);
}

}  // namespace freeprob
