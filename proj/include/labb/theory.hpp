#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "labb/errors.hpp"
#include "labb/parallel.hpp"
#include "labb/rng.hpp"
#include "labb/stats.hpp"

namespace labb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline double smallest_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Cholesky factorization with a diagnostic on failure.
inline Eigen::LLT<Matrix> cholesky_spd(const Matrix& sigma, const char* what) {
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw DomainError(std::string(what) +
                          " is not positive definite (smallest eigenvalue " +
                          std::to_string(smallest_eigenvalue(sigma)) + ")");
    return llt;
}

} // namespace detail

// Parameter bundle for the estimation-bias analysis: two market models
// sharing the risk aversion, sample length and asset count. Index 1 is the
// dataset carrying the selection bias, index 2 the clean one.
struct BiasModel {
    Vector mu1;
    Matrix sigma1;
    Vector mu2;
    Matrix sigma2;
    double gamma = 1.0;
    int T = 0;
    int N = 0;

    void validate() const {
        if (N < 1)
            throw DomainError("N must be at least 1");
        if (!(gamma > 0.0))
            throw DomainError("gamma must be positive");
        if (T <= N + 4)
            throw DomainError("T must exceed N+4 (got T=" + std::to_string(T) +
                              ", N=" + std::to_string(N) + ")");
        auto check = [&](const Vector& mu, const Matrix& sigma, const char* tag) {
            if (mu.size() != N || sigma.rows() != N || sigma.cols() != N)
                throw DomainError(std::string("dimension mismatch in dataset ") + tag);
            if (!sigma.isApprox(sigma.transpose(), 1e-12))
                throw DomainError(std::string("sigma") + tag + " is not symmetric");
            detail::cholesky_spd(sigma, tag);
        };
        check(mu1, sigma1, "1");
        check(mu2, sigma2, "2");
    }
};

// Risk-adjusted excess return U(w) = w'mu - (gamma/2) w'Sigma w.
inline double utility(const Vector& weights, const Vector& mu, const Matrix& sigma,
                      double gamma) {
    if (weights.size() != mu.size() || sigma.rows() != weights.size() ||
        sigma.cols() != weights.size())
        throw DomainError("utility: dimension mismatch");
    return weights.dot(mu) - 0.5 * gamma * weights.dot(sigma * weights);
}

// Mean-variance optimal weights (1/gamma) Sigma^{-1} mu, computed as a
// Cholesky solve with a residual check rather than an explicit inverse.
inline Vector markowitz_weights(const Vector& mu, const Matrix& sigma, double gamma) {
    if (!(gamma > 0.0))
        throw DomainError("gamma must be positive");
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw DomainError("markowitz_weights: dimension mismatch");
    auto llt = detail::cholesky_spd(sigma, "sigma");
    Vector rhs = mu / gamma;
    Vector w = llt.solve(rhs);
    double resid = (sigma * w - rhs).norm();
    if (resid > 1e-10 * rhs.norm())
        throw DomainError("markowitz solve is ill-conditioned (residual " +
                          std::to_string(resid) + ", smallest eigenvalue " +
                          std::to_string(detail::smallest_eigenvalue(sigma)) + ")");
    return w;
}

// Squared Sharpe ratio of the optimal portfolio, mu'Sigma^{-1}mu.
// Satisfies U(w*) = sharpe_sq_star / (2 gamma).
inline double sharpe_sq_star(const Vector& mu, const Matrix& sigma) {
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw DomainError("sharpe_sq_star: dimension mismatch");
    auto llt = detail::cholesky_spd(sigma, "sigma");
    return mu.dot(llt.solve(mu));
}

// Squared Sharpe ratio of the equally weighted portfolio,
// (1'mu)^2 / (1'Sigma 1); invariant to the weight scale.
inline double sharpe_sq_ew(const Vector& mu, const Matrix& sigma) {
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw DomainError("sharpe_sq_ew: dimension mismatch");
    detail::cholesky_spd(sigma, "sigma");
    Vector ones = Vector::Ones(mu.size());
    double num = ones.dot(mu);
    return num * num / ones.dot(sigma * ones);
}

struct SampleEstimates {
    Vector mu_hat;
    Matrix sigma_hat; // 1/T normalization
};

// Sample mean and covariance of a T x N return matrix, with the covariance
// normalized by 1/T (so T * sigma_hat is Wishart with T-1 dof).
inline SampleEstimates sample_estimates(const Matrix& returns) {
    long T = returns.rows();
    long N = returns.cols();
    if (T <= N)
        throw DomainError("sample_estimates requires T > N");
    SampleEstimates est;
    est.mu_hat = returns.colwise().mean();
    Matrix centered = returns.rowwise() - est.mu_hat.transpose();
    est.sigma_hat = centered.transpose() * centered / static_cast<double>(T);
    return est;
}

// Plug-in Markowitz weights (1/gamma) sigma_hat^{-1} mu_hat; throws on a
// singular sample covariance.
inline Vector sample_markowitz_weights(const Matrix& returns, double gamma) {
    SampleEstimates est = sample_estimates(returns);
    auto llt = detail::cholesky_spd(est.sigma_hat, "sample covariance");
    return llt.solve(est.mu_hat) / gamma;
}

// Finite-sample attenuation factor
// k = T/(T-N-2) * (2 - T(T-2) / ((T-N-1)(T-N-4))), defined for T > N+4
// and strictly below 1 there.
inline double k_factor(int T, int N) {
    if (N < 1)
        throw DomainError("N must be at least 1");
    if (T <= N + 4)
        throw DomainError("k_factor requires T > N+4 (got T=" + std::to_string(T) +
                          ", N=" + std::to_string(N) + ")");
    double Td = T;
    double a = Td / (Td - N - 2);
    double c = Td * (Td - 2) / ((Td - N - 1) * (Td - N - 4));
    return a * (2.0 - c);
}

// Gap between the true performance spread of the two optimal portfolios and
// the expected spread of their plug-in counterparts:
//   Delta = [U(w1*) - U(w2*)] - [E U(w1_hat) - E U(w2_hat)]
//         = (1-k)/(2 gamma) * (S*1^2 - S*2^2).
// Positive whenever dataset 1 has the larger squared Sharpe ratio: the true
// spread exceeds what plug-in estimation reports on average.
inline double delta_bias(const BiasModel& model) {
    model.validate();
    double k = k_factor(model.T, model.N);
    double s1 = sharpe_sq_star(model.mu1, model.sigma1);
    double s2 = sharpe_sq_star(model.mu2, model.sigma2);
    return (1.0 - k) / (2.0 * model.gamma) * (s1 - s2);
}

// Wishart draw W_N(sigma, dof) via the Bartlett decomposition: lower
// triangular A with chi-distributed diagonal and standard-normal
// subdiagonal, conjugated by the Cholesky factor of sigma.
inline Matrix sample_wishart(const Matrix& sigma, int dof, Rng& rng) {
    long n = sigma.rows();
    if (sigma.cols() != n)
        throw DomainError("sample_wishart: sigma must be square");
    if (dof < n)
        throw DomainError("sample_wishart requires dof >= N");
    auto llt = detail::cholesky_spd(sigma, "sigma");
    Matrix bartlett = Matrix::Zero(n, n);
    for (long i = 0; i < n; ++i) {
        bartlett(i, i) = std::sqrt(rng.chi_square(static_cast<double>(dof - i)));
        for (long j = 0; j < i; ++j)
            bartlett(i, j) = rng.normal();
    }
    Matrix lb = llt.matrixL() * bartlett;
    return lb * lb.transpose();
}

inline Matrix sample_wishart(const Matrix& sigma, int dof, uint64_t seed) {
    Rng rng(seed);
    return sample_wishart(sigma, dof, rng);
}

// T rows of N(mu, sigma) given the Cholesky factor of sigma. Column-by-row
// draw order is part of the reproducibility contract.
inline Matrix sample_normal_rows(const Vector& mu, const Matrix& chol_lower, int T, Rng& rng) {
    long n = mu.size();
    Matrix rows(T, n);
    Vector z(n);
    for (int t = 0; t < T; ++t) {
        for (long i = 0; i < n; ++i)
            z(i) = rng.normal();
        rows.row(t) = (mu + chol_lower * z).transpose();
    }
    return rows;
}

struct McBiasResult {
    double estimated_spread_mean = 0.0; // E U(w1_hat) - E U(w2_hat)
    double estimated_spread_se = 0.0;
    double true_spread = 0.0; // U(w1*) - U(w2*)
    double delta_mc = 0.0;    // true_spread - estimated_spread_mean
    double delta_se = 0.0;
    long trials_used = 0;
    long trials_discarded = 0;
};

// Monte-Carlo estimate of the expected plug-in utility spread and of Delta.
// Each trial draws its own substreams from (seed, trial index), so results
// are identical for any thread count.
inline McBiasResult mc_estimated_bias(const BiasModel& model, long trials, uint64_t seed,
                                      unsigned threads = 1) {
    model.validate();
    if (trials < 1)
        throw DomainError("trials must be at least 1");

    Eigen::LLT<Matrix> llt1 = detail::cholesky_spd(model.sigma1, "sigma1");
    Eigen::LLT<Matrix> llt2 = detail::cholesky_spd(model.sigma2, "sigma2");
    Matrix chol1 = llt1.matrixL();
    Matrix chol2 = llt2.matrixL();

    std::vector<double> spread(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t i) {
        auto run_one = [&](const Vector& mu, const Matrix& chol, const Matrix& sigma,
                           uint64_t stream, double& out) {
            Rng rng = Rng::substream(seed, stream);
            Matrix returns = sample_normal_rows(mu, chol, model.T, rng);
            SampleEstimates est = sample_estimates(returns);
            Eigen::LLT<Matrix> llt(est.sigma_hat);
            if (llt.info() != Eigen::Success)
                return false;
            Vector w = llt.solve(est.mu_hat) / model.gamma;
            out = utility(w, mu, sigma, model.gamma);
            return true;
        };
        double u1 = 0.0, u2 = 0.0;
        bool ok = run_one(model.mu1, chol1, model.sigma1, 2 * i, u1) &&
                  run_one(model.mu2, chol2, model.sigma2, 2 * i + 1, u2);
        spread[i] = ok ? u1 - u2 : std::numeric_limits<double>::quiet_NaN();
    });

    std::vector<double> kept;
    kept.reserve(spread.size());
    for (double x : spread)
        if (!std::isnan(x))
            kept.push_back(x);
    McBiasResult res;
    res.trials_used = static_cast<long>(kept.size());
    res.trials_discarded = trials - res.trials_used;
    if (kept.size() < 2)
        throw DomainError("too few usable Monte-Carlo trials");
    res.estimated_spread_mean = mean(kept);
    res.estimated_spread_se = sample_stdev(kept) / std::sqrt(static_cast<double>(kept.size()));
    double u1_star = sharpe_sq_star(model.mu1, model.sigma1) / (2.0 * model.gamma);
    double u2_star = sharpe_sq_star(model.mu2, model.sigma2) / (2.0 * model.gamma);
    res.true_spread = u1_star - u2_star;
    res.delta_mc = res.true_spread - res.estimated_spread_mean;
    res.delta_se = res.estimated_spread_se;
    return res;
}

struct McSharpeComparison {
    double markowitz_mean_sharpe = 0.0;
    double markowitz_se = 0.0;
    double equal_weight_sharpe = 0.0; // constant across trials
    long trials_used = 0;
    long trials_discarded = 0;
};

// Out-of-sample Sharpe ratio of the plug-in Markowitz rule versus naive
// equal weighting: each trial estimates weights from a simulated history and
// scores them under the true (mu, sigma).
inline McSharpeComparison mc_ew_vs_markowitz(const Vector& mu, const Matrix& sigma, int T,
                                             double gamma, long trials, uint64_t seed,
                                             unsigned threads = 1) {
    long n = mu.size();
    if (T <= n)
        throw DomainError("T must exceed N");
    if (trials < 1)
        throw DomainError("trials must be at least 1");
    auto llt = detail::cholesky_spd(sigma, "sigma");
    Matrix chol = llt.matrixL();

    auto true_sharpe = [&](const Vector& w) {
        double var = w.dot(sigma * w);
        if (var <= 0.0)
            return std::numeric_limits<double>::quiet_NaN();
        return w.dot(mu) / std::sqrt(var);
    };

    std::vector<double> sharpes(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t i) {
        Rng rng = Rng::substream(seed, i);
        Matrix returns = sample_normal_rows(mu, chol, T, rng);
        SampleEstimates est = sample_estimates(returns);
        Eigen::LLT<Matrix> sllt(est.sigma_hat);
        if (sllt.info() != Eigen::Success) {
            sharpes[i] = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        Vector w = sllt.solve(est.mu_hat) / gamma;
        sharpes[i] = true_sharpe(w);
    });

    std::vector<double> kept;
    kept.reserve(sharpes.size());
    for (double x : sharpes)
        if (!std::isnan(x))
            kept.push_back(x);
    if (kept.size() < 2)
        throw DomainError("too few usable Monte-Carlo trials");

    McSharpeComparison res;
    res.trials_used = static_cast<long>(kept.size());
    res.trials_discarded = trials - res.trials_used;
    res.markowitz_mean_sharpe = mean(kept);
    res.markowitz_se = sample_stdev(kept) / std::sqrt(static_cast<double>(kept.size()));
    res.equal_weight_sharpe = true_sharpe(Vector::Ones(n));
    return res;
}

// Plain-text model file: whitespace-separated key/value groups, '#' comments.
// Keys: gamma, T, N, mu1 (N values), sigma1 (N*N values row-major), mu2,
// sigma2.
inline BiasModel load_bias_model(std::istream& in, std::string_view source = "model") {
    std::map<std::string, std::vector<double>> groups;
    std::string current;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream tokens(line);
        std::string tok;
        while (tokens >> tok) {
            if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
                current = tok;
                groups[current]; // key may legitimately appear with no values yet
            } else {
                if (current.empty())
                    throw ValidationError(std::string(source) + ": value '" + tok +
                                          "' before any key");
                try {
                    groups[current].push_back(std::stod(tok));
                } catch (const std::exception&) {
                    throw ValidationError(std::string(source) + ": cannot parse '" + tok +
                                          "' under key '" + current + "'");
                }
            }
        }
    }
    auto scalar = [&](const std::string& key) {
        auto it = groups.find(key);
        if (it == groups.end() || it->second.size() != 1)
            throw ValidationError(std::string(source) + ": key '" + key +
                                  "' must appear with exactly one value");
        return it->second.front();
    };
    BiasModel m;
    m.gamma = scalar("gamma");
    m.T = static_cast<int>(scalar("T"));
    m.N = static_cast<int>(scalar("N"));
    auto vec = [&](const std::string& key, long count) {
        auto it = groups.find(key);
        if (it == groups.end() || static_cast<long>(it->second.size()) != count)
            throw ValidationError(std::string(source) + ": key '" + key + "' must list " +
                                  std::to_string(count) + " values");
        return Eigen::Map<const Vector>(it->second.data(), count).eval();
    };
    m.mu1 = vec("mu1", m.N);
    m.mu2 = vec("mu2", m.N);
    m.sigma1 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(
        vec("sigma1", static_cast<long>(m.N) * m.N).data(), m.N, m.N);
    m.sigma2 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(
        vec("sigma2", static_cast<long>(m.N) * m.N).data(), m.N, m.N);
    m.validate();
    return m;
}

inline BiasModel load_bias_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open '" + path + "'");
    return load_bias_model(in, path);
}

} // namespace labb
