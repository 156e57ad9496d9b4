#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "labb/theory.hpp"

using namespace labb;

namespace {

Matrix random_spd(int n, uint64_t seed, double scale = 0.02) {
    Rng rng(seed);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = scale * rng.normal();
    return a * a.transpose() + 0.2 * scale * scale * Matrix::Identity(n, n);
}

Vector random_vector(int n, uint64_t seed, double scale = 0.02) {
    Rng rng(seed);
    Vector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = scale * rng.normal();
    return v;
}

BiasModel well_separated_model() {
    BiasModel m;
    m.N = 5;
    m.T = 60;
    m.gamma = 2.0;
    m.mu1 = random_vector(5, 101, 0.03);
    m.sigma1 = random_spd(5, 102);
    m.mu2 = 0.4 * m.mu1;
    m.sigma2 = random_spd(5, 103) * 1.5;
    return m;
}

} // namespace

TEST_CASE("utility quadratic form", "[theory]") {
    SECTION("zero weights give zero") {
        Vector mu = random_vector(4, 1);
        Matrix sigma = random_spd(4, 2);
        REQUIRE(utility(Vector::Zero(4), mu, sigma, 3.0) == 0.0);
    }
    SECTION("scalar case") {
        Vector w(1), mu(1);
        Matrix sigma(1, 1);
        w << 1.0;
        mu << 0.1;
        sigma << 0.04;
        REQUIRE(utility(w, mu, sigma, 2.0) == Catch::Approx(0.06).margin(1e-15));
    }
    SECTION("matches a naive summation loop") {
        Rng rng(3);
        for (int rep = 0; rep < 20; ++rep) {
            int n = 2 + static_cast<int>(rng.uniform_int(6));
            Vector mu = random_vector(n, 100 + rep);
            Matrix sigma = random_spd(n, 200 + rep);
            Vector w = random_vector(n, 300 + rep, 1.0);
            double gamma = 0.5 + rng.uniform01();

            double lin = 0.0, quad = 0.0;
            for (int i = 0; i < n; ++i) {
                lin += w(i) * mu(i);
                for (int j = 0; j < n; ++j)
                    quad += w(i) * sigma(i, j) * w(j);
            }
            REQUIRE(utility(w, mu, sigma, gamma) ==
                    Catch::Approx(lin - 0.5 * gamma * quad).epsilon(1e-12).margin(1e-15));
        }
    }
    SECTION("dimension mismatch") {
        REQUIRE_THROWS_AS(utility(Vector::Zero(3), Vector::Zero(4), Matrix::Identity(4, 4), 1.0),
                          DomainError);
    }
}

TEST_CASE("markowitz weights", "[theory]") {
    SECTION("identity covariance returns mu") {
        Vector mu(2);
        mu << 0.1, 0.2;
        Vector w = markowitz_weights(mu, Matrix::Identity(2, 2), 1.0);
        REQUIRE(w(0) == Catch::Approx(0.1).margin(1e-15));
        REQUIRE(w(1) == Catch::Approx(0.2).margin(1e-15));
    }
    SECTION("doubling gamma halves the weights") {
        Vector mu = random_vector(5, 7);
        Matrix sigma = random_spd(5, 8);
        Vector w1 = markowitz_weights(mu, sigma, 1.0);
        Vector w2 = markowitz_weights(mu, sigma, 2.0);
        for (int i = 0; i < 5; ++i)
            REQUIRE(w2(i) == Catch::Approx(0.5 * w1(i)).epsilon(1e-14));
    }
    SECTION("optimum survives random perturbation probing") {
        Vector mu = random_vector(6, 9, 0.05);
        Matrix sigma = random_spd(6, 10);
        double gamma = 1.7;
        Vector w_star = markowitz_weights(mu, sigma, gamma);
        double u_star = utility(w_star, mu, sigma, gamma);
        Rng rng(11);
        for (int rep = 0; rep < 1000; ++rep) {
            Vector eps(6);
            for (int i = 0; i < 6; ++i)
                eps(i) = 0.05 * rng.normal();
            REQUIRE(utility(w_star + eps, mu, sigma, gamma) <= u_star + 1e-12);
        }
    }
    SECTION("indefinite sigma reports the smallest eigenvalue") {
        Matrix bad = Matrix::Identity(3, 3);
        bad(2, 2) = -0.5;
        REQUIRE_THROWS_WITH(markowitz_weights(random_vector(3, 12), bad, 1.0),
                            Catch::Matchers::ContainsSubstring("smallest eigenvalue"));
    }
}

TEST_CASE("squared sharpe ratios", "[theory]") {
    SECTION("identity covariance sums squares") {
        Vector mu(2);
        mu << 0.3, 0.4;
        REQUIRE(sharpe_sq_star(mu, Matrix::Identity(2, 2)) ==
                Catch::Approx(0.25).margin(1e-15));
    }
    SECTION("zero mean gives zero") {
        REQUIRE(sharpe_sq_star(Vector::Zero(3), random_spd(3, 13)) ==
                Catch::Approx(0.0).margin(1e-18));
        REQUIRE(sharpe_sq_ew(Vector::Zero(3), random_spd(3, 13)) == 0.0);
    }
    SECTION("consistency with the optimal utility") {
        for (int rep = 0; rep < 15; ++rep) {
            int n = 2 + rep % 6;
            Vector mu = random_vector(n, 400 + rep, 0.05);
            Matrix sigma = random_spd(n, 500 + rep);
            double gamma = 0.8 + 0.1 * rep;
            Vector w_star = markowitz_weights(mu, sigma, gamma);
            REQUIRE(sharpe_sq_star(mu, sigma) ==
                    Catch::Approx(2.0 * gamma * utility(w_star, mu, sigma, gamma))
                        .epsilon(1e-12));
        }
    }
    SECTION("single asset: EW equals the optimum") {
        Vector mu(1);
        Matrix sigma(1, 1);
        mu << 0.07;
        sigma << 0.09;
        REQUIRE(sharpe_sq_ew(mu, sigma) ==
                Catch::Approx(sharpe_sq_star(mu, sigma)).epsilon(1e-14));
        REQUIRE(sharpe_sq_ew(mu, sigma) == Catch::Approx(0.07 * 0.07 / 0.09).epsilon(1e-14));
    }
    SECTION("equal weighting never beats the optimum") {
        for (int rep = 0; rep < 25; ++rep) {
            int n = 2 + rep % 8;
            Vector mu = random_vector(n, 600 + rep, 0.05);
            Matrix sigma = random_spd(n, 700 + rep);
            REQUIRE(sharpe_sq_ew(mu, sigma) <= sharpe_sq_star(mu, sigma) + 1e-12);
        }
    }
}

TEST_CASE("sample estimates use the 1/T convention", "[theory]") {
    SECTION("hand computation, T=3, N=1") {
        Matrix r(3, 1);
        r << 0.0, 0.1, 0.2;
        auto est = sample_estimates(r);
        REQUIRE(est.mu_hat(0) == Catch::Approx(0.1).epsilon(1e-14));
        REQUIRE(est.sigma_hat(0, 0) == Catch::Approx(0.02 / 3.0).epsilon(1e-14));
    }
    SECTION("identical rows are singular") {
        Matrix r(4, 2);
        r << 1, 2, 1, 2, 1, 2, 1, 2;
        REQUIRE_THROWS_AS(sample_markowitz_weights(r, 1.0), DomainError);
    }
    SECTION("matches a two-pass loop oracle") {
        Rng rng(14);
        Matrix r(40, 3);
        for (int t = 0; t < 40; ++t)
            for (int j = 0; j < 3; ++j)
                r(t, j) = 0.01 * rng.normal();
        auto est = sample_estimates(r);
        for (int j = 0; j < 3; ++j) {
            double m = 0.0;
            for (int t = 0; t < 40; ++t)
                m += r(t, j);
            m /= 40.0;
            REQUIRE(est.mu_hat(j) == Catch::Approx(m).margin(1e-15));
            for (int k = 0; k < 3; ++k) {
                double c = 0.0;
                double mk = 0.0;
                for (int t = 0; t < 40; ++t)
                    mk += r(t, k);
                mk /= 40.0;
                for (int t = 0; t < 40; ++t)
                    c += (r(t, j) - m) * (r(t, k) - mk);
                c /= 40.0;
                REQUIRE(est.sigma_hat(j, k) == Catch::Approx(c).epsilon(1e-12).margin(1e-16));
            }
        }
    }
}

TEST_CASE("k factor", "[theory]") {
    SECTION("T=120, N=10 equals the direct evaluation") {
        double direct = (120.0 / 108.0) * (2.0 - (120.0 * 118.0) / (109.0 * 106.0));
        REQUIRE(k_factor(120, 10) == Catch::Approx(direct).margin(1e-12));
        REQUIRE(k_factor(120, 10) == Catch::Approx(0.8605).margin(5e-4));
    }
    SECTION("approaches 1 for large T") {
        REQUIRE(std::fabs(k_factor(10000, 10) - 1.0) < 0.01);
    }
    SECTION("domain boundary") {
        REQUIRE_THROWS_WITH(k_factor(14, 10),
                            Catch::Matchers::ContainsSubstring("T must exceed N+4"));
        REQUIRE_NOTHROW(k_factor(15, 10));
    }
    SECTION("stays below 1 on a grid") {
        for (int n = 1; n <= 50; ++n)
            for (int t = n + 5; t <= 2000; t += (t < n + 50 ? 1 : 37))
                REQUIRE(k_factor(t, n) < 1.0);
    }
}

TEST_CASE("delta bias", "[theory]") {
    SECTION("symmetric models give zero") {
        BiasModel m;
        m.N = 4;
        m.T = 40;
        m.gamma = 1.5;
        m.mu1 = m.mu2 = random_vector(4, 20, 0.05);
        m.sigma1 = m.sigma2 = random_spd(4, 21);
        REQUIRE(delta_bias(m) == 0.0);
    }
    SECTION("composition of the k and sharpe examples") {
        BiasModel m;
        m.N = 10;
        m.T = 120;
        m.gamma = 1.0;
        m.mu1 = Vector::Zero(10);
        m.mu1(0) = 0.5; // S*^2 = 0.25
        m.mu2 = Vector::Zero(10);
        m.mu2(0) = 0.3; // S*^2 = 0.09
        m.sigma1 = Matrix::Identity(10, 10);
        m.sigma2 = Matrix::Identity(10, 10);
        double k = k_factor(120, 10);
        REQUIRE(delta_bias(m) == Catch::Approx((1.0 - k) / 2.0 * 0.16).epsilon(1e-12));
        REQUIRE(delta_bias(m) > 0.0);
    }
    SECTION("antisymmetric under swapping the datasets") {
        BiasModel m = well_separated_model();
        BiasModel swapped = m;
        std::swap(swapped.mu1, swapped.mu2);
        std::swap(swapped.sigma1, swapped.sigma2);
        REQUIRE(delta_bias(swapped) == Catch::Approx(-delta_bias(m)).epsilon(1e-14));
    }
    SECTION("positive whenever dataset 1 has the larger optimum") {
        Rng rng(22);
        for (int rep = 0; rep < 20; ++rep) {
            BiasModel m;
            m.N = 3;
            m.T = 30 + static_cast<int>(rng.uniform_int(100));
            m.gamma = 0.5 + rng.uniform01();
            m.mu1 = random_vector(3, 800 + rep, 0.05);
            m.sigma1 = random_spd(3, 900 + rep);
            m.mu2 = 0.5 * m.mu1;
            m.sigma2 = m.sigma1;
            double s1 = sharpe_sq_star(m.mu1, m.sigma1);
            double s2 = sharpe_sq_star(m.mu2, m.sigma2);
            REQUIRE(s1 > s2);
            REQUIRE(delta_bias(m) > 0.0);
        }
    }
    SECTION("model validation messages") {
        BiasModel m = well_separated_model();
        m.T = m.N + 3;
        REQUIRE_THROWS_WITH(delta_bias(m),
                            Catch::Matchers::ContainsSubstring("T must exceed N+4"));
    }
}

TEST_CASE("wishart sampling", "[theory]") {
    SECTION("scalar case reduces to chi-square") {
        Matrix sigma(1, 1);
        sigma << 1.0;
        Rng rng(30);
        const int dof = 8;
        const int draws = 100000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < draws; ++i) {
            double x = sample_wishart(sigma, dof, rng)(0, 0);
            sum += x;
            sum_sq += x * x;
        }
        double m = sum / draws;
        double var = sum_sq / draws - m * m;
        REQUIRE(m == Catch::Approx(dof).epsilon(0.01));
        REQUIRE(var == Catch::Approx(2.0 * dof).epsilon(0.02));
    }
    SECTION("mean matches dof * sigma") {
        Matrix sigma(3, 3);
        sigma << 4.0, 1.0, 0.5,
                 1.0, 3.0, 0.8,
                 0.5, 0.8, 2.0;
        Rng rng(31);
        const int dof = 20;
        const int draws = 40000;
        Matrix acc = Matrix::Zero(3, 3);
        for (int i = 0; i < draws; ++i)
            acc += sample_wishart(sigma, dof, rng);
        acc /= draws;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                REQUIRE(acc(i, j) == Catch::Approx(dof * sigma(i, j)).epsilon(0.03));
    }
    SECTION("draws are symmetric positive semidefinite") {
        Matrix sigma = random_spd(4, 32, 1.0);
        Rng rng(33);
        for (int i = 0; i < 50; ++i) {
            Matrix w = sample_wishart(sigma, 6, rng);
            REQUIRE(w.isApprox(w.transpose(), 1e-12));
            Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
            REQUIRE(es.eigenvalues().minCoeff() > -1e-10);
        }
    }
    SECTION("dof below N rejected, seed overload reproducible") {
        Matrix sigma = Matrix::Identity(3, 3);
        REQUIRE_THROWS_AS(sample_wishart(sigma, 2, uint64_t{1}), DomainError);
        REQUIRE(sample_wishart(sigma, 5, uint64_t{7}) == sample_wishart(sigma, 5, uint64_t{7}));
    }
}

TEST_CASE("monte-carlo estimated bias", "[theory]") {
    SECTION("symmetric model is statistically zero") {
        BiasModel m;
        m.N = 3;
        m.T = 30;
        m.gamma = 1.0;
        m.mu1 = m.mu2 = random_vector(3, 40, 0.03);
        m.sigma1 = m.sigma2 = random_spd(3, 41);
        auto res = mc_estimated_bias(m, 4000, 7);
        REQUIRE(std::fabs(res.delta_mc) <= 3.0 * res.delta_se);
        REQUIRE(res.true_spread == 0.0);
    }
    SECTION("closed form within 3 standard errors") {
        BiasModel m = well_separated_model();
        auto res = mc_estimated_bias(m, 20000, 11);
        double predicted = delta_bias(m);
        INFO("delta_mc=" << res.delta_mc << " predicted=" << predicted
                         << " se=" << res.delta_se);
        REQUIRE(std::fabs(res.delta_mc - predicted) <= 3.0 * res.delta_se);
    }
    SECTION("standard error shrinks like sqrt(trials)") {
        BiasModel m = well_separated_model();
        auto small = mc_estimated_bias(m, 200, 13);
        auto large = mc_estimated_bias(m, 20000, 13);
        double ratio = small.delta_se / large.delta_se;
        REQUIRE(ratio > 5.0);
        REQUIRE(ratio < 20.0);
    }
    SECTION("deterministic across thread counts") {
        BiasModel m = well_separated_model();
        auto serial = mc_estimated_bias(m, 500, 17, 1);
        auto parallel = mc_estimated_bias(m, 500, 17, 3);
        REQUIRE(serial.estimated_spread_mean == parallel.estimated_spread_mean);
        REQUIRE(serial.estimated_spread_se == parallel.estimated_spread_se);
        REQUIRE(serial.delta_mc == parallel.delta_mc);
    }
}

TEST_CASE("naive diversification versus the plug-in rule", "[theory]") {
    SECTION("equal-weight true sharpe is a constant of the model") {
        Vector mu = Vector::Constant(20, 0.01);
        Matrix sigma = 0.04 * Matrix::Identity(20, 20);
        auto res = mc_ew_vs_markowitz(mu, sigma, 60, 1.0, 50, 3);
        Vector ones = Vector::Ones(20);
        REQUIRE(res.equal_weight_sharpe ==
                Catch::Approx(ones.dot(mu) / std::sqrt(ones.dot(sigma * ones)))
                    .epsilon(1e-14));
    }
    SECTION("identical uncorrelated assets favor equal weighting") {
        Vector mu = Vector::Constant(20, 0.01);
        Matrix sigma = 0.04 * Matrix::Identity(20, 20);
        auto res = mc_ew_vs_markowitz(mu, sigma, 60, 1.0, 1500, 5);
        REQUIRE(res.equal_weight_sharpe >
                res.markowitz_mean_sharpe + 3.0 * res.markowitz_se);
    }
    SECTION("long histories recover the optimal sharpe") {
        Vector mu = random_vector(5, 50, 0.03);
        Matrix sigma = random_spd(5, 51);
        double s_star = std::sqrt(sharpe_sq_star(mu, sigma));
        auto res = mc_ew_vs_markowitz(mu, sigma, 100000, 1.0, 30, 7);
        REQUIRE(res.markowitz_mean_sharpe == Catch::Approx(s_star).epsilon(0.01));
    }
}

TEST_CASE("bias model file parsing", "[theory]") {
    SECTION("round trip") {
        std::istringstream in(R"(# demo model
gamma 1.5
T 60
N 2
mu1 0.02 0.03
sigma1
  0.010 0.002
  0.002 0.020
mu2 0.01 0.01
sigma2 0.02 0.0 0.0 0.03
)");
        BiasModel m = load_bias_model(in);
        REQUIRE(m.gamma == 1.5);
        REQUIRE(m.T == 60);
        REQUIRE(m.N == 2);
        REQUIRE(m.mu1(1) == 0.03);
        REQUIRE(m.sigma1(0, 1) == 0.002);
        REQUIRE(m.sigma2(1, 1) == 0.03);
    }
    SECTION("missing key") {
        std::istringstream in("gamma 1\nT 60\nN 2\nmu1 0.1 0.2\n");
        REQUIRE_THROWS_AS(load_bias_model(in), ValidationError);
    }
    SECTION("wrong element count") {
        std::istringstream in("gamma 1\nT 60\nN 2\nmu1 0.1\nmu2 0.1 0.2\n"
                              "sigma1 1 0 0 1\nsigma2 1 0 0 1\n");
        REQUIRE_THROWS_WITH(load_bias_model(in),
                            Catch::Matchers::ContainsSubstring("mu1"));
    }
    SECTION("asymmetric sigma rejected") {
        std::istringstream in("gamma 1\nT 60\nN 2\nmu1 0.1 0.1\nmu2 0.1 0.1\n"
                              "sigma1 1 0.5 0.1 1\nsigma2 1 0 0 1\n");
        REQUIRE_THROWS_WITH(load_bias_model(in),
                            Catch::Matchers::ContainsSubstring("symmetric"));
    }
}
