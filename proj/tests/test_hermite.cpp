#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "hermnet/hermite.hpp"
#include "oracles.hpp"

using namespace hermnet;

TEST_CASE("hermite_row small cases") {
    const double pq = std::pow(std::numbers::pi, -0.25);
    CHECK(hermite_row(0, 0.0).values[0] == doctest::Approx(0.7511255444649425).epsilon(1e-15));
    auto r1 = hermite_row(1, 0.0);
    CHECK(r1.values[0] == doctest::Approx(pq));
    CHECK(r1.values[1] == 0.0);
    CHECK(hermite_row(2, 0.0).values[2] == doctest::Approx(-pq * std::sqrt(2.0) / 2.0).epsilon(1e-14));
    CHECK(hermite_row(2, 0.0).values[2] == doctest::Approx(-0.5311259).epsilon(1e-6));
}

TEST_CASE("hermite_row matches the textbook polynomials") {
    for (double x : {-3.0, -0.7, 0.0, 0.4, 1.9, 4.2}) {
        const auto row = hermite_row(20, x);
        CHECK(row.values[0] == doctest::Approx(std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x)));
        for (int k = 0; k <= 20; ++k) {
            CHECK(row.values[k] == doctest::Approx(oracle::psi_textbook(k, x)).epsilon(1e-11).scale(1.0));
        }
    }
}

TEST_CASE("hermite_row rejects bad input") {
    CHECK_THROWS_AS(hermite_row(3, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(hermite_row(3, INFINITY), std::invalid_argument);
    CHECK_THROWS_AS(hermite_row(-1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(hermite_row(kMaxHermiteDegree + 1, 0.0), std::invalid_argument);
}

TEST_CASE("far tail stays finite and continuous across the switch") {
    const auto below = hermite_row(4000, 35.999999);
    const auto above = hermite_row(4000, 36.0);
    for (int k = 0; k <= 4000; k += 250) {
        CHECK(std::isfinite(above.values[k]));
        CHECK(std::abs(above.values[k] - below.values[k]) < 1e-3);
    }
    const auto far = hermite_row(100, 80.0);
    for (double v : far.values) CHECK(v == 0.0);
}

TEST_CASE("psi_at_zero") {
    CHECK(psi_at_zero(1) == 0.0);
    CHECK(psi_at_zero(0) == doctest::Approx(std::pow(std::numbers::pi, -0.25)));
    const auto row = hermite_row(120, 0.0);
    for (int l = 0; l <= 120; l += 2) {
        CHECK(psi_at_zero(l) == doctest::Approx(row.values[l]).epsilon(1e-9));
    }
    CHECK(psi_at_zero(60) == doctest::Approx(hermite_row(60, 0.0).values[60]).epsilon(1e-10));
    CHECK(std::isfinite(psi_at_zero(4096)));
}

TEST_CASE("uniform bound on a grid") {
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double x = -20.0 + 40.0 * i / 4000;
        for (double v : hermite_row(200, x).values) worst = std::max(worst, std::abs(v));
    }
    CHECK(worst <= 1.1);
}

TEST_CASE("gauss_hermite_rule basics") {
    const auto r1 = gauss_hermite_rule(1);
    REQUIRE(r1.size() == 1);
    CHECK(r1.nodes[0] == 0.0);
    CHECK(r1.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi)));

    const auto r2 = gauss_hermite_rule(2);
    const double x2 = quad_integrate(r2, [](double x) { return x * x; });
    CHECK(x2 == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-14));
    // Degree 4 is beyond a two-point rule.
    const double x4 = quad_integrate(r2, [](double x) { return x * x * x * x; });
    CHECK(std::abs(x4 - 3.0 * std::sqrt(std::numbers::pi) / 4.0) > 1e-3);

    CHECK_THROWS_AS(gauss_hermite_rule(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_hermite_rule(kMaxQuadratureSize + 1), std::invalid_argument);
}

TEST_CASE("rule structure") {
    for (int m : {1, 2, 3, 7, 20, 64, 129, 256}) {
        const auto r = gauss_hermite_rule(m);
        double sum = 0.0;
        for (int k = 0; k < m; ++k) {
            if (k > 0) CHECK(r.nodes[k] > r.nodes[k - 1]);
            CHECK(r.nodes[k] == -r.nodes[m - 1 - k]);
            CHECK(r.weights[k] > 0.0);
            CHECK(r.weights[k] == doctest::Approx(r.weights[m - 1 - k]).epsilon(1e-13));
            sum += r.weights[k];
        }
        CHECK(sum == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    }
}

TEST_CASE("Christoffel formula") {
    const int m = 12;
    const auto r = gauss_hermite_rule(m);
    for (int k = 0; k < m; ++k) {
        // h_j = psi_j exp(x^2/2), textbook polynomials
        double s = 0.0;
        for (int j = 0; j < m; ++j) {
            const double h = oracle::psi_textbook(j, r.nodes[k]) * std::exp(0.5 * r.nodes[k] * r.nodes[k]);
            s += h * h;
        }
        CHECK(r.weights[k] == doctest::Approx(1.0 / s).epsilon(1e-10));
    }
}

TEST_CASE("weighted sum growth is like sqrt(m)") {
    double worst = 0.0;
    for (int m : {4, 16, 64, 256}) {
        const auto r = gauss_hermite_rule(m);
        double s = 0.0;
        for (double w : r.lebesgue_weights) s += w;
        worst = std::max(worst, s / std::sqrt(m));
    }
    CHECK(worst < 5.0);
}

TEST_CASE("exactness against analytic moments") {
    auto rng = oracle::engine();
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int m : {5, 10, 20}) {
        const auto r = gauss_hermite_rule(m);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> c(2 * m);
            for (auto& v : c) v = coef(rng);
            double exact = 0.0, magnitude = 0.0;
            for (int j = 0; 2 * j < 2 * m; ++j) {
                exact += c[2 * j] * oracle::even_moment(j);
                magnitude += std::abs(c[2 * j]) * oracle::even_moment(j);
            }
            const double got = quad_integrate(r, [&](double x) {
                double p = 0.0;
                for (int i = 2 * m - 1; i >= 0; --i) p = p * x + c[i];
                return p;
            });
            CHECK(std::abs(got - exact) <= 1e-9 * magnitude);
        }
    }
}

TEST_CASE("degree 38 even polynomial with m = 20") {
    const auto r = gauss_hermite_rule(20);
    auto rng = oracle::engine(7);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> c(20);
    for (auto& v : c) v = coef(rng);
    double exact = 0.0, magnitude = 0.0;
    for (int j = 0; j < 20; ++j) {
        exact += c[j] * oracle::even_moment(j);
        magnitude += std::abs(c[j]) * oracle::even_moment(j);
    }
    const double got = quad_integrate(r, [&](double x) {
        double p = 0.0;
        for (int j = 19; j >= 0; --j) p = p * x * x + c[j];
        return p;
    });
    CHECK(std::abs(got - exact) <= 1e-9 * magnitude);
}

TEST_CASE("Gram matrix on the Lebesgue measure") {
    const auto r = gauss_hermite_rule(64);
    CHECK(quad_integrate(gauss_hermite_rule(40), [](double x) {
              const auto v = hermite_row(5, x).values;
              return v[3] * v[3];
          }, Measure::Lebesgue) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(quad_integrate(gauss_hermite_rule(40), [](double x) {
              const auto v = hermite_row(5, x).values;
              return v[3] * v[5];
          }, Measure::Lebesgue)) < 1e-10);
    double worst = 0.0;
    for (int j = 0; j < 30; ++j) {
        for (int k = 0; k < 30; ++k) {
            const double g = quad_integrate(r, [&](double x) {
                const auto v = hermite_row(29, x).values;
                return v[j] * v[k];
            }, Measure::Lebesgue);
            worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("quad_integrate propagates non-finite integrands") {
    const auto r = gauss_hermite_rule(3);
    CHECK_THROWS_AS(quad_integrate(r, [](double x) { return 1.0 / x; }), std::domain_error);
}
