#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "hermnet/gaussian_net.hpp"
#include "hermnet/hermite.hpp"
#include "hermnet/kernels.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace hermnet;
using fixture::BasisBudget;
using fixture::psi_k;

namespace {

double norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// sup over [-4, 4] of |psi_0 - G_{(0),m,1}|
double basis_error_1d(int k, int m) {
    const auto net = gaussian_basis_network({k}, m);
    double worst = 0.0;
    for (int i = 0; i <= 800; ++i) {
        const std::vector<double> x{-4.0 + 0.01 * i};
        worst = std::max(worst, std::abs(net(x) - oracle::psi_textbook(k, x[0])));
    }
    return worst;
}

std::vector<std::vector<double>> ball_points(int count, int Q, double radius, unsigned long long seed) {
    auto eng = oracle::engine(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < count; ++i) {
        std::vector<double> x(Q);
        for (auto& v : x) v = g(eng);
        const double r = radius * std::pow(u(eng), 1.0 / Q) / norm(x);
        for (auto& v : x) v *= r;
        pts.push_back(x);
    }
    return pts;
}

}  // namespace

TEST_CASE("basis network error decays like 3^{-m^2/2}") {
    const double e2 = basis_error_1d(0, 2), e3 = basis_error_1d(0, 3), e4 = basis_error_1d(0, 4);
    MESSAGE("errors " << e2 << " " << e3 << " " << e4);
    CHECK(e3 < 0.05 * e2);
    CHECK(e2 / e3 >= 20.0);
    CHECK(e3 / e4 >= 20.0);
    // Slack-adjusted ratio law: E(m+1)/E(m) <= 3^{-(2m+1)/2} m^2.
    CHECK(e3 / e2 <= std::pow(3.0, -2.5) * 4.0);
    CHECK(e4 / e3 <= std::pow(3.0, -3.5) * 9.0);
}

TEST_CASE("basis network structure") {
    const auto net = gaussian_basis_network({0}, 3);
    CHECK(net.size() == 18u);
    CHECK(net.scale == 1.0);
    const auto rule = gauss_hermite_rule(18);
    for (std::size_t j = 0; j < net.size(); ++j) {
        CHECK(net.centers[j][0] == doctest::Approx(std::sqrt(3.0) / 2.0 * rule.nodes[j]).epsilon(1e-15));
    }
    const auto net2 = gaussian_basis_network({1, 2}, 2);
    CHECK(net2.size() == 64u);
    CHECK(net2.dim == 2);
}

TEST_CASE("basis network parity") {
    for (const MultiIndex& k : {MultiIndex{0}, MultiIndex{3}, MultiIndex{1, 2}, MultiIndex{2, 2}}) {
        const auto net = gaussian_basis_network(k, 3);
        const int sign = (k.size() == 1 ? k[0] : k[0] + k[1]) % 2 == 0 ? 1 : -1;
        auto eng = oracle::engine(7);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> x(k.size()), mx(k.size());
            for (std::size_t i = 0; i < x.size(); ++i) mx[i] = -(x[i] = u(eng));
            CHECK(std::abs(net(mx) - sign * net(x)) <= 1e-10);
        }
    }
}

TEST_CASE("odd basis network vanishes at the origin") {
    const auto net = gaussian_basis_network({1}, 3);
    const double budget = basis_error_1d(1, 3);
    CHECK(std::abs(net(std::vector<double>{0.0})) <= budget);
    CHECK(std::abs(net(std::vector<double>{0.0})) <= 1e-12);
}

TEST_CASE("grid sharing") {
    for (int d = 1; d <= 2; ++d) {
        const auto a = gaussian_basis_network(MultiIndex(d, 0), 2);
        MultiIndex k(d, 1);
        const auto b = gaussian_basis_network(k, 2);
        CHECK(a.centers == b.centers);
        CHECK(a.centers == synthesis_grid(2, d).centers);
    }
}

TEST_CASE("poly_to_gaussian") {
    SUBCASE("single psi_0 is the basis network") {
        WeightedPolyCoeffs p;
        p.entries[{0}] = 1.0;
        const auto a = poly_to_gaussian(p, 3);
        const auto b = gaussian_basis_network({0}, 3);
        CHECK(a.centers == b.centers);
        CHECK(a.coeffs == b.coeffs);
    }
    SUBCASE("2 psi_0 + 3 psi_2 within the triangle budget") {
        WeightedPolyCoeffs p;
        p.entries[{0}] = 2.0;
        p.entries[{2}] = 3.0;
        const auto net = poly_to_gaussian(p, 3);
        const double budget = 2.0 * basis_error_1d(0, 3) + 3.0 * basis_error_1d(2, 3);
        double worst = 0.0;
        for (int i = 0; i <= 800; ++i) {
            const double x = -4.0 + 0.01 * i;
            const double exact = 2.0 * oracle::psi_textbook(0, x) + 3.0 * oracle::psi_textbook(2, x);
            worst = std::max(worst, std::abs(net(std::vector<double>{x}) - exact));
        }
        CHECK(worst <= budget * (1 + 1e-9));
    }
    SUBCASE("zero polynomial") {
        WeightedPolyCoeffs p;
        p.d = 2;
        const auto net = poly_to_gaussian(p, 2);
        for (double c : net.coeffs) CHECK(c == 0.0);
        CHECK(net(std::vector<double>{0.3, -1.0}) == 0.0);
    }
    SUBCASE("linearity") {
        WeightedPolyCoeffs p, q, r;
        p.d = q.d = r.d = 2;
        p.entries[{0, 0}] = 1.5;
        p.entries[{2, 1}] = -0.25;
        q.entries[{1, 1}] = 2.0;
        q.entries[{0, 0}] = 0.5;
        const double a = 0.7, b = -1.3;
        for (const auto& [k, v] : p.entries) r.entries[k] += a * v;
        for (const auto& [k, v] : q.entries) r.entries[k] += b * v;
        const auto np = poly_to_gaussian(p, 2), nq = poly_to_gaussian(q, 2), nr = poly_to_gaussian(r, 2);
        double scale = 0.0;
        for (double c : nr.coeffs) scale = std::max(scale, std::abs(c));
        for (std::size_t j = 0; j < nr.size(); ++j) {
            CHECK(std::abs(nr.coeffs[j] - (a * np.coeffs[j] + b * nq.coeffs[j])) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("guards") {
    CHECK_THROWS_AS((void)gaussian_basis_network({9}, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)gaussian_basis_network({0, 0, 0, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)gaussian_basis_network({0}, 12), std::invalid_argument);
    CHECK_THROWS_AS((void)gaussian_basis_network({0, 0, 0}, 9), std::invalid_argument);
    CHECK_THROWS_AS((void)gaussian_basis_network({-1}, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)prefab_kernel_network(9.0, 1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)prefab_kernel_network(4.0, 2, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)prefab_kernel_network(4.0, 1, 4, 1.0), std::invalid_argument);
    GaussianNetwork bad;
    bad.centers = {{0.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("json round trip is bit exact") {
    const auto net = prefab_kernel_network(3.0, 1, 2, 0.8);
    const auto back = network_from_json(network_to_json(net));
    CHECK(back.dim == net.dim);
    CHECK(back.scale == net.scale);
    CHECK(back.centers == net.centers);
    CHECK(back.coeffs == net.coeffs);

    const auto path = std::filesystem::temp_directory_path() / "hermnet_net_roundtrip.json";
    save_network(net, path.string());
    const auto loaded = load_network(path.string());
    CHECK(loaded.coeffs == net.coeffs);
    std::filesystem::remove(path);

    CHECK_THROWS_AS((void)network_from_json("{\"dim\": 1}"), std::invalid_argument);
    CHECK_THROWS_AS((void)network_from_json("not json"), std::invalid_argument);
}

TEST_CASE("prefab coefficients collapse when q = Q") {
    for (int Q = 1; Q <= 3; ++Q) {
        const double n = 3.0;
        const auto p = prefab_kernel_coeffs(n, Q, Q, 1.0);
        CHECK(!p.entries.empty());
        for (const auto& [k, b] : p.entries) {
            int s = 0;
            double psi0 = 1.0;
            for (int v : k) {
                CHECK(v % 2 == 0);
                s += v;
                psi0 *= oracle::psi_textbook(v, 0.0);
            }
            CHECK(b == doctest::Approx(filter_h(std::sqrt(static_cast<double>(s)) / n) * psi0).epsilon(1e-12));
        }
    }
}

TEST_CASE("prefab weighted polynomial equals the compiled kernel") {
    for (auto [n, q, Q] : {std::tuple{4.0, 1, 2}, std::tuple{6.0, 2, 2}, std::tuple{4.0, 2, 3}, std::tuple{3.0, 1, 3}}) {
        const auto p = prefab_kernel_coeffs(n, q, Q, 1.0);
        const auto table = compile_kernel(n, q);
        for (const auto& x : ball_points(20, Q, 3.0, 11)) {
            CHECK(eval_weighted_poly(p, x) == doctest::Approx(eval_kernel(table, norm(x))).epsilon(1e-9));
        }
    }
}

TEST_CASE("prefab network agrees with the kernel within the synthesis budget") {
    for (auto [n, q, Q] : {std::tuple{4.0, 1, 2}, std::tuple{6.0, 2, 2}, std::tuple{4.0, 2, 3}}) {
        const int m = static_cast<int>(std::ceil(n));
        const auto p = prefab_kernel_coeffs(n, q, Q, 1.0);
        const auto net = prefab_kernel_network(n, q, Q, 1.0);
        const auto table = compile_kernel(n, q);
        const BasisBudget budget_at(p, m);

        auto pts = ball_points(100, Q, 3.0, 5);
        pts.push_back(std::vector<double>(Q, 0.0));
        double worst_gap = 0.0, worst_ratio = 0.0;
        for (const auto& x : pts) {
            const double budget = budget_at(x);
            const double gap = std::abs(net(x) - eval_kernel(table, norm(x)));
            worst_gap = std::max(worst_gap, gap);
            if (budget > 0) worst_ratio = std::max(worst_ratio, gap / budget);
            CHECK(gap <= budget + 1e-9 * std::abs(eval_kernel(table, 0.0)));
        }
        MESSAGE("(" << n << ',' << q << ',' << Q << ") worst gap " << worst_gap << ", gap/budget " << worst_ratio);
    }
}

TEST_CASE("prefab scale for alpha < 1") {
    const double n = 4.0, alpha = 0.5;
    const auto net = prefab_kernel_network(n, 1, 2, alpha);
    const auto ref = prefab_kernel_network(n, 1, 2, 1.0);
    CHECK(net.scale == doctest::Approx(std::pow(n, 1.0 - alpha)));
    // The n^{q(1-alpha)} normalization sits in the coefficients.
    for (std::size_t j = 0; j < net.size(); ++j) {
        CHECK(net.coeffs[j] == doctest::Approx(std::pow(n, 1.0 - alpha) * ref.coeffs[j]).epsilon(1e-12));
    }
    const std::vector<double> x{0.2, -0.1};
    CHECK(net(x) == doctest::Approx(std::pow(n, 1.0 - alpha) * ref(std::vector<double>{0.4, -0.2})).epsilon(1e-12));
}

TEST_CASE("shallow network estimator") {
    const double n = 6.0;
    const auto net = prefab_kernel_network(n, 1, 3, 1.0);
    SUBCASE("trivial cases") {
        Dataset ds;
        ds.ambient_dim = 3;
        ds.manifold_dim = 1;
        ds.samples.push_back({{0.1, 0.2, 0.3}, 0.0});
        ds.samples.push_back({{0.4, 0.0, -0.3}, 0.0});
        CHECK(shallow_net_estimate(ds, net, std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
        ds.samples.resize(1);
        ds.samples[0].value = 1.0;
        const std::vector<double> x{0.3, 0.1, 0.2};
        const std::vector<double> diff{x[0] - 0.1, x[1] - 0.2, x[2] - 0.3};
        CHECK(shallow_net_estimate(ds, net, x) == net(diff));
        CHECK_THROWS_AS((void)shallow_net_estimate(ds, net, std::vector<double>{0.0, 0.0}), std::invalid_argument);
    }
    SUBCASE("matches the kernel estimator on a small arc") {
        // Arc of the helix over t in [0, 1].
        auto eng = oracle::engine(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Dataset ds;
        ds.ambient_dim = 3;
        ds.manifold_dim = 1;
        for (int j = 0; j < 64; ++j) {
            const double t = u(eng);
            const double pt = std::numbers::pi * t;
            ds.samples.push_back({{std::cos(pt), std::sin(pt), pt}, std::cos(std::cos(pt) - std::sin(pt) - pt / 2)});
        }
        const auto cfg = make_estimator_config(n, 1.0, 1);

        // Per-sample budget: sum_k |b_k| |psi_k - G_k| at x - y_j, averaged.
        const auto p = prefab_kernel_coeffs(n, 1, 3, 1.0);
        const BasisBudget budget_at(p, 6);

        double worst = 0.0;
        for (int i = 0; i <= 4; ++i) {
            const double pt = std::numbers::pi * (0.25 * i);
            const std::vector<double> x{std::cos(pt), std::sin(pt), pt};
            double budget = 0.0;
            for (const auto& s : ds.samples) {
                std::vector<double> diff(3);
                for (int c = 0; c < 3; ++c) diff[c] = x[c] - s.point[c];
                budget += std::abs(s.value) * budget_at(diff);
            }
            budget /= static_cast<double>(ds.size());
            const double gap = std::abs(shallow_net_estimate(ds, net, x) - estimate_at(ds, cfg, x));
            worst = std::max(worst, gap);
            CHECK(gap <= budget + 1e-9);
        }
        MESSAGE("worst shallow/kernel gap " << worst);
    }
}
