#include "hermnet/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "hermnet/detail/recurrence.hpp"

namespace hermnet {

namespace {

constexpr double kRescaleAbove = 1e150;

void check_degree(int kmax) {
    if (kmax < 0 || kmax > kMaxHermiteDegree) {
        throw std::invalid_argument("hermite degree " + std::to_string(kmax) +
                                    " outside [0, " + std::to_string(kMaxHermiteDegree) + "]");
    }
}

// Tail path: run the recurrence on pi^{-1/4} and carry exp(-x^2/2) as a log
// scale that absorbs every rescaling.
void scaled_row(double x, std::span<double> out) {
    const auto& rec = detail::recurrence();
    double log_scale = -0.5 * x * x;
    double factor = std::exp(log_scale);
    double prev = detail::kPiQuarter;
    out[0] = prev * factor;
    if (out.size() == 1) return;
    double cur = std::numbers::sqrt2 * x * prev;
    out[1] = cur * factor;
    for (std::size_t k = 2; k < out.size(); ++k) {
        const double next = rec.a[k] * x * cur - rec.b[k] * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kRescaleAbove) {
            prev /= kRescaleAbove;
            cur /= kRescaleAbove;
            log_scale += std::log(kRescaleAbove);
            factor = std::exp(log_scale);
        }
        out[k] = cur * factor;
    }
}

}  // namespace

void hermite_row_into(double x, std::span<double> out) {
    if (!std::isfinite(x)) throw std::invalid_argument("hermite_row: non-finite point");
    if (out.empty()) return;
    check_degree(static_cast<int>(out.size()) - 1);
    if (std::abs(x) >= detail::kPlainRecurrenceLimit) {
        scaled_row(x, out);
        return;
    }
    const auto& rec = detail::recurrence();
    out[0] = detail::kPiQuarter * std::exp(-0.5 * x * x);
    if (out.size() == 1) return;
    out[1] = std::numbers::sqrt2 * x * out[0];
    for (std::size_t k = 2; k < out.size(); ++k) {
        out[k] = rec.a[k] * x * out[k - 1] - rec.b[k] * out[k - 2];
    }
}

HermiteRow hermite_row(int kmax, double x) {
    check_degree(kmax);
    HermiteRow row;
    row.kmax = kmax;
    row.point = x;
    row.values.resize(static_cast<std::size_t>(kmax) + 1);
    hermite_row_into(x, row.values);
    return row;
}

double log_abs_psi_at_zero_even(int l) {
    const double half = 0.5 * l;
    return -0.25 * std::log(std::numbers::pi) + 0.5 * std::lgamma(l + 1.0) -
           half * std::numbers::ln2 - std::lgamma(half + 1.0);
}

double psi_at_zero(int l) {
    if (l < 0) throw std::invalid_argument("psi_at_zero: negative degree");
    if (l % 2 != 0) return 0.0;
    const double sign = (l / 2) % 2 == 0 ? 1.0 : -1.0;
    return sign * std::exp(log_abs_psi_at_zero_even(l));
}

QuadratureRule gauss_hermite_rule(int m) {
    if (m < 1 || m > kMaxQuadratureSize) {
        throw std::invalid_argument("gauss_hermite_rule: m=" + std::to_string(m) +
                                    " outside [1, " + std::to_string(kMaxQuadratureSize) + "]");
    }
    QuadratureRule rule;
    rule.m = m;
    rule.nodes.assign(m, 0.0);
    if (m > 1) {
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd off(m - 1);
        for (int k = 1; k < m; ++k) off[k - 1] = std::sqrt(0.5 * k);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("gauss_hermite_rule: eigensolver failed");
        }
        for (int k = 0; k < m; ++k) rule.nodes[k] = solver.eigenvalues()[k];
    }

    // Newton on psi_m, using psi_m' = sqrt(2m) psi_{m-1} - x psi_m.
    std::vector<double> row(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k < m / 2; ++k) {
        double x = rule.nodes[k];
        for (int it = 0; it < 4; ++it) {
            hermite_row_into(x, row);
            const double d = std::sqrt(2.0 * m) * row[m - 1] - x * row[m];
            if (d == 0.0) break;
            x -= row[m] / d;
        }
        rule.nodes[k] = x;
    }
    // Exact symmetry about the origin.
    for (int k = 0; k < m / 2; ++k) rule.nodes[m - 1 - k] = -rule.nodes[k];
    if (m % 2 == 1) rule.nodes[m / 2] = 0.0;

    rule.weights.resize(m);
    rule.lebesgue_weights.resize(m);
    std::vector<double> psi(m);
    for (int k = 0; k < m; ++k) {
        const double x = rule.nodes[k];
        hermite_row_into(x, psi);
        double s = 0.0;
        for (double v : psi) s += v * v;
        rule.lebesgue_weights[k] = 1.0 / s;
        rule.weights[k] = std::exp(-x * x) / s;
    }
    return rule;
}

double quad_integrate(const QuadratureRule& rule, const std::function<double(double)>& f,
                      Measure measure) {
    const auto& w = measure == Measure::Hermite ? rule.weights : rule.lebesgue_weights;
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double v = f(rule.nodes[k]);
        if (!std::isfinite(v)) {
            throw std::domain_error("quad_integrate: integrand is not finite at node " +
                                    std::to_string(rule.nodes[k]));
        }
        sum += w[k] * v;
    }
    return sum;
}

}  // namespace hermnet
