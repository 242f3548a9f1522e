#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hermnet {

/// Largest Hermite degree any routine will evaluate.
inline constexpr int kMaxHermiteDegree = 5000;
/// Largest Gauss-Hermite rule we build.
inline constexpr int kMaxQuadratureSize = 256;

/// psi_0(x) ... psi_kmax(x) at one point, psi_k(x) = h_k(x) exp(-x^2/2) with
/// h_k the orthonormal Hermite polynomial.
struct HermiteRow {
    int kmax = 0;
    double point = 0.0;
    std::vector<double> values;
};

/// Evaluates the orthonormal Hermite functions by the three-term recurrence,
/// applied to psi_k directly so nothing overflows at high degree. Far out in
/// the tails the recurrence runs on a rescaled copy with the exponent tracked
/// separately. Throws std::invalid_argument for non-finite x or kmax outside
/// [0, kMaxHermiteDegree].
HermiteRow hermite_row(int kmax, double x);

/// Same as hermite_row, writing psi_0..psi_{out.size()-1} into `out`.
void hermite_row_into(double x, std::span<double> out);

/// Closed form of psi_l(0): zero for odd l, otherwise
/// pi^{-1/4} (-1)^{l/2} sqrt(l!) / (2^{l/2} (l/2)!), evaluated in log space.
double psi_at_zero(int l);

/// log|psi_l(0)| for even l.
double log_abs_psi_at_zero_even(int l);

/// Gauss-Hermite rule for the weight exp(-x^2).
///
/// `lebesgue_weights[k]` holds lambda_k exp(x_k^2) = 1 / sum_{j<m} psi_j(x_k)^2,
/// which is what integration against plain Lebesgue measure needs; forming it
/// from the tiny lambda_k by multiplication would lose all precision at the
/// outer nodes.
struct QuadratureRule {
    int m = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> lebesgue_weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// Builds the m-point rule (1 <= m <= kMaxQuadratureSize). Nodes come from
/// the symmetric tridiagonal Jacobi matrix, are polished by Newton steps on
/// psi_m, and the weights are the Christoffel numbers
/// lambda_k = 1 / sum_{j<m} h_j(x_k)^2.
QuadratureRule gauss_hermite_rule(int m);

enum class Measure {
    Hermite,  ///< integrate against exp(-x^2) dx
    Lebesgue  ///< integrate against dx
};

/// sum_k w_k f(x_k) with the weights chosen by `measure`. Throws
/// std::domain_error if f returns a non-finite value.
double quad_integrate(const QuadratureRule& rule, const std::function<double(double)>& f,
                      Measure measure = Measure::Hermite);

}  // namespace hermnet
