#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "hermnet/estimator.hpp"

namespace hermnet {

using MultiIndex = std::vector<int>;

/// x -> sum_k coeffs[k] exp(-|scale * x - centers[k]|^2)
struct GaussianNetwork {
    int dim = 1;
    double scale = 1.0;
    std::vector<std::vector<double>> centers;
    std::vector<double> coeffs;

    [[nodiscard]] double operator()(std::span<const double> x) const;
    [[nodiscard]] std::size_t size() const { return coeffs.size(); }

    /// Throws std::invalid_argument when sizes disagree or values are not finite.
    void validate() const;
};

/// {dim, scale, centers, coeffs}; doubles use shortest round-trip decimals so
/// save/load is bit-exact.
std::string network_to_json(const GaussianNetwork& net);
GaussianNetwork network_from_json(const std::string& text);
void save_network(const GaussianNetwork& net, const std::string& path);
GaussianNetwork load_network(const std::string& path);

/// P = sum_k b_k psi_k on R^d.
struct WeightedPolyCoeffs {
    int d = 1;
    std::map<MultiIndex, double> entries;
};

/// Caps for the quadrature-based synthesis. The center grid has (2m^2)^d points.
inline constexpr int kMaxSynthesisDim = 3;
inline constexpr long kMaxNeurons = 400'000;

/// The shared center grid (sqrt(3)/2) x_j over the tensor Gauss-Hermite rule
/// of size 2m^2, with the per-center factor
/// (3/(2 pi))^{d/2} prod_i lambda_{j_i} exp(3 x_{j_i}^2 / 4).
struct SynthesisGrid {
    int d = 1;
    int m = 1;
    std::vector<std::vector<double>> nodes;    ///< unscaled x_j
    std::vector<std::vector<double>> centers;  ///< (sqrt(3)/2) x_j
    std::vector<double> base;                  ///< per-center factor above
};

SynthesisGrid synthesis_grid(int m, int d);

/// Network approximating psi_k on R^d (d = k.size()). Requires |k|_1 < m^2.
GaussianNetwork gaussian_basis_network(const MultiIndex& k, int m);

/// sum_k b_k G_{k,m,d} merged over the shared grid.
GaussianNetwork poly_to_gaussian(const WeightedPolyCoeffs& p, int m);

/// Hermite coefficients of y -> Phi_{n,q,Q}(0, y), with the estimator
/// normalization n^{q(1-alpha)} folded in. Only even multi-indices appear.
WeightedPolyCoeffs prefab_kernel_coeffs(double n, int q, int Q, double alpha);

/// Gaussian network x -> n^{q(1-alpha)} Phi~_{n,q}(n^{1-alpha} |x|), up to
/// synthesis error. m = 0 picks ceil(n), the smallest m with n^2 <= m^2.
/// Requires n <= 8 and Q <= 3.
GaussianNetwork prefab_kernel_network(double n, int q, int Q, double alpha, int m = 0);

/// (1/M) sum_j F_j net(x - y_j)
double shallow_net_estimate(const Dataset& ds, const GaussianNetwork& net, std::span<const double> x);

/// Evaluates P = sum_k b_k psi_k at x.
double eval_weighted_poly(const WeightedPolyCoeffs& p, std::span<const double> x);

}  // namespace hermnet
