#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "hermnet/hermite.hpp"

namespace hermnet {

/// The fixed C-infinity low-pass cutoff: 1 on [0, 1/2], 0 on [1, inf), and
/// the smooth-step s(2-2t) / (s(2-2t) + s(2t-1)) with s(u) = exp(-1/u) in
/// between. Symmetric about 3/4: H(3/4 - s) + H(3/4 + s) = 1.
/// Throws std::invalid_argument for negative or NaN t.
double filter_h(double t);

/// Coefficients of the radial projection polynomial
///   P_{m,q}(x) = sum_{l=0}^{m} coeffs[l] psi_{2l}(x),
/// equal to Proj_{2m,q,Q}(0, x) evaluated at |x| = x.
struct PCoeffs {
    int m = 0;
    int q = 1;
    std::vector<double> coeffs;

    [[nodiscard]] double operator()(double x) const;
};

PCoeffs p_coeffs(int m, int q);

/// Compiled localized kernel Phi~_{n,q}(r) = sum_l a[l] psi_{2l}(r), with the
/// filtered sum over projection degrees already folded into `a`.
struct KernelTable {
    double n = 1.0;
    int q = 1;
    std::vector<double> a;   ///< l = 0 .. floor(n^2/2)
    int support = 0;         ///< number of leading entries that can be nonzero

    /// Largest Hermite degree touched during evaluation.
    [[nodiscard]] int degree() const { return support > 0 ? 2 * (support - 1) : 0; }
};

/// Throws std::invalid_argument if n < 1, q < 1, or the table would need
/// Hermite degrees beyond kMaxHermiteDegree.
KernelTable compile_kernel(double n, int q);

/// One Hermite pass plus a dot product. r must be finite and >= 0.
double eval_kernel(const KernelTable& table, double r);

/// Evaluates many radii at once. Lanes run independent recurrences in
/// lockstep, and each lane performs exactly the arithmetic of eval_kernel,
/// so results are bitwise identical to the scalar path.
void eval_kernel_many(const KernelTable& table, std::span<const double> r, std::span<double> out);

/// Coefficients D_{d;r} of pi^{-d/2} (1 - w^2)^{-d/2} = sum_r D_{d;r} w^r.
struct DSequence {
    int d = 0;
    std::vector<double> values;  ///< r = 0 .. rmax; odd entries are zero
};

DSequence d_sequence(int d, int rmax);

/// Generalized binomial coefficient binom(top, l) for real top, by the
/// product formula.
double binom_general(double top, int l);

/// Oracle-grade tensor sum Proj_{m,d}(x, y) = sum_{|k|_1 = m} psi_k(x) psi_k(y).
/// Cost is the number of compositions of m into d parts; throws
/// std::invalid_argument if d > 4 or that count exceeds kMaxCompositions.
inline constexpr long kMaxCompositions = 2'000'000;
double proj_tensor(int m, std::span<const double> x, std::span<const double> y);

/// Proj_{j,2}((x1, x2), (y1, y2)).
double proj_2d(int j, double x1, double x2, double y1, double y2);

enum class MehlerForm { Expanded, DifferenceSum, Shifted };

/// Closed form of sum_m w^m Proj_{m,d}(x, y). Requires |w| <= 0.95.
double mehler_closed_form(std::span<const double> x, std::span<const double> y, double w,
                          MehlerForm form = MehlerForm::Expanded);

/// Dimension-reduced projection Proj_{m,q,Q}(x, y) for x, y in R^Q
/// (Q = x.size()). For q = 1 the inputs must be collinear, otherwise
/// std::invalid_argument. When x or y is the origin the angle is taken as 0,
/// which is exact by rotation invariance.
double proj_reduced(int m, int q, std::span<const double> x, std::span<const double> y);

/// Proj_{m,Q}(x, y) rebuilt from the reduced projections:
/// pi^{(q-Q)/2} sum_l binom((Q-q)/2 + l - 1, l) Proj_{m-2l,q,Q}(x, y).
double proj_from_reduced(int m, int q, std::span<const double> x, std::span<const double> y);

/// Oracle-grade localized kernel Phi_{n,d}(x, y) = sum_m H(sqrt(m)/n) Proj_{m,d}(x, y)
/// by explicit tensor sums. Restricted to d <= 3, n <= 12.
double phi_localized(double n, std::span<const double> x, std::span<const double> y);

/// sigma_n(f)(x) = int Phi_{n,1}(x, y) f(y) dy on the line, discretized by the
/// rule: sum_k lebesgue_weights[k] Phi_{n,1}(x, x_k) f(x_k). Exact for
/// f = P in Pi_N when the rule size is at least (n^2 + N^2) / 2.
double sigma_n_discrete(double n, const QuadratureRule& rule, const std::function<double(double)>& f, double x);

}  // namespace hermnet
