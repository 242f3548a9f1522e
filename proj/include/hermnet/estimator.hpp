#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hermnet/kernels.hpp"

namespace hermnet {

/// One observation: an ambient point y_j in R^Q and the noisy value F(y_j, eps_j).
struct LabeledSample {
    std::vector<double> point;
    double value = 0.0;
};

/// Scattered samples from an unknown q-dimensional manifold in R^Q. The
/// manifold dimension is declared by the caller; nothing else about the
/// geometry is needed.
struct Dataset {
    int ambient_dim = 0;
    int manifold_dim = 0;
    std::vector<LabeledSample> samples;

    [[nodiscard]] std::size_t size() const { return samples.size(); }

    /// Throws std::invalid_argument on empty data, q > Q, a point of the wrong
    /// dimension, or a non-finite coordinate/value.
    void validate() const;
};

/// CSV with header `y_1,...,y_Q,value`.
void write_dataset_csv(const Dataset& ds, std::ostream& out);
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(std::istream& in, int manifold_dim);
Dataset read_dataset_csv(const std::string& path, int manifold_dim);

struct EstimatorConfig {
    double n = 1.0;
    double alpha = 1.0;
    KernelTable table;
    /// Total mass of the q-volume measure the samples are drawn from. The
    /// kernel integrates to one, so with samples from the normalized measure
    /// the raw average tends to f / volume; this factor undoes that.
    double volume = 1.0;

    /// lambda = n^{1-alpha}
    [[nodiscard]] double scale() const;
    /// volume * n^{q(1-alpha)}
    [[nodiscard]] double normalization() const;
};

/// Compiles the kernel for (n, q). alpha must lie in (0, 1], volume > 0.
EstimatorConfig make_estimator_config(double n, double alpha, int q, double volume = 1.0);

/// volume * n^{q(1-alpha)} / M * sum_j F_j Phi~_{n,q}(n^{1-alpha} |x - y_j|).
/// The sample sum is compensated and runs in dataset order.
double estimate_at(const Dataset& ds, const EstimatorConfig& cfg, std::span<const double> x);

/// Pointwise identical to estimate_at. Test points are split across
/// `threads` workers (0 picks the hardware concurrency); every point is
/// reduced by one worker in sample order, so results do not depend on the
/// split.
std::vector<double> estimate_batch(const Dataset& ds, const EstimatorConfig& cfg,
                                   const std::vector<std::vector<double>>& xs,
                                   unsigned threads = 0);

/// A parametrized curve t in [t0, t1] -> R^Q with its speed |x'(t)|.
struct Curve {
    double t0 = 0.0;
    double t1 = 1.0;
    std::function<std::vector<double>(double)> point;
    std::function<double(double)> speed;
    /// Total arc length; the probability measure is arc length / length.
    double length = 1.0;
};

struct CurveQuadratureOptions {
    int initial_panels = 64;
    int max_panels = 1 << 16;
    int panel_order = 16;
    double tolerance = 1e-8;
};

/// volume * lambda * integral of Phi~(lambda |x - curve(t)|) f(t) d mu*(t)
/// over the curve, mu* the normalized arc-length measure. This is the
/// expectation of the estimator (alpha = 1 - log(lambda)/log(n)) under
/// uniform arc-length sampling. Composite Gauss-Legendre
/// panels are doubled until two successive results agree to
/// tolerance * max(1, |result|); throws std::runtime_error otherwise. The
/// table must be compiled for q = 1.
double continuous_operator_on_curve(const Curve& curve, const std::function<double(double)>& f,
                                    const KernelTable& table, double lambda,
                                    std::span<const double> x, double volume = 1.0,
                                    const CurveQuadratureOptions& opts = {});

/// Mean and second moment of the single-sample estimator term
/// volume * lambda * Phi~(lambda |x - Y|) f(Y) with Y ~ mu*; the estimator
/// from M samples has standard deviation sqrt((second - mean^2) / M).
struct CurveMoments {
    double mean = 0.0;
    double second = 0.0;
};

/// Same quadrature as continuous_operator_on_curve; both moments must
/// converge.
CurveMoments curve_operator_moments(const Curve& curve, const std::function<double(double)>& f,
                                    const KernelTable& table, double lambda, std::span<const double> x,
                                    double volume = 1.0, const CurveQuadratureOptions& opts = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
struct LegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
LegendreRule gauss_legendre_rule(int order);

}  // namespace hermnet
