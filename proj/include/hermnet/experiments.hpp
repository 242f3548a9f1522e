#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hermnet/estimator.hpp"
#include "hermnet/rng.hpp"

namespace hermnet {

/// t in [0, 2 pi] -> (cos pi t, sin pi t, pi t), speed sqrt(2) pi.
struct HelixSpec {
    static constexpr double kT0 = 0.0;
    static constexpr double kT1 = 2.0 * 3.14159265358979323846;

    [[nodiscard]] static std::vector<double> point(double t);
    [[nodiscard]] static double speed();
    /// sqrt(8) pi^2
    [[nodiscard]] static double length();
    [[nodiscard]] static Curve curve();
    /// Errors are summarized separately on t in [0.2 pi, 1.8 pi].
    [[nodiscard]] static bool interior(double t);
};

/// cos(cos(pi t) - sin(pi t) - pi t / 2); throws std::out_of_range outside [0, 2 pi].
double helix_target(double t);

struct NoiseSpec {
    enum class Model { None, Additive, Multiplicative };
    Model model = Model::None;
    double sigma = 0.3;  ///< additive standard deviation

    [[nodiscard]] std::string name() const;
    static NoiseSpec parse(const std::string& name, double sigma = 0.3);
};

/// Standard deviation of the scalar perturbation in the multiplicative model.
inline constexpr double kMultiplicativeSigma = 1.5;

/// One noisy observation at helix parameter t.
///   additive:        f + N(0, sigma^2)
///   multiplicative:  cos(u + N(0, 1.5^2)) exp(1.125), u = x1 - x2 - x3/2,
/// which has mean f because E cos(u + Z) = cos(u) exp(-1.125).
double noisy_value(const NoiseSpec& noise, double t, Rng& rng);

/// M points with t uniform on [0, 2 pi]; noise drawn once per sample.
Dataset gen_training(int M, const NoiseSpec& noise, Rng& rng);

struct ExperimentConfig {
    int M = 256;
    double n = 64.0;
    double alpha = 1.0;
    NoiseSpec noise;
    int trials = 1;
    int test_points = 2048;
    std::uint64_t seed = 1;
    std::string output;
    std::optional<double> volume;  ///< defaults to the helix length
    unsigned threads = 0;

    [[nodiscard]] double effective_volume() const { return volume.value_or(HelixSpec::length()); }
    /// Throws std::invalid_argument.
    void validate() const;
};

/// Fields mirror ExperimentConfig; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct ErrorSummary {
    double max = 0.0;
    double interior_max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double interior_mean = 0.0;
};

ErrorSummary summarize(std::span<const double> t, std::span<const double> error);

/// (p, y): at p percent of the points the error is at most scale * y.
/// p runs over 1..100.
std::vector<std::pair<double, double>> cumulative_histogram(std::span<const double> error, double scale = 0.3);

struct TrialReport {
    std::vector<double> t, f, fhat, error;
    ErrorSummary summary;
    std::vector<std::pair<double, double>> histogram;
};

TrialReport make_trial_report(std::vector<double> t, std::vector<double> fhat);

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialReport> trials;
    /// Reconstruction from the trial average of F^, when trials > 1.
    std::optional<TrialReport> average;
    double median_trial_interior_max = 0.0;
};

/// Equidistant test parameters t_i = 2 pi i / (count - 1).
std::vector<double> helix_test_grid(int count);

/// Deterministic under a fixed seed: trial k draws from Rng(seed, k).
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// trial_NNN.csv (t,f,fhat,error), average.csv when present, summary.json.
void write_report(const ExperimentReport& report, const std::string& dir);
void write_trial_csv(const TrialReport& trial, std::ostream& out);
std::string summary_json(const ExperimentReport& report);

/// (1 / (M (4 pi t)^{q/2})) sum_j exp(-|x - y_j|^2 / t) F_j. With `normalized`
/// the sum is instead divided by the same sum over all-ones values.
double heat_kernel_baseline(const Dataset& ds, double t, std::span<const double> x, bool normalized = false);

/// Bernstein operator on [0, 1]: sum_k binom(n, k) f(k/n) x^k (1-x)^{n-k}.
double bernstein_demo(const std::function<double(double)>& f, int n, double x);

struct SaturationRow {
    std::string method;
    double parameter = 0.0;  ///< n for Bernstein and the kernel estimator, t for the heat kernel
    double error = 0.0;
    double scaled_error = 0.0;  ///< n * error for Bernstein; error otherwise
};

/// Bernstein on f(x) = x^2, n * max_grid |B_n f - f| for each n.
std::vector<SaturationRow> bernstein_saturation(std::span<const int> ns, int grid = 201);

/// Interior max error of the heat-kernel estimator (normalized by the same
/// data's density pass) for each t, on a noiseless helix dataset.
std::vector<SaturationRow> heat_saturation(std::span<const double> ts, int M, int test_points, std::uint64_t seed);

/// Interior max error of the kernel estimator on a noiseless helix for each n.
std::vector<SaturationRow> estimator_sweep(std::span<const double> ns, int M, int test_points, std::uint64_t seed);

}  // namespace hermnet
