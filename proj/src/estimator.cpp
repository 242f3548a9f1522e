#include "hermnet/estimator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hermnet/detail/format.hpp"
#include "hermnet/detail/parallel.hpp"

namespace hermnet {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void check_config(const Dataset& ds, const EstimatorConfig& cfg) {
    if (ds.samples.empty()) throw std::invalid_argument("estimator: empty dataset");
    if (cfg.table.q != ds.manifold_dim) {
        throw std::invalid_argument("estimator: kernel compiled for q=" + std::to_string(cfg.table.q) +
                                    " but dataset declares q=" + std::to_string(ds.manifold_dim));
    }
}

double estimate_point(const Dataset& ds, const EstimatorConfig& cfg, double scale, double norm,
                      std::span<const double> x, std::vector<double>& radii,
                      std::vector<double>& kernel) {
    if (x.size() != static_cast<std::size_t>(ds.ambient_dim)) {
        throw std::invalid_argument("estimator: query point has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(ds.ambient_dim));
    }
    for (double c : x) {
        if (!std::isfinite(c)) throw std::invalid_argument("estimator: non-finite query point");
    }
    const std::size_t m = ds.samples.size();
    radii.resize(m);
    kernel.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& y = ds.samples[j].point;
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
        radii[j] = scale * std::sqrt(d2);
    }
    eval_kernel_many(cfg.table, radii, kernel);
    CompensatedSum sum;
    for (std::size_t j = 0; j < m; ++j) sum.add(ds.samples[j].value * kernel[j]);
    return norm * sum.value() / static_cast<double>(m);
}

}  // namespace

void Dataset::validate() const {
    if (samples.empty()) throw std::invalid_argument("dataset: no samples");
    if (ambient_dim < 1 || manifold_dim < 1 || manifold_dim > ambient_dim) {
        throw std::invalid_argument("dataset: need 1 <= q <= Q");
    }
    for (const auto& s : samples) {
        if (s.point.size() != static_cast<std::size_t>(ambient_dim)) {
            throw std::invalid_argument("dataset: sample point has wrong dimension");
        }
        if (!std::isfinite(s.value)) throw std::invalid_argument("dataset: non-finite value");
        for (double c : s.point) {
            if (!std::isfinite(c)) throw std::invalid_argument("dataset: non-finite coordinate");
        }
    }
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
    for (int i = 1; i <= ds.ambient_dim; ++i) out << "y_" << i << ',';
    out << "value\n";
    for (const auto& s : ds.samples) {
        for (double c : s.point) out << detail::shortest(c) << ',';
        out << detail::shortest(s.value) << '\n';
    }
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_dataset_csv(ds, out);
}

Dataset read_dataset_csv(std::istream& in, int manifold_dim) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("dataset csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.back() != "value") {
        throw std::invalid_argument("dataset csv: header must be y_1,...,y_Q,value");
    }
    for (std::size_t i = 0; i + 1 < header.size(); ++i) {
        if (header[i] != "y_" + std::to_string(i + 1)) {
            throw std::invalid_argument("dataset csv: unexpected column '" + header[i] + "'");
        }
    }
    Dataset ds;
    ds.ambient_dim = static_cast<int>(header.size()) - 1;
    ds.manifold_dim = manifold_dim;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const auto* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, v);
            if (ec != std::errc() || ptr != end) {
                throw std::invalid_argument("dataset csv: bad number '" + cell + "' on line " +
                                            std::to_string(lineno));
            }
            cells.push_back(v);
        }
        if (cells.size() != header.size()) {
            throw std::invalid_argument("dataset csv: wrong column count on line " + std::to_string(lineno));
        }
        LabeledSample s;
        s.value = cells.back();
        cells.pop_back();
        s.point = std::move(cells);
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

Dataset read_dataset_csv(const std::string& path, int manifold_dim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_dataset_csv(in, manifold_dim);
}

double EstimatorConfig::scale() const { return std::pow(n, 1.0 - alpha); }

double EstimatorConfig::normalization() const { return volume * std::pow(n, table.q * (1.0 - alpha)); }

EstimatorConfig make_estimator_config(double n, double alpha, int q, double volume) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("estimator: alpha must lie in (0, 1]");
    if (!(volume > 0.0) || !std::isfinite(volume)) throw std::invalid_argument("estimator: volume must be positive");
    return EstimatorConfig{n, alpha, compile_kernel(n, q), volume};
}

double estimate_at(const Dataset& ds, const EstimatorConfig& cfg, std::span<const double> x) {
    check_config(ds, cfg);
    std::vector<double> radii, kernel;
    return estimate_point(ds, cfg, cfg.scale(), cfg.normalization(), x, radii, kernel);
}

std::vector<double> estimate_batch(const Dataset& ds, const EstimatorConfig& cfg,
                                   const std::vector<std::vector<double>>& xs, unsigned threads) {
    check_config(ds, cfg);
    const double scale = cfg.scale();
    const double norm = cfg.normalization();
    std::vector<double> out(xs.size());
    detail::parallel_for(xs.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> radii, kernel;
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = estimate_point(ds, cfg, scale, norm, xs[i], radii, kernel);
        }
    });
    return out;
}

LegendreRule gauss_legendre_rule(int order) {
    if (order < 1 || order > 128) throw std::invalid_argument("gauss_legendre_rule: order out of range");
    LegendreRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) p0 = 1.0;
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

CurveMoments curve_operator_moments(const Curve& curve, const std::function<double(double)>& f,
                                    const KernelTable& table, double lambda, std::span<const double> x,
                                    double volume, const CurveQuadratureOptions& opts) {
    if (table.q != 1) throw std::invalid_argument("continuous operator on a curve needs a q = 1 kernel");
    if (!(curve.t1 > curve.t0) || !(curve.length > 0.0)) throw std::invalid_argument("curve: bad range");
    const auto gl = gauss_legendre_rule(opts.panel_order);
    const double factor = volume * lambda;

    std::vector<double> radii, kernel, weights, values;
    auto integrate = [&](int panels) {
        const double h = (curve.t1 - curve.t0) / panels;
        const std::size_t count = static_cast<std::size_t>(panels) * gl.nodes.size();
        radii.resize(count);
        kernel.resize(count);
        weights.resize(count);
        values.resize(count);
        std::size_t idx = 0;
        for (int p = 0; p < panels; ++p) {
            const double mid = curve.t0 + (p + 0.5) * h;
            for (std::size_t g = 0; g < gl.nodes.size(); ++g, ++idx) {
                const double t = mid + 0.5 * h * gl.nodes[g];
                const auto y = curve.point(t);
                if (y.size() != x.size()) throw std::invalid_argument("curve: dimension mismatch");
                double d2 = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
                radii[idx] = lambda * std::sqrt(d2);
                weights[idx] = 0.5 * h * gl.weights[g] * curve.speed(t) / curve.length;
                values[idx] = f(t);
            }
        }
        eval_kernel_many(table, radii, kernel);
        CompensatedSum first, second;
        for (std::size_t i = 0; i < count; ++i) {
            const double term = factor * kernel[i] * values[i];
            first.add(weights[i] * term);
            second.add(weights[i] * term * term);
        }
        return CurveMoments{first.value(), second.value()};
    };
    auto close = [&](double a, double b) {
        return std::abs(a - b) <= opts.tolerance * std::max(1.0, std::abs(b));
    };

    int panels = std::max(1, opts.initial_panels);
    CurveMoments previous = integrate(panels);
    while (panels * 2 <= opts.max_panels) {
        panels *= 2;
        const CurveMoments current = integrate(panels);
        if (close(previous.mean, current.mean) && close(previous.second, current.second)) return current;
        previous = current;
    }
    throw std::runtime_error("curve operator quadrature did not converge");
}

double continuous_operator_on_curve(const Curve& curve, const std::function<double(double)>& f,
                                    const KernelTable& table, double lambda,
                                    std::span<const double> x, double volume,
                                    const CurveQuadratureOptions& opts) {
    return curve_operator_moments(curve, f, table, lambda, x, volume, opts).mean;
}

}  // namespace hermnet
