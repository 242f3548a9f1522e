#include "hermnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hermnet/detail/format.hpp"
#include "hermnet/detail/parallel.hpp"

namespace hermnet {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

json summary_to_json(const ErrorSummary& s) {
    return json{{"max", s.max},
                {"interior_max", s.interior_max},
                {"mean", s.mean},
                {"median", s.median},
                {"interior_mean", s.interior_mean}};
}

json histogram_to_json(const std::vector<std::pair<double, double>>& h) {
    json out = json::array();
    for (const auto& [p, y] : h) out.push_back(json::array({p, y}));
    return out;
}

std::vector<std::vector<double>> helix_points(std::span<const double> ts) {
    std::vector<std::vector<double>> xs;
    xs.reserve(ts.size());
    for (double t : ts) xs.push_back(HelixSpec::point(t));
    return xs;
}

}  // namespace

std::vector<double> HelixSpec::point(double t) { return {std::cos(kPi * t), std::sin(kPi * t), kPi * t}; }

double HelixSpec::speed() { return std::numbers::sqrt2 * kPi; }

double HelixSpec::length() { return std::sqrt(8.0) * kPi * kPi; }

Curve HelixSpec::curve() {
    Curve c;
    c.t0 = kT0;
    c.t1 = kT1;
    c.point = &HelixSpec::point;
    c.speed = [](double) { return HelixSpec::speed(); };
    c.length = length();
    return c;
}

bool HelixSpec::interior(double t) { return t >= 0.2 * kPi && t <= 1.8 * kPi; }

double helix_target(double t) {
    if (!(t >= HelixSpec::kT0 && t <= HelixSpec::kT1)) {
        throw std::out_of_range("helix_target: t must lie in [0, 2 pi]");
    }
    return std::cos(std::cos(kPi * t) - std::sin(kPi * t) - 0.5 * kPi * t);
}

std::string NoiseSpec::name() const {
    switch (model) {
        case Model::None: return "none";
        case Model::Additive: return "additive";
        case Model::Multiplicative: return "multiplicative";
    }
    return "";
}

NoiseSpec NoiseSpec::parse(const std::string& name, double sigma) {
    NoiseSpec s;
    s.sigma = sigma;
    if (name == "none") {
        s.model = Model::None;
    } else if (name == "additive") {
        s.model = Model::Additive;
    } else if (name == "multiplicative") {
        s.model = Model::Multiplicative;
    } else {
        throw std::invalid_argument("unknown noise model '" + name + "'");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("noise sigma must be >= 0");
    return s;
}

double noisy_value(const NoiseSpec& noise, double t, Rng& rng) {
    switch (noise.model) {
        case NoiseSpec::Model::None:
            return helix_target(t);
        case NoiseSpec::Model::Additive:
            return helix_target(t) + noise.sigma * rng.normal();
        case NoiseSpec::Model::Multiplicative: {
            const auto x = HelixSpec::point(t);
            const double u = x[0] - x[1] - 0.5 * x[2];
            const double s = kMultiplicativeSigma;
            return std::cos(u + s * rng.normal()) * std::exp(0.5 * s * s);
        }
    }
    throw std::logic_error("noisy_value: bad model");
}

Dataset gen_training(int M, const NoiseSpec& noise, Rng& rng) {
    if (M < 1) throw std::invalid_argument("gen_training: M must be >= 1");
    Dataset ds;
    ds.ambient_dim = 3;
    ds.manifold_dim = 1;
    ds.samples.reserve(M);
    for (int j = 0; j < M; ++j) {
        const double t = rng.uniform(HelixSpec::kT0, HelixSpec::kT1);
        ds.samples.push_back({HelixSpec::point(t), noisy_value(noise, t, rng)});
    }
    return ds;
}

void ExperimentConfig::validate() const {
    if (M < 1) throw std::invalid_argument("config: M must be >= 1");
    if (!(n >= 1.0) || !std::isfinite(n)) throw std::invalid_argument("config: n must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("config: alpha must lie in (0, 1]");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (test_points < 2) throw std::invalid_argument("config: test_points must be >= 2");
    if (volume && !(*volume > 0.0)) throw std::invalid_argument("config: volume must be positive");
    if (!(noise.sigma >= 0.0)) throw std::invalid_argument("config: sigma must be >= 0");
}

ExperimentConfig config_from_json(const std::string& text) {
    static const std::set<std::string> known = {"M",     "n",      "alpha",  "noise",  "sigma",  "trials",
                                                "test_points", "seed", "output", "volume", "threads"};
    ExperimentConfig cfg;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
        }
        cfg.M = j.value("M", cfg.M);
        cfg.n = j.value("n", cfg.n);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.noise = NoiseSpec::parse(j.value("noise", std::string("none")), j.value("sigma", 0.3));
        cfg.trials = j.value("trials", cfg.trials);
        cfg.test_points = j.value("test_points", cfg.test_points);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.output = j.value("output", cfg.output);
        if (j.contains("volume") && !j.at("volume").is_null()) cfg.volume = j.at("volume").get<double>();
        cfg.threads = j.value("threads", cfg.threads);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config json: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j{{"M", cfg.M},
           {"n", cfg.n},
           {"alpha", cfg.alpha},
           {"noise", cfg.noise.name()},
           {"sigma", cfg.noise.sigma},
           {"trials", cfg.trials},
           {"test_points", cfg.test_points},
           {"seed", cfg.seed},
           {"output", cfg.output},
           {"volume", cfg.effective_volume()},
           {"threads", cfg.threads}};
    return j.dump(2);
}

ErrorSummary summarize(std::span<const double> t, std::span<const double> error) {
    if (t.size() != error.size() || error.empty()) throw std::invalid_argument("summarize: size mismatch");
    ErrorSummary s;
    double sum = 0.0, isum = 0.0;
    std::size_t icount = 0;
    for (std::size_t i = 0; i < error.size(); ++i) {
        s.max = std::max(s.max, error[i]);
        sum += error[i];
        if (HelixSpec::interior(t[i])) {
            s.interior_max = std::max(s.interior_max, error[i]);
            isum += error[i];
            ++icount;
        }
    }
    s.mean = sum / static_cast<double>(error.size());
    s.interior_mean = icount ? isum / static_cast<double>(icount) : 0.0;
    s.median = median_of({error.begin(), error.end()});
    return s;
}

std::vector<std::pair<double, double>> cumulative_histogram(std::span<const double> error, double scale) {
    if (error.empty()) throw std::invalid_argument("histogram: no errors");
    std::vector<double> sorted(error.begin(), error.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    const double count = static_cast<double>(sorted.size());
    for (int p = 1; p <= 100; ++p) {
        auto idx = static_cast<std::size_t>(std::ceil(p * count / 100.0));
        idx = std::clamp<std::size_t>(idx, 1, sorted.size()) - 1;
        out.emplace_back(p, sorted[idx] / scale);
    }
    return out;
}

TrialReport make_trial_report(std::vector<double> t, std::vector<double> fhat) {
    TrialReport r;
    r.t = std::move(t);
    r.fhat = std::move(fhat);
    r.f.resize(r.t.size());
    r.error.resize(r.t.size());
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        r.f[i] = helix_target(r.t[i]);
        r.error[i] = std::abs(r.fhat[i] - r.f[i]);
    }
    r.summary = summarize(r.t, r.error);
    r.histogram = cumulative_histogram(r.error);
    return r;
}

std::vector<double> helix_test_grid(int count) {
    if (count < 2) throw std::invalid_argument("helix_test_grid: need at least two points");
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i) t[i] = HelixSpec::kT1 * i / (count - 1);
    t.back() = HelixSpec::kT1;
    return t;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto est = make_estimator_config(cfg.n, cfg.alpha, 1, cfg.effective_volume());
    const auto ts = helix_test_grid(cfg.test_points);
    const auto xs = helix_points(ts);

    ExperimentReport report;
    report.config = cfg;
    report.trials.resize(cfg.trials);
    const bool across_trials = cfg.trials > 1;
    detail::parallel_for(static_cast<std::size_t>(cfg.trials), across_trials ? cfg.threads : 1,
                         [&](std::size_t begin, std::size_t end) {
                             for (std::size_t k = begin; k < end; ++k) {
                                 Rng rng(cfg.seed, k);
                                 const auto ds = gen_training(cfg.M, cfg.noise, rng);
                                 auto fhat = estimate_batch(ds, est, xs, across_trials ? 1 : cfg.threads);
                                 report.trials[k] = make_trial_report(ts, std::move(fhat));
                             }
                         });

    std::vector<double> interior_max;
    for (const auto& tr : report.trials) interior_max.push_back(tr.summary.interior_max);
    report.median_trial_interior_max = median_of(interior_max);
    if (across_trials) {
        std::vector<double> mean(ts.size(), 0.0);
        for (const auto& tr : report.trials) {
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += tr.fhat[i];
        }
        for (auto& v : mean) v /= cfg.trials;
        report.average = make_trial_report(ts, std::move(mean));
    }
    return report;
}

void write_trial_csv(const TrialReport& trial, std::ostream& out) {
    out << "t,f,fhat,error\n";
    for (std::size_t i = 0; i < trial.t.size(); ++i) {
        out << detail::shortest(trial.t[i]) << ',' << detail::shortest(trial.f[i]) << ','
            << detail::shortest(trial.fhat[i]) << ',' << detail::shortest(trial.error[i]) << '\n';
    }
}

std::string summary_json(const ExperimentReport& report) {
    const auto& cfg = report.config;
    json j;
    j["rng"] = std::string(Rng::kAlgorithm);
    j["config"] = json::parse(config_to_json(cfg));
    j["advisory"] =
        "The sample-size hypothesis of the probabilistic error bounds involves the unknown smoothness of the "
        "target and is not checked; M and n are reported as given.";
    json trials = json::array();
    for (std::size_t k = 0; k < report.trials.size(); ++k) {
        trials.push_back({{"trial", k},
                          {"summary", summary_to_json(report.trials[k].summary)},
                          {"histogram", histogram_to_json(report.trials[k].histogram)}});
    }
    j["trials"] = trials;
    j["median_trial_interior_max"] = report.median_trial_interior_max;
    if (report.average) {
        j["average"] = {{"summary", summary_to_json(report.average->summary)},
                        {"histogram", histogram_to_json(report.average->histogram)}};
    }
    return j.dump(2);
}

void write_report(const ExperimentReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream out(std::filesystem::path(dir) / name);
        if (!out) throw std::runtime_error("cannot write " + (std::filesystem::path(dir) / name).string());
        return out;
    };
    for (std::size_t k = 0; k < report.trials.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "trial_%03zu.csv", k);
        auto out = open(name);
        write_trial_csv(report.trials[k], out);
    }
    if (report.average) {
        auto out = open("average.csv");
        write_trial_csv(*report.average, out);
    }
    auto out = open("summary.json");
    out << summary_json(report) << '\n';
}

double heat_kernel_baseline(const Dataset& ds, double t, std::span<const double> x, bool normalized) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("heat kernel: t must be positive");
    if (ds.samples.empty()) throw std::invalid_argument("heat kernel: empty dataset");
    if (x.size() != static_cast<std::size_t>(ds.ambient_dim)) throw std::invalid_argument("heat kernel: dimension mismatch");
    double weighted = 0.0, mass = 0.0;
    for (const auto& s : ds.samples) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - s.point[i]) * (x[i] - s.point[i]);
        const double k = std::exp(-d2 / t);
        weighted += k * s.value;
        mass += k;
    }
    if (normalized) {
        if (mass == 0.0) throw std::runtime_error("heat kernel: no sample within reach of the query point");
        return weighted / mass;
    }
    const double front = std::pow(4.0 * kPi * t, 0.5 * ds.manifold_dim) * static_cast<double>(ds.samples.size());
    return weighted / front;
}

double bernstein_demo(const std::function<double(double)>& f, int n, double x) {
    if (n < 1) throw std::invalid_argument("bernstein: n must be >= 1");
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("bernstein: x must lie in [0, 1]");
    if (x == 0.0) return f(0.0);
    if (x == 1.0) return f(1.0);
    const double lx = std::log(x), l1x = std::log1p(-x);
    const double lgn = std::lgamma(n + 1.0);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double logw = lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * lx + (n - k) * l1x;
        s += std::exp(logw) * f(static_cast<double>(k) / n);
    }
    return s;
}

std::vector<SaturationRow> bernstein_saturation(std::span<const int> ns, int grid) {
    auto sq = [](double x) { return x * x; };
    std::vector<SaturationRow> rows;
    for (int n : ns) {
        double err = 0.0;
        for (int i = 0; i < grid; ++i) {
            const double x = static_cast<double>(i) / (grid - 1);
            err = std::max(err, std::abs(bernstein_demo(sq, n, x) - sq(x)));
        }
        rows.push_back({"bernstein", static_cast<double>(n), err, n * err});
    }
    return rows;
}

std::vector<SaturationRow> heat_saturation(std::span<const double> ts, int M, int test_points, std::uint64_t seed) {
    Rng rng(seed, 0);
    const auto ds = gen_training(M, NoiseSpec{}, rng);
    const auto grid = helix_test_grid(test_points);
    std::vector<SaturationRow> rows;
    for (double t : ts) {
        double err = 0.0;
        for (double s : grid) {
            if (!HelixSpec::interior(s)) continue;
            const auto x = HelixSpec::point(s);
            err = std::max(err, std::abs(heat_kernel_baseline(ds, t, x, true) - helix_target(s)));
        }
        rows.push_back({"heat-kernel", t, err, err});
    }
    return rows;
}

std::vector<SaturationRow> estimator_sweep(std::span<const double> ns, int M, int test_points, std::uint64_t seed) {
    std::vector<SaturationRow> rows;
    for (double n : ns) {
        ExperimentConfig cfg;
        cfg.M = M;
        cfg.n = n;
        cfg.test_points = test_points;
        cfg.seed = seed;
        const auto report = run_experiment(cfg);
        const double err = report.trials.front().summary.interior_max;
        rows.push_back({"kernel-estimator", n, err, err});
    }
    return rows;
}

}  // namespace hermnet
