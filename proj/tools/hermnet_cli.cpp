// Command-line front end: data generation, estimation, the helix experiments,
// baselines, network synthesis and DAG evaluation.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "hermnet/deep_net.hpp"
#include "hermnet/detail/format.hpp"
#include "hermnet/experiments.hpp"
#include "hermnet/gaussian_net.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hermnet;

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::string out = ".";
    int trials = 1;
    bool trials_set = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option_function<std::uint64_t>(
        "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "RNG seed");
    app->add_option("--out", c.out, "Output directory");
    app->add_option_function<int>(
        "--trials", [&c](int k) { c.trials = k, c.trials_set = true; }, "Number of trials");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    const auto path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

ExperimentConfig experiment_config(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : config_from_json(slurp(c.config));
    if (c.seed_set) cfg.seed = c.seed;
    if (c.trials_set) cfg.trials = c.trials;
    cfg.validate();
    return cfg;
}

std::vector<std::vector<double>> read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> pts;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> p;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            p.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument("points csv: bad number '" + cell + "'");
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

void write_rows(std::ostream& out, const std::vector<SaturationRow>& rows) {
    for (const auto& r : rows) {
        out << r.method << ',' << detail::shortest(r.parameter) << ',' << detail::shortest(r.error) << ','
            << detail::shortest(r.scaled_error) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localized Hermite kernel estimation and Gaussian network synthesis"};
    app.require_subcommand(1);

    // gen-data
    Common gen_c;
    int gen_M = 0;
    std::string gen_noise;
    double gen_sigma = -1.0;
    auto* gen = app.add_subcommand("gen-data", "Sample noisy helix training data");
    add_common(gen, gen_c);
    gen->add_option("--M", gen_M, "Training size");
    gen->add_option("--noise", gen_noise, "none | additive | multiplicative");
    gen->add_option("--sigma", gen_sigma, "Additive noise standard deviation");

    // estimate
    Common est_c;
    std::string est_data, est_points;
    int est_q = 1;
    double est_n = 64.0, est_alpha = 1.0, est_volume = 1.0;
    unsigned est_threads = 0;
    auto* est = app.add_subcommand("estimate", "Evaluate the kernel estimator on a dataset");
    add_common(est, est_c);
    est->add_option("--data", est_data, "Dataset CSV (y_1..y_Q,value)")->required()->check(CLI::ExistingFile);
    est->add_option("--points", est_points, "Query CSV (x_1..x_Q with header)")->required()->check(CLI::ExistingFile);
    est->add_option("--q", est_q, "Manifold dimension");
    est->add_option("--n", est_n, "Degree parameter");
    est->add_option("--alpha", est_alpha, "Scaling exponent in (0, 1]");
    est->add_option("--volume", est_volume, "Mass of the sampling measure");
    est->add_option("--threads", est_threads, "Worker threads (0 = all)");

    // helix
    Common hel_c;
    auto* hel = app.add_subcommand("helix", "Run the helix reconstruction experiment");
    add_common(hel, hel_c);

    // baseline-heat
    Common heat_c;
    std::vector<double> heat_ts{0.1, 0.05, 0.025};
    std::vector<double> heat_ns{16, 32, 64};
    auto* heat = app.add_subcommand("baseline-heat", "Heat-kernel baseline versus the kernel estimator");
    add_common(heat, heat_c);
    heat->add_option("--t", heat_ts, "Heat-kernel times");
    heat->add_option("--n", heat_ns, "Estimator degrees");

    // demo-bernstein
    Common bern_c;
    std::vector<int> bern_ns{16, 64, 256};
    auto* bern = app.add_subcommand("demo-bernstein", "Bernstein saturation on f(x) = x^2");
    add_common(bern, bern_c);
    bern->add_option("--n", bern_ns, "Bernstein degrees");

    // synth-net
    Common syn_c;
    double syn_n = 4.0, syn_alpha = 1.0;
    int syn_q = 1, syn_Q = 1, syn_m = 0;
    std::vector<int> syn_k;
    auto* syn = app.add_subcommand("synth-net", "Synthesize a Gaussian network");
    add_common(syn, syn_c);
    syn->add_option("--n", syn_n, "Kernel degree parameter");
    syn->add_option("--q", syn_q, "Manifold dimension");
    syn->add_option("--Q", syn_Q, "Ambient dimension");
    syn->add_option("--alpha", syn_alpha, "Scaling exponent");
    syn->add_option("--m", syn_m, "Quadrature parameter (0 = ceil(n))");
    syn->add_option("--basis", syn_k, "Emit the basis network for this multi-index instead");

    // deep-eval
    Common deep_c;
    std::string deep_dag, deep_inputs;
    auto* deep = app.add_subcommand("deep-eval", "Evaluate a DAG of built-in constituents");
    add_common(deep, deep_c);
    deep->add_option("--dag", deep_dag, "DAG JSON")->required()->check(CLI::ExistingFile);
    deep->add_option("--inputs", deep_inputs, "JSON list of {source id: point} maps")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            auto cfg = experiment_config(gen_c);
            if (gen_M > 0) cfg.M = gen_M;
            if (!gen_noise.empty()) cfg.noise = NoiseSpec::parse(gen_noise, gen_sigma >= 0 ? gen_sigma : cfg.noise.sigma);
            else if (gen_sigma >= 0) cfg.noise.sigma = gen_sigma;
            cfg.validate();
            for (int k = 0; k < cfg.trials; ++k) {
                Rng rng(cfg.seed, static_cast<std::uint64_t>(k));
                const auto ds = gen_training(cfg.M, cfg.noise, rng);
                char name[32];
                std::snprintf(name, sizeof(name), "dataset_%03d.csv", k);
                auto out = open_out(gen_c.out, name);
                write_dataset_csv(ds, out);
            }
        } else if (*est) {
            const auto ds = read_dataset_csv(est_data, est_q);
            const auto pts = read_points_csv(est_points);
            const auto cfg = make_estimator_config(est_n, est_alpha, est_q, est_volume);
            const auto values = estimate_batch(ds, cfg, pts, est_threads);
            auto out = open_out(est_c.out, "estimates.csv");
            for (int i = 1; i <= ds.ambient_dim; ++i) out << "x_" << i << ',';
            out << "fhat\n";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                for (double c : pts[i]) out << detail::shortest(c) << ',';
                out << detail::shortest(values[i]) << '\n';
            }
        } else if (*hel) {
            auto cfg = experiment_config(hel_c);
            const std::string dir = cfg.output.empty() || hel->count("--out") ? hel_c.out : cfg.output;
            const auto report = run_experiment(cfg);
            write_report(report, dir);
            const auto& s = report.trials.front().summary;
            std::cout << "trial 0: interior max " << s.interior_max << ", max " << s.max << '\n';
            if (report.average) {
                std::cout << "average of " << cfg.trials << " trials: interior max "
                          << report.average->summary.interior_max << "; median single-trial interior max "
                          << report.median_trial_interior_max << '\n';
            }
        } else if (*heat) {
            auto cfg = experiment_config(heat_c);
            auto out = open_out(heat_c.out, "saturation.csv");
            out << "method,parameter,error,scaled_error\n";
            write_rows(out, heat_saturation(heat_ts, cfg.M, cfg.test_points, cfg.seed));
            write_rows(out, estimator_sweep(heat_ns, cfg.M, cfg.test_points, cfg.seed));
        } else if (*bern) {
            auto out = open_out(bern_c.out, "bernstein.csv");
            out << "method,parameter,error,scaled_error\n";
            write_rows(out, bernstein_saturation(bern_ns));
        } else if (*syn) {
            GaussianNetwork net;
            if (!syn_k.empty()) {
                net = gaussian_basis_network(syn_k, syn_m > 0 ? syn_m : 3);
            } else {
                net = prefab_kernel_network(syn_n, syn_q, syn_Q, syn_alpha, syn_m);
            }
            fs::create_directories(syn_c.out);
            save_network(net, (fs::path(syn_c.out) / "network.json").string());
            std::cout << net.size() << " neurons\n";
        } else if (*deep) {
            const auto dag = load_dag(deep_dag);
            const auto constituents = builtin_constituents(dag);
            json probes;
            try {
                probes = json::parse(slurp(deep_inputs));
            } catch (const json::exception& e) {
                throw std::invalid_argument(std::string("inputs json: ") + e.what());
            }
            if (!probes.is_array()) throw std::invalid_argument("inputs json: expected a list");
            auto out = open_out(deep_c.out, "deep_eval.csv");
            out << "probe,sink\n";
            for (std::size_t i = 0; i < probes.size(); ++i) {
                SourceInputs inputs;
                try {
                    inputs = probes[i].get<SourceInputs>();
                } catch (const json::exception& e) {
                    throw std::invalid_argument(std::string("inputs json: ") + e.what());
                }
                out << i << ',' << detail::shortest(eval_gfunction(dag, constituents, inputs)) << '\n';
            }
            for (const auto& [id, level] : dag.levels()) std::cout << id << " level " << level << '\n';
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
