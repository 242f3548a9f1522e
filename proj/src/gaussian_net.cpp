#include "hermnet/gaussian_net.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hermnet/hermite.hpp"
#include "hermnet/kernels.hpp"

namespace hermnet {

namespace {

using json = nlohmann::json;

int l1(const MultiIndex& k) {
    int s = 0;
    for (int v : k) s += v;
    return s;
}

long grid_size(int m, int d) {
    long count = 1;
    for (int i = 0; i < d; ++i) count *= 2L * m * m;
    return count;
}

void check_synthesis(int m, int d) {
    if (d < 1 || d > kMaxSynthesisDim) {
        throw std::invalid_argument("gaussian synthesis: dimension must be in [1, 3]");
    }
    if (m < 1 || 2 * m * m > kMaxQuadratureSize) {
        throw std::invalid_argument("gaussian synthesis: m=" + std::to_string(m) + " out of range");
    }
    if (grid_size(m, d) > kMaxNeurons) {
        throw std::invalid_argument("gaussian synthesis: (2m^2)^d = " + std::to_string(grid_size(m, d)) +
                                    " neurons exceeds the cap of " + std::to_string(kMaxNeurons));
    }
}

void check_index(const MultiIndex& k, int m, int d) {
    if (static_cast<int>(k.size()) != d) throw std::invalid_argument("multi-index has the wrong length");
    for (int v : k) {
        if (v < 0) throw std::invalid_argument("multi-index entries must be >= 0");
    }
    if (l1(k) >= m * m) {
        throw std::invalid_argument("multi-index with |k|_1 = " + std::to_string(l1(k)) +
                                    " is not below m^2 = " + std::to_string(m * m));
    }
}

// Every multi-index of length d with even entries and |k|_1 <= top.
std::vector<MultiIndex> even_indices(int d, int top) {
    std::vector<MultiIndex> out;
    MultiIndex k(d, 0);
    while (true) {
        if (l1(k) <= top) out.push_back(k);
        int i = d - 1;
        while (i >= 0) {
            k[i] += 2;
            if (l1(k) <= top) break;
            k[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

}  // namespace

double GaussianNetwork::operator()(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("network: input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(dim));
    }
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        double d2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double diff = scale * x[i] - centers[k][i];
            d2 += diff * diff;
        }
        s += coeffs[k] * std::exp(-d2);
    }
    return s;
}

void GaussianNetwork::validate() const {
    if (dim < 1) throw std::invalid_argument("network: dim must be >= 1");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("network: scale must be positive");
    if (centers.size() != coeffs.size()) throw std::invalid_argument("network: centers/coeffs size mismatch");
    for (std::size_t k = 0; k < centers.size(); ++k) {
        if (centers[k].size() != static_cast<std::size_t>(dim)) {
            throw std::invalid_argument("network: center has the wrong dimension");
        }
        if (!std::isfinite(coeffs[k])) throw std::invalid_argument("network: non-finite coefficient");
        for (double c : centers[k]) {
            if (!std::isfinite(c)) throw std::invalid_argument("network: non-finite center");
        }
    }
}

std::string network_to_json(const GaussianNetwork& net) {
    json j;
    j["dim"] = net.dim;
    j["scale"] = net.scale;
    j["centers"] = net.centers;
    j["coeffs"] = net.coeffs;
    return j.dump();
}

GaussianNetwork network_from_json(const std::string& text) {
    GaussianNetwork net;
    try {
        const json j = json::parse(text);
        net.dim = j.at("dim").get<int>();
        net.scale = j.at("scale").get<double>();
        net.centers = j.at("centers").get<std::vector<std::vector<double>>>();
        net.coeffs = j.at("coeffs").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("network json: ") + e.what());
    }
    net.validate();
    return net;
}

void save_network(const GaussianNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << network_to_json(net) << '\n';
}

GaussianNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return network_from_json(ss.str());
}

SynthesisGrid synthesis_grid(int m, int d) {
    check_synthesis(m, d);
    const auto rule = gauss_hermite_rule(2 * m * m);
    const int size = static_cast<int>(rule.size());
    // lambda_j exp(3 x_j^2 / 4) = lebesgue_weight_j exp(-x_j^2 / 4): no overflow.
    std::vector<double> log_factor(size);
    for (int j = 0; j < size; ++j) {
        const double x = rule.nodes[j];
        log_factor[j] = std::log(rule.lebesgue_weights[j]) - 0.25 * x * x;
    }
    const double log_front = 0.5 * d * std::log(3.0 / (2.0 * std::numbers::pi));
    const double half_root3 = 0.5 * std::sqrt(3.0);

    SynthesisGrid g;
    g.d = d;
    g.m = m;
    const long count = grid_size(m, d);
    g.nodes.reserve(count);
    g.centers.reserve(count);
    g.base.reserve(count);
    std::vector<int> idx(d, 0);
    for (long c = 0; c < count; ++c) {
        std::vector<double> node(d), center(d);
        double log_base = log_front;
        for (int i = 0; i < d; ++i) {
            node[i] = rule.nodes[idx[i]];
            center[i] = half_root3 * node[i];
            log_base += log_factor[idx[i]];
        }
        g.nodes.push_back(std::move(node));
        g.centers.push_back(std::move(center));
        g.base.push_back(std::exp(log_base));
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < size) break;
            idx[i] = 0;
        }
    }
    return g;
}

GaussianNetwork poly_to_gaussian(const WeightedPolyCoeffs& p, int m) {
    const int d = p.d;
    check_synthesis(m, d);
    int kmax = 0;
    for (const auto& [k, b] : p.entries) {
        check_index(k, m, d);
        if (!std::isfinite(b)) throw std::invalid_argument("poly_to_gaussian: non-finite coefficient");
        for (int v : k) kmax = std::max(kmax, v);
    }
    const auto grid = synthesis_grid(m, d);
    const auto rule = gauss_hermite_rule(2 * m * m);

    // psi rows at each one-dimensional node, indexed by node position.
    std::vector<std::vector<double>> rows(rule.size(), std::vector<double>(kmax + 1));
    for (std::size_t j = 0; j < rule.size(); ++j) hermite_row_into(rule.nodes[j], rows[j]);

    std::vector<std::pair<std::vector<int>, double>> terms;
    terms.reserve(p.entries.size());
    for (const auto& [k, b] : p.entries) terms.emplace_back(k, b * std::pow(3.0, 0.5 * l1(k)));

    GaussianNetwork net;
    net.dim = d;
    net.scale = 1.0;
    net.centers = grid.centers;
    net.coeffs.assign(grid.centers.size(), 0.0);
    const int size = static_cast<int>(rule.size());
    std::vector<int> idx(d, 0);
    for (std::size_t c = 0; c < grid.centers.size(); ++c) {
        double s = 0.0;
        for (const auto& [k, w] : terms) {
            double prod = w;
            for (int i = 0; i < d; ++i) prod *= rows[idx[i]][k[i]];
            s += prod;
        }
        net.coeffs[c] = grid.base[c] * s;
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < size) break;
            idx[i] = 0;
        }
    }
    return net;
}

GaussianNetwork gaussian_basis_network(const MultiIndex& k, int m) {
    WeightedPolyCoeffs p;
    p.d = static_cast<int>(k.size());
    p.entries[k] = 1.0;
    return poly_to_gaussian(p, m);
}

WeightedPolyCoeffs prefab_kernel_coeffs(double n, int q, int Q, double alpha) {
    if (!(n >= 1.0 && n <= 8.0)) throw std::invalid_argument("prefab kernel: n must lie in [1, 8]");
    if (Q < 1 || Q > kMaxSynthesisDim || q < 1 || q > Q) {
        throw std::invalid_argument("prefab kernel: need 1 <= q <= Q <= 3");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("prefab kernel: alpha must lie in (0, 1]");
    // Degrees m with H(sqrt(m)/n) != 0 satisfy m < n^2.
    int top = static_cast<int>(std::ceil(n * n)) - 1;
    while (top >= 0 && filter_h(std::sqrt(static_cast<double>(top)) / n) == 0.0) --top;

    const double half_gap = 0.5 * (Q - q);
    const double front = std::pow(std::numbers::pi, half_gap) * std::pow(n, q * (1.0 - alpha));
    // g[s] = sum_l H(sqrt(s + 2l)/n) (-1)^l binom((Q-q)/2, l)
    std::vector<double> g(top + 1, 0.0);
    for (int s = 0; s <= top; s += 2) {
        double acc = 0.0;
        for (int l = 0; s + 2 * l <= top; ++l) {
            const double sign = l % 2 == 0 ? 1.0 : -1.0;
            acc += filter_h(std::sqrt(static_cast<double>(s + 2 * l)) / n) * sign * binom_general(half_gap, l);
        }
        g[s] = front * acc;
    }

    WeightedPolyCoeffs p;
    p.d = Q;
    for (const auto& k : even_indices(Q, top)) {
        double b = g[l1(k)];
        for (int v : k) b *= psi_at_zero(v);
        if (b != 0.0) p.entries[k] = b;
    }
    return p;
}

GaussianNetwork prefab_kernel_network(double n, int q, int Q, double alpha, int m) {
    const auto p = prefab_kernel_coeffs(n, q, Q, alpha);
    if (m == 0) m = static_cast<int>(std::ceil(n));
    auto net = poly_to_gaussian(p, m);
    net.scale = std::pow(n, 1.0 - alpha);
    return net;
}

double shallow_net_estimate(const Dataset& ds, const GaussianNetwork& net, std::span<const double> x) {
    if (ds.samples.empty()) throw std::invalid_argument("shallow net: empty dataset");
    if (net.dim != ds.ambient_dim || x.size() != static_cast<std::size_t>(net.dim)) {
        throw std::invalid_argument("shallow net: dimension mismatch");
    }
    std::vector<double> diff(x.size());
    double s = 0.0;
    for (const auto& sample : ds.samples) {
        for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - sample.point[i];
        s += sample.value * net(diff);
    }
    return s / static_cast<double>(ds.samples.size());
}

double eval_weighted_poly(const WeightedPolyCoeffs& p, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(p.d)) throw std::invalid_argument("weighted poly: dimension mismatch");
    int kmax = 0;
    for (const auto& [k, b] : p.entries) {
        for (int v : k) kmax = std::max(kmax, v);
    }
    std::vector<std::vector<double>> rows(p.d, std::vector<double>(kmax + 1));
    for (int i = 0; i < p.d; ++i) hermite_row_into(x[i], rows[i]);
    double s = 0.0;
    for (const auto& [k, b] : p.entries) {
        double prod = b;
        for (int i = 0; i < p.d; ++i) prod *= rows[i][k[i]];
        s += prod;
    }
    return s;
}

}  // namespace hermnet
