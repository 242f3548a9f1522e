#pragma once

// Shared builders for the unit tests and the acceptance binary.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hermnet/deep_net.hpp"
#include "hermnet/gaussian_net.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace hermnet;

inline double psi_k(const MultiIndex& k, const std::vector<double>& x) {
    double p = 1.0;
    for (std::size_t i = 0; i < k.size(); ++i) p *= oracle::psi_textbook(k[i], x[i]);
    return p;
}

// Basis networks G_k for every index of P on the shared grid, holding only
// coefficients. errors(z) gives sum_k |b_k| |psi_k(z) - G_k(z)|.
struct BasisBudget {
    SynthesisGrid grid;
    std::vector<std::pair<MultiIndex, double>> terms;
    std::vector<std::vector<double>> coeffs;

    BasisBudget(const WeightedPolyCoeffs& p, int m) : grid(synthesis_grid(m, p.d)) {
        for (const auto& [k, b] : p.entries) {
            terms.emplace_back(k, b);
            auto net = gaussian_basis_network(k, m);
            coeffs.push_back(std::move(net.coeffs));
        }
    }

    double operator()(const std::vector<double>& z) const {
        std::vector<double> g(grid.centers.size());
        for (std::size_t c = 0; c < g.size(); ++c) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) r2 += (z[i] - grid.centers[c][i]) * (z[i] - grid.centers[c][i]);
            g[c] = std::exp(-r2);
        }
        double total = 0.0;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            double net = 0.0;
            for (std::size_t c = 0; c < g.size(); ++c) net += coeffs[t][c] * g[c];
            total += std::abs(terms[t].second) * std::abs(psi_k(terms[t].first, z) - net);
        }
        return total;
    }
};

inline DagNode source(const std::string& id, int dim = 1) {
    DagNode n;
    n.id = id;
    n.kind = DagNode::Kind::Source;
    n.in_dim = dim;
    return n;
}

inline DagNode internal(const std::string& id, std::vector<std::string> children, double lipschitz = 1.0,
                        Pooling pool = identity_pooling()) {
    DagNode n;
    n.id = id;
    n.kind = DagNode::Kind::Internal;
    n.in_dim = static_cast<int>(children.size());
    n.children = std::move(children);
    n.pooling = std::move(pool);
    n.lipschitz = lipschitz;
    return n;
}

inline double l2(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

// f + eps sin(w sum z + phi): sup gap exactly bounded by eps.
inline Constituent perturb(Constituent f, double eps, double w, double phi) {
    return [f = std::move(f), eps, w, phi](std::span<const double> z) {
        double s = 0.0;
        for (double v : z) s += v;
        return f(z) + eps * std::sin(w * s + phi);
    };
}

struct RandomTree {
    std::vector<DagNode> nodes;
    ConstituentSet f;
    std::vector<std::string> sources;
    int counter = 0;
};

// Builds a subtree of the given height; returns its root id. Internal
// constituents are mean (L = 1), sin-sum (L = sqrt(d)) or half the norm
// (L = 1/2), each with its exact Euclidean Lipschitz constant.
inline std::string grow(RandomTree& t, int height, std::mt19937_64& eng) {
    const std::string id = "v" + std::to_string(t.counter++);
    if (height == 0) {
        const int dim = std::uniform_int_distribution<int>(1, 2)(eng);
        t.nodes.push_back(source(id, dim));
        t.f[id] = builtin_constituent("sin-sum");
        t.sources.push_back(id);
        return id;
    }
    const int k = std::uniform_int_distribution<int>(1, 3)(eng);
    std::vector<std::string> children;
    for (int i = 0; i < k; ++i) {
        // At least one child keeps the full height.
        const int h = i == 0 ? height - 1 : std::uniform_int_distribution<int>(0, height - 1)(eng);
        children.push_back(grow(t, h, eng));
    }
    const int kind = std::uniform_int_distribution<int>(0, 2)(eng);
    double lip = 1.0;
    if (kind == 0) {
        t.f[id] = builtin_constituent("mean");
    } else if (kind == 1) {
        t.f[id] = builtin_constituent("sin-sum");
        lip = std::sqrt(static_cast<double>(k));
    } else {
        t.f[id] = [](std::span<const double> z) { return 0.5 * l2(z); };
        lip = 0.5;
    }
    Pooling pool = identity_pooling();
    if (std::uniform_int_distribution<int>(0, 1)(eng) == 1) {
        pool = box_pooling(std::vector<double>(k, -0.8), std::vector<double>(k, 0.8));
    }
    t.nodes.push_back(internal(id, children, lip, pool));
    return id;
}

inline std::vector<SourceInputs> random_probes(const Dag& dag, int count, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<SourceInputs> probes(count);
    for (auto& p : probes) {
        for (const auto& id : dag.sources()) {
            std::vector<double> x(dag.node(id).in_dim);
            for (auto& v : x) v = u(eng);
            p[id] = x;
        }
    }
    return probes;
}

}  // namespace fixture
