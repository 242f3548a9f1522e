#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hermnet/estimator.hpp"

namespace hermnet {

using Constituent = std::function<double(std::span<const double>)>;

/// A pooling map sending a node's concatenated inputs into the domain of its
/// constituent, with the declared constant c(v) of the contract
///   |pool(a) - pool(b)| <= c(v) * sum_k |a_k - b_k|.
struct Pooling {
    enum class Kind { Identity, Box, Sphere };
    Kind kind = Kind::Identity;
    std::vector<double> lower;  ///< Box only, one entry per coordinate
    std::vector<double> upper;
    double radius = 1.0;        ///< Sphere only
    double constant = 1.0;      ///< declared c(v)

    /// Sphere: x -> radius * x / |x|; the origin maps to radius * e_1.
    /// Radial projection is 1-Lipschitz only outside the ball of that radius,
    /// so the declared constant is a claim about the inputs actually seen.
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
    [[nodiscard]] std::string name() const;
};

Pooling identity_pooling();
Pooling box_pooling(std::vector<double> lower, std::vector<double> upper);
Pooling sphere_pooling(double radius, double constant = 1.0);

struct DagNode {
    enum class Kind { Source, Internal };
    std::string id;
    Kind kind = Kind::Source;
    int in_dim = 1;
    std::vector<std::string> children;  ///< ordered; duplicates allowed
    Pooling pooling;
    std::optional<double> lipschitz;    ///< of the true constituent f_v
    std::string function;               ///< optional built-in constituent name
};

/// Validated DAG: ids unique, children exist, no cycles, one sink, internal
/// in_dim equal to the number of children.
class Dag {
public:
    Dag(std::vector<DagNode> nodes, std::string sink);

    [[nodiscard]] const DagNode& node(const std::string& id) const;
    [[nodiscard]] const std::vector<DagNode>& nodes() const { return nodes_; }
    [[nodiscard]] const std::string& sink() const { return sink_; }
    /// Node ids, children before parents.
    [[nodiscard]] const std::vector<std::string>& topological_order() const { return order_; }
    /// 0 for sources, otherwise 1 + the largest child level.
    [[nodiscard]] const std::map<std::string, int>& levels() const { return levels_; }
    [[nodiscard]] std::vector<std::string> sources() const;

private:
    std::vector<DagNode> nodes_;
    std::map<std::string, std::size_t> index_;
    std::string sink_;
    std::vector<std::string> order_;
    std::map<std::string, int> levels_;
};

/// {nodes: [{id, kind, in_dim, children, pooling: {name, ...}, lipschitz, function}], sink}
Dag dag_from_json(const std::string& text);
Dag load_dag(const std::string& path);

using ConstituentSet = std::map<std::string, Constituent>;
using SourceInputs = std::map<std::string, std::vector<double>>;

/// Memoized bottom-up evaluation. Each node's input is the ordered
/// concatenation of its children's outputs (the raw input for sources),
/// passed through its pooling map. `order` may override the topological
/// order; it must be a valid one.
double eval_gfunction(const Dag& dag, const ConstituentSet& constituents, const SourceInputs& inputs,
                      const std::vector<std::string>* order = nullptr);

/// Per-node values of one evaluation, keyed by id.
std::map<std::string, double> eval_all(const Dag& dag, const ConstituentSet& constituents,
                                       const SourceInputs& inputs,
                                       const std::vector<std::string>* order = nullptr);

/// Built-in constituents for DAG files: sum, mean, product, identity, norm,
/// sin-sum, cos-sum, square-sum.
Constituent builtin_constituent(const std::string& name);
ConstituentSet builtin_constituents(const Dag& dag);

struct PropagationReport {
    double measured_gap = 0.0;                ///< max over probes at the sink
    double predicted_bound = 0.0;             ///< recursion bound at the sink
    std::map<std::string, double> node_eps;   ///< eps_v used in the recursion
    std::map<std::string, double> node_bound;
};

/// Measures max_probe |f_sink - g_sink| and the bound
///   bound(v) = c(v) L_v sum_{children u} bound(u) + eps_v,  bound(source) = eps_v.
/// eps_v is `declared_eps` when given (it must hold everywhere), otherwise the
/// largest |f_v - g_v| over the inputs v sees along both evaluation paths.
/// Throws std::invalid_argument when an internal node lacks a Lipschitz bound.
PropagationReport propagation_gap(const Dag& dag, const ConstituentSet& f, const ConstituentSet& g,
                                  const std::vector<SourceInputs>& probes,
                                  std::optional<double> declared_eps = std::nullopt);

/// Largest sampled difference quotient of `fn` over `pairs` random pairs in
/// the box [lower, upper]. An estimate, never a guarantee.
double estimate_lipschitz(const Constituent& fn, std::span<const double> lower, std::span<const double> upper,
                          int pairs, std::uint64_t seed);

struct PoolingCheck {
    double worst_ratio = 0.0;  ///< max |pool(a)-pool(b)| / sum |a_k-b_k|
    bool holds = true;         ///< worst_ratio <= declared constant (with rounding slack)
};

/// Checks the pooling contract on the given input pairs.
PoolingCheck check_pooling_contract(const Pooling& pool, const std::vector<std::vector<double>>& a,
                                    const std::vector<std::vector<double>>& b);

struct NodeTraining {
    Dataset data;
    double n = 8.0;
    double alpha = 1.0;
    double volume = 1.0;
};

/// Replaces every node's constituent by a kernel estimator built from its
/// dataset. Every node needs a dataset.
ConstituentSet build_deep_approx(const Dag& dag, const std::map<std::string, NodeTraining>& training);

}  // namespace hermnet
