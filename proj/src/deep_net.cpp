#include "hermnet/deep_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hermnet/rng.hpp"

namespace hermnet {

namespace {

using json = nlohmann::json;

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

Pooling pooling_from_json(const json& j) {
    const auto name = j.at("name").get<std::string>();
    Pooling p;
    if (name == "identity") {
        p = identity_pooling();
    } else if (name == "box") {
        p = box_pooling(j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>());
    } else if (name == "sphere") {
        p = sphere_pooling(j.value("radius", 1.0));
    } else {
        throw std::invalid_argument("unknown pooling '" + name + "'");
    }
    if (j.contains("c")) p.constant = j.at("c").get<double>();
    if (!(p.constant > 0.0)) throw std::invalid_argument("pooling constant must be positive");
    return p;
}

std::vector<double> node_input(const DagNode& node, const std::map<std::string, double>& values,
                               const SourceInputs& inputs) {
    std::vector<double> raw;
    if (node.kind == DagNode::Kind::Source) {
        auto it = inputs.find(node.id);
        if (it == inputs.end()) throw std::invalid_argument("missing input for source '" + node.id + "'");
        raw = it->second;
        if (raw.size() != static_cast<std::size_t>(node.in_dim)) {
            throw std::invalid_argument("input for source '" + node.id + "' has dimension " +
                                        std::to_string(raw.size()) + ", expected " + std::to_string(node.in_dim));
        }
    } else {
        raw.reserve(node.children.size());
        for (const auto& c : node.children) raw.push_back(values.at(c));
    }
    return node.pooling.apply(raw);
}

const Constituent& lookup(const ConstituentSet& set, const std::string& id) {
    auto it = set.find(id);
    if (it == set.end() || !it->second) throw std::invalid_argument("no constituent for node '" + id + "'");
    return it->second;
}

void check_order(const Dag& dag, const std::vector<std::string>& order) {
    if (order.size() != dag.nodes().size()) throw std::invalid_argument("evaluation order must list every node");
    std::set<std::string> seen;
    for (const auto& id : order) {
        for (const auto& c : dag.node(id).children) {
            if (!seen.count(c)) throw std::invalid_argument("evaluation order visits '" + id + "' before a child");
        }
        if (!seen.insert(id).second) throw std::invalid_argument("evaluation order repeats '" + id + "'");
    }
}

}  // namespace

std::vector<double> Pooling::apply(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    switch (kind) {
        case Kind::Identity:
            break;
        case Kind::Box:
            if (lower.size() != x.size()) throw std::invalid_argument("box pooling: dimension mismatch");
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lower[i], upper[i]);
            break;
        case Kind::Sphere: {
            const double r = norm2(x);
            if (r == 0.0) {
                std::fill(out.begin(), out.end(), 0.0);
                out[0] = radius;
            } else {
                for (auto& v : out) v *= radius / r;
            }
            break;
        }
    }
    return out;
}

std::string Pooling::name() const {
    switch (kind) {
        case Kind::Identity: return "identity";
        case Kind::Box: return "box";
        case Kind::Sphere: return "sphere";
    }
    return "";
}

Pooling identity_pooling() { return Pooling{}; }

Pooling box_pooling(std::vector<double> lower, std::vector<double> upper) {
    if (lower.size() != upper.size() || lower.empty()) throw std::invalid_argument("box pooling: bad bounds");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] <= upper[i])) throw std::invalid_argument("box pooling: lower > upper");
    }
    Pooling p;
    p.kind = Pooling::Kind::Box;
    p.lower = std::move(lower);
    p.upper = std::move(upper);
    return p;
}

Pooling sphere_pooling(double radius, double constant) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere pooling: radius must be positive");
    Pooling p;
    p.kind = Pooling::Kind::Sphere;
    p.radius = radius;
    p.constant = constant;
    return p;
}

Dag::Dag(std::vector<DagNode> nodes, std::string sink) : nodes_(std::move(nodes)), sink_(std::move(sink)) {
    if (nodes_.empty()) throw std::invalid_argument("dag: no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i].id, i).second) {
            throw std::invalid_argument("dag: duplicate node id '" + nodes_[i].id + "'");
        }
    }
    std::set<std::string> has_parent;
    for (const auto& n : nodes_) {
        if (n.kind == DagNode::Kind::Source) {
            if (!n.children.empty()) throw std::invalid_argument("dag: source '" + n.id + "' has children");
        } else {
            if (n.children.empty()) throw std::invalid_argument("dag: internal node '" + n.id + "' has no children");
            if (n.in_dim != static_cast<int>(n.children.size())) {
                throw std::invalid_argument("dag: node '" + n.id + "' declares in_dim " + std::to_string(n.in_dim) +
                                            " but has " + std::to_string(n.children.size()) + " children");
            }
        }
        if (n.in_dim < 1) throw std::invalid_argument("dag: node '" + n.id + "' needs in_dim >= 1");
        if (n.pooling.kind == Pooling::Kind::Box && n.pooling.lower.size() != static_cast<std::size_t>(n.in_dim)) {
            throw std::invalid_argument("dag: box pooling of '" + n.id + "' has the wrong dimension");
        }
        for (const auto& c : n.children) {
            if (!index_.count(c)) throw std::invalid_argument("dag: node '" + n.id + "' has unknown child '" + c + "'");
            has_parent.insert(c);
        }
    }
    if (!index_.count(sink_)) throw std::invalid_argument("dag: unknown sink '" + sink_ + "'");
    for (const auto& n : nodes_) {
        if (!has_parent.count(n.id) && n.id != sink_) {
            throw std::invalid_argument("dag: node '" + n.id + "' has no parent and is not the sink");
        }
    }
    if (has_parent.count(sink_)) throw std::invalid_argument("dag: sink '" + sink_ + "' has a parent");

    // Depth-first post-order with an explicit stack; grey nodes mark a cycle.
    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(nodes_.size(), Mark::White);
    for (std::size_t root = 0; root < nodes_.size(); ++root) {
        if (mark[root] != Mark::White) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        mark[root] = Mark::Grey;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            const auto& children = nodes_[v].children;
            if (next < children.size()) {
                const std::size_t c = index_.at(children[next++]);
                if (mark[c] == Mark::Grey) {
                    throw std::invalid_argument("dag: cycle through '" + nodes_[c].id + "'");
                }
                if (mark[c] == Mark::White) {
                    mark[c] = Mark::Grey;
                    stack.emplace_back(c, 0);
                }
            } else {
                mark[v] = Mark::Black;
                order_.push_back(nodes_[v].id);
                stack.pop_back();
            }
        }
    }
    for (const auto& id : order_) {
        const auto& n = node(id);
        int level = 0;
        for (const auto& c : n.children) level = std::max(level, levels_.at(c) + 1);
        levels_[id] = level;
    }
}

const DagNode& Dag::node(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("dag: unknown node '" + id + "'");
    return nodes_[it->second];
}

std::vector<std::string> Dag::sources() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
        if (n.kind == DagNode::Kind::Source) out.push_back(n.id);
    }
    return out;
}

Dag dag_from_json(const std::string& text) {
    std::vector<DagNode> nodes;
    std::string sink;
    try {
        const json j = json::parse(text);
        for (const auto& jn : j.at("nodes")) {
            DagNode n;
            n.id = jn.at("id").get<std::string>();
            const auto kind = jn.at("kind").get<std::string>();
            if (kind == "source") {
                n.kind = DagNode::Kind::Source;
            } else if (kind == "internal") {
                n.kind = DagNode::Kind::Internal;
            } else {
                throw std::invalid_argument("dag: node '" + n.id + "' has unknown kind '" + kind + "'");
            }
            n.children = jn.value("children", std::vector<std::string>{});
            n.in_dim = jn.value("in_dim", static_cast<int>(n.children.size()));
            n.pooling = jn.contains("pooling") ? pooling_from_json(jn.at("pooling")) : identity_pooling();
            if (jn.contains("lipschitz") && !jn.at("lipschitz").is_null()) {
                n.lipschitz = jn.at("lipschitz").get<double>();
                if (!(*n.lipschitz >= 0.0)) throw std::invalid_argument("dag: negative Lipschitz bound");
            }
            n.function = jn.value("function", std::string{});
            nodes.push_back(std::move(n));
        }
        sink = j.at("sink").get<std::string>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("dag json: ") + e.what());
    }
    return Dag(std::move(nodes), std::move(sink));
}

Dag load_dag(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return dag_from_json(ss.str());
}

std::map<std::string, double> eval_all(const Dag& dag, const ConstituentSet& constituents,
                                       const SourceInputs& inputs, const std::vector<std::string>* order) {
    if (order) check_order(dag, *order);
    std::map<std::string, double> values;
    for (const auto& id : order ? *order : dag.topological_order()) {
        const auto& node = dag.node(id);
        const auto z = node_input(node, values, inputs);
        values[id] = lookup(constituents, id)(z);
    }
    return values;
}

double eval_gfunction(const Dag& dag, const ConstituentSet& constituents, const SourceInputs& inputs,
                      const std::vector<std::string>* order) {
    return eval_all(dag, constituents, inputs, order).at(dag.sink());
}

Constituent builtin_constituent(const std::string& name) {
    auto sum = [](std::span<const double> z) {
        double s = 0.0;
        for (double v : z) s += v;
        return s;
    };
    if (name == "sum") return sum;
    if (name == "mean") return [sum](std::span<const double> z) { return sum(z) / static_cast<double>(z.size()); };
    if (name == "identity") return [](std::span<const double> z) { return z[0]; };
    if (name == "norm") return [](std::span<const double> z) { return norm2(z); };
    if (name == "product") {
        return [](std::span<const double> z) {
            double p = 1.0;
            for (double v : z) p *= v;
            return p;
        };
    }
    if (name == "sin-sum") return [sum](std::span<const double> z) { return std::sin(sum(z)); };
    if (name == "cos-sum") return [sum](std::span<const double> z) { return std::cos(sum(z)); };
    if (name == "square-sum") {
        return [](std::span<const double> z) {
            double s = 0.0;
            for (double v : z) s += v * v;
            return s;
        };
    }
    throw std::invalid_argument("unknown constituent '" + name + "'");
}

ConstituentSet builtin_constituents(const Dag& dag) {
    ConstituentSet set;
    for (const auto& n : dag.nodes()) {
        if (n.function.empty()) throw std::invalid_argument("dag: node '" + n.id + "' names no function");
        set[n.id] = builtin_constituent(n.function);
    }
    return set;
}

PropagationReport propagation_gap(const Dag& dag, const ConstituentSet& f, const ConstituentSet& g,
                                  const std::vector<SourceInputs>& probes, std::optional<double> declared_eps) {
    for (const auto& n : dag.nodes()) {
        if (n.kind == DagNode::Kind::Internal && !n.lipschitz) {
            throw std::invalid_argument("propagation bound needs a Lipschitz bound on internal node '" + n.id + "'");
        }
    }
    if (declared_eps && !(*declared_eps >= 0.0)) throw std::invalid_argument("declared eps must be >= 0");

    PropagationReport report;
    for (const auto& n : dag.nodes()) report.node_eps[n.id] = declared_eps.value_or(0.0);
    for (const auto& probe : probes) {
        const auto fv = eval_all(dag, f, probe);
        const auto gv = eval_all(dag, g, probe);
        report.measured_gap = std::max(report.measured_gap, std::abs(fv.at(dag.sink()) - gv.at(dag.sink())));
        if (declared_eps) continue;
        for (const auto& n : dag.nodes()) {
            const auto zf = node_input(n, fv, probe);
            const auto zg = node_input(n, gv, probe);
            const auto& fn = lookup(f, n.id);
            const auto& gn = lookup(g, n.id);
            double& eps = report.node_eps[n.id];
            eps = std::max({eps, std::abs(fn(zf) - gn(zf)), std::abs(fn(zg) - gn(zg))});
        }
    }
    for (const auto& id : dag.topological_order()) {
        const auto& n = dag.node(id);
        double b = report.node_eps.at(id);
        if (n.kind == DagNode::Kind::Internal) {
            double children = 0.0;
            for (const auto& c : n.children) children += report.node_bound.at(c);
            b += n.pooling.constant * *n.lipschitz * children;
        }
        report.node_bound[id] = b;
    }
    report.predicted_bound = report.node_bound.at(dag.sink());
    return report;
}

double estimate_lipschitz(const Constituent& fn, std::span<const double> lower, std::span<const double> upper,
                          int pairs, std::uint64_t seed) {
    if (lower.size() != upper.size() || lower.empty()) throw std::invalid_argument("estimate_lipschitz: bad box");
    Rng rng(seed);
    std::vector<double> a(lower.size()), b(lower.size());
    double best = 0.0;
    for (int p = 0; p < pairs; ++p) {
        double dist = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = rng.uniform(lower[i], upper[i]);
            b[i] = rng.uniform(lower[i], upper[i]);
            dist += (a[i] - b[i]) * (a[i] - b[i]);
        }
        dist = std::sqrt(dist);
        if (dist > 0.0) best = std::max(best, std::abs(fn(a) - fn(b)) / dist);
    }
    return best;
}

PoolingCheck check_pooling_contract(const Pooling& pool, const std::vector<std::vector<double>>& a,
                                    const std::vector<std::vector<double>>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pooling check: pair lists differ in length");
    PoolingCheck check;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double l1 = 0.0;
        for (std::size_t k = 0; k < a[i].size(); ++k) l1 += std::abs(a[i][k] - b[i][k]);
        if (l1 == 0.0) continue;
        const auto pa = pool.apply(a[i]);
        const auto pb = pool.apply(b[i]);
        double d = 0.0;
        for (std::size_t k = 0; k < pa.size(); ++k) d += (pa[k] - pb[k]) * (pa[k] - pb[k]);
        check.worst_ratio = std::max(check.worst_ratio, std::sqrt(d) / l1);
    }
    check.holds = check.worst_ratio <= pool.constant * (1.0 + 1e-12);
    return check;
}

ConstituentSet build_deep_approx(const Dag& dag, const std::map<std::string, NodeTraining>& training) {
    ConstituentSet out;
    for (const auto& n : dag.nodes()) {
        auto it = training.find(n.id);
        if (it == training.end()) throw std::invalid_argument("build_deep_approx: no dataset for node '" + n.id + "'");
        const auto& t = it->second;
        t.data.validate();
        if (t.data.ambient_dim != n.in_dim) {
            throw std::invalid_argument("build_deep_approx: dataset for '" + n.id + "' has the wrong dimension");
        }
        auto data = std::make_shared<const Dataset>(t.data);
        auto cfg = std::make_shared<const EstimatorConfig>(
            make_estimator_config(t.n, t.alpha, t.data.manifold_dim, t.volume));
        out[n.id] = [data, cfg](std::span<const double> z) { return estimate_at(*data, *cfg, z); };
    }
    return out;
}

}  // namespace hermnet
