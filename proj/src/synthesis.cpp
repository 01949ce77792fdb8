// Synthetic numeral grammars: shortest-derivation DP over digit/base/
// suppletive genomes, single-edit mutation, Pareto hill-climbing and
// frontier extraction.

#include "numpar/synthesis.hpp"

#include <algorithm>
#include <optional>
#include <utility>

#include "numpar/errors.hpp"
#include "numpar/metrics.hpp"
#include "numpar/parallel.hpp"

namespace numpar {

namespace {

ExprPtr make_atom(int value) {
    auto node = std::make_shared<Expression>();
    node->kind = Expression::Kind::Atom;
    node->value = value;
    node->length = 1;
    node->leaves = 1;
    return node;
}

ExprPtr make_mul(ExprPtr multiplier, ExprPtr base_atom) {
    auto node = std::make_shared<Expression>();
    node->kind = Expression::Kind::Mul;
    node->value = multiplier->value * base_atom->value;
    node->length = multiplier->length + base_atom->length + 1;
    node->leaves = multiplier->leaves + base_atom->leaves;
    node->lhs = std::move(multiplier);
    node->rhs = std::move(base_atom);
    return node;
}

ExprPtr make_add(ExprPtr head, ExprPtr rest) {
    auto node = std::make_shared<Expression>();
    node->kind = Expression::Kind::Add;
    node->value = head->value + rest->value;
    node->length = head->length + rest->length + 1;
    node->leaves = head->leaves + rest->leaves;
    node->lhs = std::move(head);
    node->rhs = std::move(rest);
    return node;
}

struct Candidate {
    ExprPtr expr;
    int head_value = 0;  // Add: head value; Atom/Mul: own value
    int base = 0;        // Mul: base; otherwise 0

    bool better_than(const Candidate& other) const {
        if (expr->length != other.expr->length) return expr->length < other.expr->length;
        if (expr->leaves != other.expr->leaves) return expr->leaves < other.expr->leaves;
        if (head_value != other.head_value) return head_value < other.head_value;
        return base < other.base;
    }
};

void consider(std::optional<Candidate>& best, Candidate candidate) {
    if (!best || candidate.better_than(*best)) best = std::move(candidate);
}

}  // namespace

long long Expression::eval() const {
    switch (kind) {
        case Kind::Atom: return value;
        case Kind::Add: return lhs->eval() + rhs->eval();
        case Kind::Mul: return lhs->eval() * rhs->eval();
    }
    return value;
}

std::string Expression::to_string() const {
    switch (kind) {
        case Kind::Atom: return std::to_string(value);
        case Kind::Add: return "(" + lhs->to_string() + "+" + rhs->to_string() + ")";
        case Kind::Mul: return "(" + lhs->to_string() + "*" + rhs->to_string() + ")";
    }
    return std::to_string(value);
}

ExpressionTable::ExpressionTable(const SyntheticSystem& system) {
    // Any atom denotes itself as a Number, but only base and suppletive
    // atoms (or Mul phrases) may head an addition; a remove-base edit can
    // therefore strand values even when small digits remain.
    std::set<int> atoms = system.digits;
    atoms.insert(system.suppletives.begin(), system.suppletives.end());
    atoms.insert(system.bases.begin(), system.bases.end());
    std::set<int> head_atoms = system.bases;
    head_atoms.insert(system.suppletives.begin(), system.suppletives.end());

    for (int n = kMinCardinality; n <= kMaxCardinality; ++n) {
        // Head category: a head atom is unbeatable at length 1.
        std::optional<Candidate> head;
        if (head_atoms.count(n)) {
            head = Candidate{make_atom(n), n, 0};
        } else {
            for (int b : system.bases) {
                if (b > n || n % b != 0) continue;
                const int m = n / b;
                if (m < 2 || !best_[static_cast<std::size_t>(m)]) continue;
                consider(head, Candidate{make_mul(best_[static_cast<std::size_t>(m)], make_atom(b)),
                                         n, b});
            }
        }
        if (head) head_[static_cast<std::size_t>(n)] = head->expr;

        // Number category: plain atom, head phrase, or Add(head(h), best(n-h)).
        std::optional<Candidate> number = head;
        if (atoms.count(n)) consider(number, Candidate{make_atom(n), n, 0});
        for (int h = 1; h < n; ++h) {
            const ExprPtr& head_expr = head_[static_cast<std::size_t>(h)];
            const ExprPtr& rest = best_[static_cast<std::size_t>(n - h)];
            if (!head_expr || !rest) continue;
            consider(number, Candidate{make_add(head_expr, rest), h, 0});
        }
        if (number) best_[static_cast<std::size_t>(n)] = number->expr;
    }
}

ExprPtr ExpressionTable::best(int n) const {
    if (n < kMinCardinality || n > kMaxCardinality) {
        throw InvalidArgument("value out of range 1..99: " + std::to_string(n));
    }
    return best_[static_cast<std::size_t>(n)];
}

int ExpressionTable::length(int n) const {
    const ExprPtr expr = best(n);
    if (!expr) throw Inexpressible(n);
    return expr->length;
}

bool ExpressionTable::all_expressible() const {
    for (int n = kMinCardinality; n <= kMaxCardinality; ++n) {
        if (!best_[static_cast<std::size_t>(n)]) return false;
    }
    return true;
}

ExprPtr express(int n, const SyntheticSystem& system) {
    const ExpressionTable table(system);
    const ExprPtr expr = table.best(n);
    if (!expr) throw Inexpressible(n);
    return expr;
}

bool valid_shape(const SyntheticSystem& system) {
    auto in_range = [](const std::set<int>& values, int lo, int hi) {
        return std::all_of(values.begin(), values.end(),
                           [lo, hi](int v) { return v >= lo && v <= hi; });
    };
    return in_range(system.digits, 1, kMaxCardinality) &&
           in_range(system.bases, 2, kMaxCardinality) &&
           in_range(system.suppletives, 1, kMaxCardinality);
}

bool within_caps(const SyntheticSystem& system, int max_atoms) {
    const auto cap = static_cast<std::size_t>(max_atoms);
    return system.digits.size() <= cap && system.bases.size() <= cap &&
           system.suppletives.size() <= cap;
}

bool is_valid(const SyntheticSystem& system, int max_atoms) {
    if (!valid_shape(system) || !within_caps(system, max_atoms)) return false;
    return ExpressionTable(system).all_expressible();
}

namespace {

MetricPoint metrics_from_table(const SyntheticSystem& system, const ExpressionTable& table,
                               const std::string& id) {
    std::vector<int> lengths(kMaxCardinality, 0);
    for (int n = kMinCardinality; n <= kMaxCardinality; ++n) {
        lengths[static_cast<std::size_t>(n - 1)] = table.length(n);
    }
    std::set<int> atoms = system.digits;
    atoms.insert(system.bases.begin(), system.bases.end());
    atoms.insert(system.suppletives.begin(), system.suppletives.end());

    MetricPoint point;
    point.system_id = id;
    point.scheme = Scheme::Synthetic;
    point.lexicon_size = static_cast<int>(atoms.size());
    point.complexity = weighted_mean_length(lengths);
    return point;
}

// Mutation plus the metrics of the outcome, computing the DP table once.
// Returns the original system (and its metrics) when the edit is infeasible.
std::pair<SyntheticSystem, MetricPoint> propose(const SyntheticSystem& system,
                                                const MetricPoint& current, Rng& rng,
                                                int max_atoms) {
    enum Edit { AddDigit, RemoveDigit, AddBase, RemoveBase, AddSuppletive, RemoveSuppletive };
    const Edit edit = static_cast<Edit>(rng.uniform_int(0, 5));

    std::vector<int> feasible;
    const auto complement = [&feasible](const std::set<int>& present, int lo) {
        for (int v = lo; v <= kMaxCardinality; ++v) {
            if (!present.count(v)) feasible.push_back(v);
        }
    };
    switch (edit) {
        case AddDigit: complement(system.digits, 1); break;
        case RemoveDigit: feasible.assign(system.digits.begin(), system.digits.end()); break;
        case AddBase: complement(system.bases, 2); break;
        case RemoveBase: feasible.assign(system.bases.begin(), system.bases.end()); break;
        case AddSuppletive: complement(system.suppletives, 1); break;
        case RemoveSuppletive:
            feasible.assign(system.suppletives.begin(), system.suppletives.end());
            break;
    }
    if (feasible.empty()) return {system, current};

    const int element = rng.choice(feasible);
    SyntheticSystem mutated = system;
    switch (edit) {
        case AddDigit: mutated.digits.insert(element); break;
        case RemoveDigit: mutated.digits.erase(element); break;
        case AddBase: mutated.bases.insert(element); break;
        case RemoveBase: mutated.bases.erase(element); break;
        case AddSuppletive: mutated.suppletives.insert(element); break;
        case RemoveSuppletive: mutated.suppletives.erase(element); break;
    }
    if (!valid_shape(mutated) || !within_caps(mutated, max_atoms)) return {system, current};

    const ExpressionTable table(mutated);
    if (!table.all_expressible()) return {system, current};
    MetricPoint metrics = metrics_from_table(mutated, table, current.system_id);
    return {std::move(mutated), std::move(metrics)};
}

SyntheticSystem sample_initial(Rng& rng, int max_atoms) {
    for (;;) {
        SyntheticSystem system;
        const int base_count = rng.uniform_int(1, 3);
        while (static_cast<int>(system.bases.size()) < base_count) {
            system.bases.insert(rng.uniform_int(2, 20));
        }
        const int smallest_base = *system.bases.begin();
        for (int d = 1; d < smallest_base; ++d) system.digits.insert(d);
        for (int n = kMinCardinality; n <= kMaxCardinality; ++n) {
            if (rng.bernoulli(0.05)) system.suppletives.insert(n);
        }
        if (is_valid(system, max_atoms)) return system;
    }
}

std::string synthetic_id(int index) {
    std::string digits = std::to_string(index);
    while (digits.size() < 3) digits.insert(digits.begin(), '0');
    return "synthetic_" + digits;
}

}  // namespace

MetricPoint system_metrics(const SyntheticSystem& system, const std::string& id) {
    if (!valid_shape(system)) throw InvalidArgument("system violates shape constraints");
    return metrics_from_table(system, ExpressionTable(system), id);
}

SyntheticSystem mutate(const SyntheticSystem& system, Rng& rng, int max_atoms) {
    if (!is_valid(system, max_atoms)) throw InvalidArgument("mutate expects a valid system");
    const MetricPoint current = system_metrics(system);
    return propose(system, current, rng, max_atoms).first;
}

EvolveRun evolve(const EvolveConfig& config) {
    if (config.population_size < 1) throw InvalidArgument("population_size must be >= 1");
    if (config.generations < 0) throw InvalidArgument("generations must be >= 0");

    EvolveRun run;
    run.population.resize(static_cast<std::size_t>(config.population_size));
    run.trajectories.resize(static_cast<std::size_t>(config.population_size));

    parallel_for(static_cast<std::size_t>(config.population_size), config.threads,
                 [&run, &config](std::size_t i) {
        Rng rng = Rng::substream(config.seed, i);
        SyntheticSystem system = sample_initial(rng, config.max_atoms);
        MetricPoint metrics =
            metrics_from_table(system, ExpressionTable(system), synthetic_id(static_cast<int>(i)));

        auto& trajectory = run.trajectories[i];
        trajectory.reserve(static_cast<std::size_t>(config.generations) + 1);
        trajectory.push_back(metrics);

        for (int g = 0; g < config.generations; ++g) {
            auto [candidate, cand_metrics] = propose(system, metrics, rng, config.max_atoms);
            const bool no_worse = cand_metrics.lexicon_size <= metrics.lexicon_size &&
                                  cand_metrics.complexity <= metrics.complexity;
            const bool improves = cand_metrics.lexicon_size < metrics.lexicon_size ||
                                  cand_metrics.complexity < metrics.complexity;
            if (no_worse && improves) {
                system = std::move(candidate);
                metrics = cand_metrics;
            }
            trajectory.push_back(metrics);
        }
        run.population[i] = std::move(system);
    });
    return run;
}

ParetoFront pareto_front(std::vector<MetricPoint> points) {
    if (points.empty()) throw EmptyInput("pareto_front: no points");
    std::sort(points.begin(), points.end(), [](const MetricPoint& a, const MetricPoint& b) {
        if (a.lexicon_size != b.lexicon_size) return a.lexicon_size < b.lexicon_size;
        if (a.complexity != b.complexity) return a.complexity < b.complexity;
        return a.system_id < b.system_id;
    });

    ParetoFront front;
    for (const MetricPoint& point : points) {
        if (!front.points.empty()) {
            if (point.lexicon_size == front.points.back().lexicon_size) continue;
            if (point.complexity >= front.points.back().complexity) continue;
        }
        front.points.push_back(point);
    }
    return front;
}

}  // namespace numpar
