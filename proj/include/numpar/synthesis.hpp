#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "numpar/rng.hpp"
#include "numpar/types.hpp"

namespace numpar {

// Each of the three atom categories is independently capped at 98.
inline constexpr int kDefaultAtomCap = 98;

// Genome of a hypothetical numeral grammar.
struct SyntheticSystem {
    std::set<int> digits;       // subset of 1..99
    std::set<int> bases;        // subset of 2..99
    std::set<int> suppletives;  // subset of 1..99

    bool operator==(const SyntheticSystem&) const = default;
};

// Derivation tree. Atoms are morphemes; every Add/Mul node is one covert
// operator, so length = leaves + internal nodes.
struct Expression {
    enum class Kind { Atom, Add, Mul };

    Kind kind = Kind::Atom;
    int value = 0;
    int length = 1;
    int leaves = 1;
    std::shared_ptr<const Expression> lhs;  // Add: head; Mul: multiplier
    std::shared_ptr<const Expression> rhs;  // Add: remainder; Mul: base atom

    long long eval() const;       // recomputes the denoted value from the tree
    std::string to_string() const;
};

using ExprPtr = std::shared_ptr<const Expression>;

// Shortest-derivation table over 1..99 for one system. Productions:
//   Number -> Atom(d), d in digits|suppletives|bases
//          |  Mul(Number m, Atom b), b in bases, m >= 2, m*b <= 99
//          |  Add(head, Number r), head a Mul or Atom, r >= 1
// Ties broken by fewer leaves, then smallest head value, then smallest base.
class ExpressionTable {
public:
    explicit ExpressionTable(const SyntheticSystem& system);

    bool expressible(int n) const { return best(n) != nullptr; }
    ExprPtr best(int n) const;
    int length(int n) const;  // throws Inexpressible
    bool all_expressible() const;

private:
    std::array<ExprPtr, kMaxCardinality + 1> best_{};
    std::array<ExprPtr, kMaxCardinality + 1> head_{};
};

// Minimal-length expression for n; throws Inexpressible.
ExprPtr express(int n, const SyntheticSystem& system);

// Range checks only (digits/suppletives in 1..99, bases in 2..99).
bool valid_shape(const SyntheticSystem& system);

// Per-category atom caps; enforced for mutation/evolution, not evaluation.
bool within_caps(const SyntheticSystem& system, int max_atoms = kDefaultAtomCap);

// Shape valid, within caps, and every n in 1..99 expressible.
bool is_valid(const SyntheticSystem& system, int max_atoms = kDefaultAtomCap);

// lexicon_size = |digits U bases U suppletives|; complexity over DP lengths.
// Evaluates any shape-valid system, capped or not.
MetricPoint system_metrics(const SyntheticSystem& system, const std::string& id = "synthetic");

// One uniformly chosen edit (add/remove a digit, base or suppletive); edits
// that break validity or a category cap are discarded and the original
// genome returned.
SyntheticSystem mutate(const SyntheticSystem& system, Rng& rng,
                       int max_atoms = kDefaultAtomCap);

struct EvolveConfig {
    int population_size = 100;
    int generations = 300;
    std::uint64_t seed = 0;
    int max_atoms = kDefaultAtomCap;
    int threads = 0;  // 0 = auto
};

struct EvolveRun {
    std::vector<SyntheticSystem> population;
    // trajectories[i][g]: metrics of system i after generation g (g=0 is the
    // initial state); componentwise non-increasing by the acceptance rule.
    std::vector<std::vector<MetricPoint>> trajectories;
};

// Hill-climbs population_size systems independently for `generations`
// single-mutation steps, accepting only weakly dominating moves. Results are
// a pure function of (seed, population_size, generations, max_atoms).
EvolveRun evolve(const EvolveConfig& config);

struct ParetoFront {
    std::vector<MetricPoint> points;  // lexicon_size strictly increasing,
                                      // complexity strictly decreasing
};

// Maximal nondominated subset under (min lexicon_size, min complexity);
// duplicates collapse. Throws EmptyInput.
ParetoFront pareto_front(std::vector<MetricPoint> points);

}  // namespace numpar
