#pragma once

// Subset-selection strategies over complete coalition tables: exhaustive
// per-size optima, the optimal component count k*, greedy forward selection,
// and a combined strategy-comparison report.
//
// Tie-breaks are deterministic and named in every report: equal values
// resolve to the smaller coalition size first, then the smaller canonical
// mask; greedy ties among equally best positive marginals take the smallest
// component index.

#include <optional>
#include <string>
#include <vector>

#include "colat/lattice.hpp"

namespace colat {

inline constexpr const char* kTieBreakRule = "smallest K, then canonical mask order";

struct PerKBest {
    std::size_t k;
    Mask mask;
    double value;
};

struct BestPerK {
    Universe universe;
    std::vector<PerKBest> per_k;  // K = 0..k
    std::size_t k_star;           // size of the global maximum under the tie-break
    Mask best_mask;
    double best_value;
};

BestPerK best_per_k(const CoalitionTable& table);

struct GreedyStep {
    std::size_t component;                                   // chosen addition
    double marginal;                                         // its gain
    double value_after;                                      // f after adding
    std::vector<std::pair<std::size_t, double>> marginals;   // all candidates this step
};

struct GreedyPath {
    Universe universe;
    Mask start_mask;
    std::vector<GreedyStep> steps;
    // Marginals of the remaining components at the stopping point (empty when
    // the full set was reached).
    std::vector<std::pair<std::size_t, double>> stop_marginals;
    Mask final_mask;
    double final_value;
};

// Repeatedly adds the component with the largest strictly positive marginal;
// stops when none remains.
GreedyPath greedy_forward(const CoalitionTable& table, const ComponentSet& start);

struct SelectionReport {
    Universe universe;
    BestPerK exhaustive;
    GreedyPath greedy;  // from the empty set
    double optimality_gap;  // best overall - greedy final (>= 0)
    std::optional<double> improvement_percent;  // gap / greedy value, when positive
    std::string tie_break_rule = kTieBreakRule;
};

SelectionReport compare_strategies(const CoalitionTable& table);

}  // namespace colat
