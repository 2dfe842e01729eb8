#include "colat/select.hpp"

#include <bit>

#include "colat/error.hpp"

namespace colat {

BestPerK best_per_k(const CoalitionTable& table) {
    table.require_complete();
    std::size_t k = table.num_components();
    const auto& f = table.dense_values();

    BestPerK out;
    out.universe = table.universe();
    out.per_k.resize(k + 1);
    std::vector<bool> seen(k + 1, false);
    for (Mask m = 0; m < f.size(); ++m) {
        auto size = static_cast<std::size_t>(std::popcount(m));
        // Ascending mask scan, strict improvement: ties keep the smaller mask.
        if (!seen[size] || f[m] > out.per_k[size].value) {
            out.per_k[size] = PerKBest{size, m, f[m]};
            seen[size] = true;
        }
    }

    out.k_star = 0;
    out.best_mask = out.per_k[0].mask;
    out.best_value = out.per_k[0].value;
    for (std::size_t size = 1; size <= k; ++size) {
        if (out.per_k[size].value > out.best_value) {  // ties keep the smaller K
            out.k_star = size;
            out.best_mask = out.per_k[size].mask;
            out.best_value = out.per_k[size].value;
        }
    }
    return out;
}

GreedyPath greedy_forward(const CoalitionTable& table, const ComponentSet& start) {
    table.require_complete();
    if (!(start.universe() == table.universe())) {
        throw Error("UniverseMismatch", "start coalition and table use different universes");
    }
    std::size_t k = table.num_components();
    const auto& f = table.dense_values();

    GreedyPath path;
    path.universe = table.universe();
    path.start_mask = start.mask();

    Mask current = start.mask();
    while (true) {
        std::vector<std::pair<std::size_t, double>> marginals;
        std::optional<std::size_t> best;
        double best_gain = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            Mask bit = Mask{1} << i;
            if (current & bit) continue;
            double gain = f[current | bit] - f[current];
            marginals.emplace_back(i, gain);
            if (gain > 0.0 && (!best || gain > best_gain)) {
                best = i;
                best_gain = gain;
            }
        }
        if (!best) {
            path.stop_marginals = std::move(marginals);
            break;
        }
        current |= Mask{1} << *best;
        path.steps.push_back(GreedyStep{*best, best_gain, f[current], std::move(marginals)});
    }
    path.final_mask = current;
    path.final_value = f[current];
    return path;
}

SelectionReport compare_strategies(const CoalitionTable& table) {
    SelectionReport report;
    report.universe = table.universe();
    report.exhaustive = best_per_k(table);
    report.greedy = greedy_forward(table, ComponentSet(table.universe(), 0));
    report.optimality_gap = report.exhaustive.best_value - report.greedy.final_value;
    if (report.optimality_gap > 0.0 && report.greedy.final_value > 0.0) {
        report.improvement_percent = 100.0 * report.optimality_gap / report.greedy.final_value;
    } else if (report.optimality_gap == 0.0) {
        report.improvement_percent = 0.0;
    }
    return report;
}

}  // namespace colat
