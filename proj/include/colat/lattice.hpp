#pragma once

// Coalition lattice core: named binary components, set-function tables over
// all subsets, Moebius/Harsanyi transform, and exact Shapley attribution.
//
// Conventions used throughout the project:
//  - a Universe fixes component names and their canonical (declaration)
//    order; bit i of a coalition mask is component i in that order
//  - coalition labels join active names with '+' in canonical order, with
//    "Bare" for the empty set and "All-In" for the full set

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace colat {

using Mask = std::uint32_t;

class Universe {
public:
    static constexpr std::size_t max_size = 20;  // exact enumeration stays in memory

    Universe() = default;
    explicit Universe(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    Mask full_mask() const { return static_cast<Mask>((1u << names_.size()) - 1u); }
    std::size_t num_coalitions() const { return std::size_t{1} << names_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<std::size_t> index_of(std::string_view name) const;
    // Index lookup that throws UnknownComponent.
    std::size_t require_index(std::string_view name) const;

    bool operator==(const Universe& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
};

class ComponentSet {
public:
    ComponentSet(Universe universe, Mask mask);

    const Universe& universe() const { return universe_; }
    Mask mask() const { return mask_; }
    std::size_t size() const;  // |C|
    bool empty() const { return mask_ == 0; }
    bool contains(std::size_t i) const { return (mask_ >> i) & 1u; }
    ComponentSet with(std::size_t i) const;
    ComponentSet without(std::size_t i) const;
    std::vector<std::string> names() const;  // active names, canonical order
    std::string label() const;

    bool operator==(const ComponentSet& other) const {
        return universe_ == other.universe_ && mask_ == other.mask_;
    }

private:
    Universe universe_;
    Mask mask_;
};

// "Bare"/"" -> empty set, "All-In" -> full set, otherwise '+'-joined
// component names (case-sensitive, no duplicates).
ComponentSet parse_component_set(std::string_view expr, const Universe& universe);
std::string format_component_set(const Universe& universe, Mask mask);

// Scalar value per coalition. May be partially filled; operations that need
// every coalition call require_complete() and reject otherwise.
class CoalitionTable {
public:
    explicit CoalitionTable(Universe universe);

    const Universe& universe() const { return universe_; }
    std::size_t num_components() const { return universe_.size(); }
    std::size_t num_coalitions() const { return universe_.num_coalitions(); }

    void set(Mask mask, double value);  // rejects non-finite values
    bool has(Mask mask) const;
    double value(Mask mask) const;  // throws MissingCoalition
    std::size_t num_present() const { return num_present_; }
    bool complete() const { return num_present_ == num_coalitions(); }
    void require_complete() const;  // throws IncompleteTable(present, required)

    // Dense value vector indexed by mask; only meaningful when complete.
    const std::vector<double>& dense_values() const;

    std::vector<Mask> present_masks() const;  // ascending mask order

    std::map<std::string, std::string>& metadata() { return metadata_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

private:
    Universe universe_;
    std::vector<double> values_;
    std::vector<bool> present_;
    std::size_t num_present_ = 0;
    std::map<std::string, std::string> metadata_;
};

// f(S u {i}) - f(S); requires i not already in S and both coalitions present.
double marginal(const CoalitionTable& table, const ComponentSet& coalition,
                std::size_t component);
double marginal(const CoalitionTable& table, const ComponentSet& coalition,
                std::string_view component);

// All 2^k Moebius coefficients (Harsanyi dividends) of a complete table.
struct HarsanyiSpectrum {
    Universe universe;
    std::vector<double> dividends;  // indexed by mask

    double dividend(Mask mask) const { return dividends[mask]; }
    // Inverse transform; reconstruct().value(m) == source value(m) to ~1e-12.
    CoalitionTable reconstruct() const;
};

HarsanyiSpectrum mobius_transform(const CoalitionTable& table);

// Single dividend via the alternating subset sum; works on partial tables as
// long as every submask of `mask` is present.
double harsanyi_dividend(const CoalitionTable& table, Mask mask);

struct ShapleyReport {
    Universe universe;
    std::vector<double> phi;  // per component, canonical order
    double efficiency_gap;    // sum(phi) - (f(N) - f(empty))
};

// Exact Shapley values. Computed through the dividend decomposition and
// cross-checked against the order-averaged marginal formula; the two routes
// must agree to 1e-12 or a numeric error is raised.
ShapleyReport shapley(const CoalitionTable& table);

// The order-averaged route on its own: phi_i = sum over S not containing i of
// (f(S u {i}) - f(S)) / (k * C(k-1, |S|)).
std::vector<double> shapley_weighted_marginals(const CoalitionTable& table);

// |phi_i| / sum_j |phi_j|; throws AllZero when every phi is exactly zero.
std::vector<double> abs_mass_share(const ShapleyReport& report);

// Per-unit (task or seed) scores over a shared set of coalition columns;
// the resampling substrate for cluster bootstrap and paired tests.
class TaskMatrix {
public:
    TaskMatrix(Universe universe, std::vector<Mask> columns);

    void add_task(std::string label, std::vector<double> values);  // one per column

    const Universe& universe() const { return universe_; }
    std::size_t num_tasks() const { return rows_.size(); }
    std::size_t num_columns() const { return columns_.size(); }
    const std::vector<Mask>& columns() const { return columns_; }
    const std::vector<std::string>& tasks() const { return tasks_; }
    double value(std::size_t task, std::size_t column) const {
        return rows_[task][column];
    }
    std::optional<std::size_t> column_of(Mask mask) const;

    bool covers_full_lattice() const;
    bool covers_sublattice(Mask coalition) const;  // all submasks present

    // Column means over all tasks (or a resampled multiset of task indices),
    // as a coalition table holding exactly the matrix's columns.
    CoalitionTable mean_table() const;
    CoalitionTable mean_table(const std::vector<std::size_t>& task_indices) const;

private:
    Universe universe_;
    std::vector<Mask> columns_;
    std::map<Mask, std::size_t> column_index_;
    std::vector<std::string> tasks_;
    std::vector<std::vector<double>> rows_;
};

}  // namespace colat
