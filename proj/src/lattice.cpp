#include "colat/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "colat/error.hpp"

namespace colat {

namespace {

// Reserved words that would collide with coalition labels or CSV headers.
const std::set<std::string, std::less<>> kReservedNames = {"Bare", "All-In", "value",
                                                           "task", ""};

bool valid_name_chars(std::string_view name) {
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

Universe::Universe(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() > max_size) {
        throw Error("UniverseTooLarge", "universe has " + std::to_string(names_.size()) +
                                            " components; max is " +
                                            std::to_string(max_size));
    }
    std::set<std::string_view> seen;
    for (const auto& n : names_) {
        if (kReservedNames.count(n) || !valid_name_chars(n)) {
            throw Error("InvalidComponentName", "component name '" + n + "' is reserved or "
                                                "contains characters outside [A-Za-z0-9_-]");
        }
        if (!seen.insert(n).second) {
            throw Error("DuplicateComponent", "component '" + n + "' listed twice");
        }
    }
}

std::optional<std::size_t> Universe::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Universe::require_index(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx) throw Error("UnknownComponent", "no component named '" + std::string(name) + "'");
    return *idx;
}

ComponentSet::ComponentSet(Universe universe, Mask mask)
    : universe_(std::move(universe)), mask_(mask) {
    if (mask & ~universe_.full_mask()) {
        throw Error("InvalidArgument", "mask has bits set beyond the universe size");
    }
}

std::size_t ComponentSet::size() const { return std::popcount(mask_); }

ComponentSet ComponentSet::with(std::size_t i) const {
    return ComponentSet(universe_, mask_ | (Mask{1} << i));
}

ComponentSet ComponentSet::without(std::size_t i) const {
    return ComponentSet(universe_, mask_ & ~(Mask{1} << i));
}

std::vector<std::string> ComponentSet::names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < universe_.size(); ++i) {
        if (contains(i)) out.push_back(universe_.name(i));
    }
    return out;
}

std::string ComponentSet::label() const { return format_component_set(universe_, mask_); }

ComponentSet parse_component_set(std::string_view expr, const Universe& universe) {
    if (expr.empty() || expr == "Bare") return ComponentSet(universe, 0);
    if (expr == "All-In") return ComponentSet(universe, universe.full_mask());

    Mask mask = 0;
    std::size_t start = 0;
    while (true) {
        std::size_t plus = expr.find('+', start);
        std::string_view part = expr.substr(
            start, plus == std::string_view::npos ? std::string_view::npos : plus - start);
        std::size_t idx = universe.require_index(part);
        Mask bit = Mask{1} << idx;
        if (mask & bit) {
            throw Error("DuplicateComponent",
                        "component '" + std::string(part) + "' appears twice in '" +
                            std::string(expr) + "'");
        }
        mask |= bit;
        if (plus == std::string_view::npos) break;
        start = plus + 1;
    }
    return ComponentSet(universe, mask);
}

std::string format_component_set(const Universe& universe, Mask mask) {
    if (mask == 0) return "Bare";
    if (universe.size() > 0 && mask == universe.full_mask()) return "All-In";
    std::string out;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if ((mask >> i) & 1u) {
            if (!out.empty()) out += '+';
            out += universe.name(i);
        }
    }
    return out;
}

CoalitionTable::CoalitionTable(Universe universe)
    : universe_(std::move(universe)),
      values_(universe_.num_coalitions(), 0.0),
      present_(universe_.num_coalitions(), false) {}

void CoalitionTable::set(Mask mask, double value) {
    if (mask >= num_coalitions()) {
        throw Error("InvalidArgument", "coalition mask out of range");
    }
    if (!std::isfinite(value)) {
        throw Error("NonFiniteValue",
                    "value for " + format_component_set(universe_, mask) + " is not finite");
    }
    if (!present_[mask]) {
        present_[mask] = true;
        ++num_present_;
    }
    values_[mask] = value;
}

bool CoalitionTable::has(Mask mask) const {
    return mask < num_coalitions() && present_[mask];
}

double CoalitionTable::value(Mask mask) const {
    if (!has(mask)) {
        throw Error("MissingCoalition",
                    "coalition " + format_component_set(universe_, mask) + " is not in the table");
    }
    return values_[mask];
}

void CoalitionTable::require_complete() const {
    if (!complete()) {
        throw Error("IncompleteTable", "table holds " + std::to_string(num_present_) + " of " +
                                           std::to_string(num_coalitions()) +
                                           " coalitions");
    }
}

const std::vector<double>& CoalitionTable::dense_values() const { return values_; }

std::vector<Mask> CoalitionTable::present_masks() const {
    std::vector<Mask> out;
    out.reserve(num_present_);
    for (std::size_t m = 0; m < present_.size(); ++m) {
        if (present_[m]) out.push_back(static_cast<Mask>(m));
    }
    return out;
}

double marginal(const CoalitionTable& table, const ComponentSet& coalition,
                std::size_t component) {
    if (!(coalition.universe() == table.universe())) {
        throw Error("UniverseMismatch", "coalition and table use different universes");
    }
    if (component >= table.num_components()) {
        throw Error("UnknownComponent", "component index out of range");
    }
    if (coalition.contains(component)) {
        throw Error("MemberAlreadyPresent",
                    "component '" + table.universe().name(component) + "' is already in " +
                        coalition.label());
    }
    Mask with = coalition.mask() | (Mask{1} << component);
    return table.value(with) - table.value(coalition.mask());
}

double marginal(const CoalitionTable& table, const ComponentSet& coalition,
                std::string_view component) {
    return marginal(table, coalition, table.universe().require_index(component));
}

HarsanyiSpectrum mobius_transform(const CoalitionTable& table) {
    table.require_complete();
    std::vector<double> g = table.dense_values();
    std::size_t k = table.num_components();
    for (std::size_t i = 0; i < k; ++i) {
        Mask bit = Mask{1} << i;
        for (Mask m = 0; m < g.size(); ++m) {
            if (m & bit) g[m] -= g[m ^ bit];
        }
    }
    return HarsanyiSpectrum{table.universe(), std::move(g)};
}

CoalitionTable HarsanyiSpectrum::reconstruct() const {
    std::vector<double> f = dividends;
    std::size_t k = universe.size();
    for (std::size_t i = 0; i < k; ++i) {
        Mask bit = Mask{1} << i;
        for (Mask m = 0; m < f.size(); ++m) {
            if (m & bit) f[m] += f[m ^ bit];
        }
    }
    CoalitionTable table(universe);
    for (Mask m = 0; m < f.size(); ++m) table.set(m, f[m]);
    return table;
}

double harsanyi_dividend(const CoalitionTable& table, Mask mask) {
    if (mask >= table.num_coalitions()) {
        throw Error("InvalidArgument", "coalition mask out of range");
    }
    int order = std::popcount(mask);
    double sum = 0.0;
    // Ascending submask walk: w = (w - mask) & mask visits every W subset of mask.
    Mask w = 0;
    while (true) {
        int sign = ((order - std::popcount(w)) & 1) ? -1 : 1;
        sum += sign * table.value(w);
        if (w == mask) break;
        w = (w - mask) & mask;
    }
    return sum;
}

std::vector<double> shapley_weighted_marginals(const CoalitionTable& table) {
    table.require_complete();
    std::size_t k = table.num_components();
    const auto& f = table.dense_values();
    std::vector<double> phi(k, 0.0);
    if (k == 0) return phi;

    // weight(|S|) = 1 / (k * C(k-1, |S|)); C fits a double exactly for k <= 20.
    std::vector<double> weight(k);
    for (std::size_t s = 0; s < k; ++s) {
        double binom = 1.0;
        for (std::size_t j = 0; j < s; ++j) {
            binom = binom * static_cast<double>(k - 1 - j) / static_cast<double>(j + 1);
        }
        weight[s] = 1.0 / (static_cast<double>(k) * binom);
    }

    for (std::size_t i = 0; i < k; ++i) {
        Mask bit = Mask{1} << i;
        for (Mask s = 0; s < f.size(); ++s) {
            if (s & bit) continue;
            phi[i] += weight[std::popcount(s)] * (f[s | bit] - f[s]);
        }
    }
    return phi;
}

ShapleyReport shapley(const CoalitionTable& table) {
    table.require_complete();
    HarsanyiSpectrum spectrum = mobius_transform(table);
    std::size_t k = table.num_components();
    std::vector<double> phi(k, 0.0);
    for (Mask m = 1; m < spectrum.dividends.size(); ++m) {
        double share = spectrum.dividends[m] / std::popcount(m);
        Mask rest = m;
        while (rest) {
            std::size_t i = std::countr_zero(rest);
            phi[i] += share;
            rest &= rest - 1;
        }
    }

    std::vector<double> check = shapley_weighted_marginals(table);
    for (std::size_t i = 0; i < k; ++i) {
        if (std::fabs(phi[i] - check[i]) > 1e-12) {
            throw Error("ShapleyCrossCheckFailed",
                        "dividend and order-averaged Shapley routes disagree",
                        ErrorCategory::numeric);
        }
    }

    double total = 0.0;
    for (double p : phi) total += p;
    double span = k == 0 ? 0.0
                         : table.value(table.universe().full_mask()) - table.value(0);
    return ShapleyReport{table.universe(), std::move(phi), total - span};
}

std::vector<double> abs_mass_share(const ShapleyReport& report) {
    double total = 0.0;
    for (double p : report.phi) total += std::fabs(p);
    if (total == 0.0) {
        throw Error("AllZero", "every Shapley value is zero; shares are undefined");
    }
    std::vector<double> shares(report.phi.size());
    for (std::size_t i = 0; i < shares.size(); ++i) {
        shares[i] = std::fabs(report.phi[i]) / total;
    }
    return shares;
}

TaskMatrix::TaskMatrix(Universe universe, std::vector<Mask> columns)
    : universe_(std::move(universe)), columns_(std::move(columns)) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c] >= universe_.num_coalitions()) {
            throw Error("InvalidArgument", "column mask out of range");
        }
        if (!column_index_.emplace(columns_[c], c).second) {
            throw Error("DuplicateCoalition",
                        "column " + format_component_set(universe_, columns_[c]) +
                            " listed twice");
        }
    }
}

void TaskMatrix::add_task(std::string label, std::vector<double> values) {
    if (values.size() != columns_.size()) {
        throw Error("InvalidArgument", "task row has " + std::to_string(values.size()) +
                                           " values; expected " +
                                           std::to_string(columns_.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error("NonFiniteValue", "task '" + label + "' has a non-finite score");
        }
    }
    tasks_.push_back(std::move(label));
    rows_.push_back(std::move(values));
}

std::optional<std::size_t> TaskMatrix::column_of(Mask mask) const {
    auto it = column_index_.find(mask);
    if (it == column_index_.end()) return std::nullopt;
    return it->second;
}

bool TaskMatrix::covers_full_lattice() const {
    return columns_.size() == universe_.num_coalitions();
}

bool TaskMatrix::covers_sublattice(Mask coalition) const {
    Mask w = 0;
    while (true) {
        if (!column_index_.count(w)) return false;
        if (w == coalition) break;
        w = (w - coalition) & coalition;
    }
    return true;
}

CoalitionTable TaskMatrix::mean_table() const {
    std::vector<std::size_t> all(num_tasks());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return mean_table(all);
}

CoalitionTable TaskMatrix::mean_table(const std::vector<std::size_t>& task_indices) const {
    if (task_indices.empty()) {
        throw Error("TooFewUnits", "mean over zero tasks");
    }
    CoalitionTable table(universe_);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        double sum = 0.0;
        for (std::size_t t : task_indices) sum += rows_[t][c];
        table.set(columns_[c], sum / static_cast<double>(task_indices.size()));
    }
    return table;
}

}  // namespace colat
