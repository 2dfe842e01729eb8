#include "colat/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "colat/error.hpp"
#include "colat/rng.hpp"

namespace colat {

namespace {

constexpr const char* kReportSchema = "colat-report/1";
constexpr const char* kManifestSchema = "colat-manifest/1";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw Error("ParseError", "line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& token, std::size_t line_no) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        parse_fail(line_no, "'" + token + "' is not a number");
    }
    if (!std::isfinite(v)) {
        throw Error("NonFiniteValue",
                    "line " + std::to_string(line_no) + ": non-finite value '" + token + "'");
    }
    return v;
}

// Splits text into lines (LF or CRLF), 1-based numbering preserved.
std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find('\n', start);
        std::string line = pos == std::string::npos ? text.substr(start)
                                                    : text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    // Drop a trailing empty line from a final newline.
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string fmt_fixed(double v, int places) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, places);
    (void)ec;
    std::string out(buf, ptr);
    // Normalize "-0.000" to "0.000".
    if (out.size() > 1 && out[0] == '-' &&
        out.find_first_not_of("0.", 1) == std::string::npos) {
        out.erase(0, 1);
    }
    return out;
}

CoalitionTable parse_coalition_csv(const std::string& text) {
    std::vector<std::string> lines = lines_of(text);

    std::map<std::string, std::string> metadata;
    std::size_t i = 0;
    for (; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty()) continue;
        if (line[0] != '#') break;
        std::size_t colon = line.find(':');
        if (colon != std::string::npos) {
            std::string key = trim(line.substr(1, colon - 1));
            std::string value = trim(line.substr(colon + 1));
            if (!key.empty()) metadata[key] = value;
        }
    }
    if (i >= lines.size()) parse_fail(1, "missing header row");

    std::size_t header_line = i + 1;
    std::vector<std::string> header = split(lines[i], ',');
    if (header.empty() || header.back() != "value") {
        parse_fail(header_line, "header must end with 'value'");
    }
    header.pop_back();
    Universe universe(header);

    CoalitionTable table(universe);
    table.metadata() = std::move(metadata);
    std::size_t k = universe.size();
    for (++i; i < lines.size(); ++i) {
        std::size_t line_no = i + 1;
        if (lines[i].empty()) continue;
        std::vector<std::string> cells = split(lines[i], ',');
        if (cells.size() != k + 1) {
            parse_fail(line_no, "expected " + std::to_string(k + 1) + " cells, found " +
                                    std::to_string(cells.size()));
        }
        Mask mask = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (cells[c] == "1") mask |= Mask{1} << c;
            else if (cells[c] != "0") parse_fail(line_no, "component cell must be 0 or 1");
        }
        if (table.has(mask)) {
            throw Error("DuplicateCoalition",
                        "line " + std::to_string(line_no) + ": coalition " +
                            format_component_set(universe, mask) + " appears twice");
        }
        double value = parse_double(cells[k], line_no);
        table.set(mask, value);
    }
    return table;
}

CoalitionTable load_coalition_csv(const std::filesystem::path& path) {
    return parse_coalition_csv(read_file(path));
}

std::string coalition_csv_text(const CoalitionTable& table) {
    std::string out;
    for (const auto& [key, value] : table.metadata()) {
        out += "# " + key + ": " + value + "\n";
    }
    const Universe& u = table.universe();
    for (std::size_t i = 0; i < u.size(); ++i) {
        out += u.name(i);
        out += ',';
    }
    out += "value\n";
    for (Mask mask : table.present_masks()) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            out += ((mask >> i) & 1u) ? "1," : "0,";
        }
        out += fmt_double(table.value(mask));
        out += '\n';
    }
    return out;
}

void save_coalition_csv(const CoalitionTable& table, const std::filesystem::path& path) {
    write_file_atomic(path, coalition_csv_text(table));
}

TaskMatrix parse_task_matrix_csv(const std::string& text) {
    std::vector<std::string> lines = lines_of(text);

    std::optional<Universe> universe;
    std::size_t i = 0;
    for (; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty()) continue;
        if (line[0] != '#') break;
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        if (trim(line.substr(1, colon - 1)) == "components") {
            std::string value = trim(line.substr(colon + 1));
            std::vector<std::string> names;
            if (!value.empty()) {
                for (auto& n : split(value, ',')) names.push_back(trim(n));
            }
            universe = Universe(names);
        }
    }
    if (!universe) {
        parse_fail(1, "missing '# components: ...' line naming the universe");
    }
    if (i >= lines.size()) parse_fail(i + 1, "missing header row");

    std::size_t header_line = i + 1;
    std::vector<std::string> header = split(lines[i], ',');
    if (header.empty() || header[0] != "task") {
        parse_fail(header_line, "header must start with 'task'");
    }
    std::vector<Mask> columns;
    for (std::size_t c = 1; c < header.size(); ++c) {
        columns.push_back(parse_component_set(header[c], *universe).mask());
    }
    TaskMatrix matrix(*universe, std::move(columns));

    for (++i; i < lines.size(); ++i) {
        std::size_t line_no = i + 1;
        if (lines[i].empty()) continue;
        std::vector<std::string> cells = split(lines[i], ',');
        if (cells.size() != header.size()) {
            parse_fail(line_no, "expected " + std::to_string(header.size()) +
                                    " cells, found " + std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            row[c - 1] = parse_double(cells[c], line_no);
        }
        matrix.add_task(cells[0], std::move(row));
    }
    return matrix;
}

TaskMatrix load_task_matrix_csv(const std::filesystem::path& path) {
    return parse_task_matrix_csv(read_file(path));
}

std::string task_matrix_csv_text(const TaskMatrix& matrix) {
    const Universe& u = matrix.universe();
    std::string out = "# components: ";
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i) out += ',';
        out += u.name(i);
    }
    out += "\ntask";
    for (Mask mask : matrix.columns()) {
        out += ',';
        out += format_component_set(u, mask);
    }
    out += '\n';
    for (std::size_t t = 0; t < matrix.num_tasks(); ++t) {
        out += matrix.tasks()[t];
        for (std::size_t c = 0; c < matrix.num_columns(); ++c) {
            out += ',';
            out += fmt_double(matrix.value(t, c));
        }
        out += '\n';
    }
    return out;
}

void save_task_matrix_csv(const TaskMatrix& matrix, const std::filesystem::path& path) {
    write_file_atomic(path, task_matrix_csv_text(matrix));
}

std::string audit_triples_csv_text(const SubmodularityAudit& audit_result) {
    const Universe& u = audit_result.universe;
    std::string out =
        "component,subset,superset,gain_subset,gain_superset,gap,violation,sign_flip\n";
    for (const Triple& t : audit_result.triples) {
        out += u.name(t.component);
        out += ',';
        out += format_component_set(u, t.subset_mask);
        out += ',';
        out += format_component_set(u, t.superset_mask);
        out += ',';
        out += fmt_double(t.gain_subset);
        out += ',';
        out += fmt_double(t.gain_superset);
        out += ',';
        out += fmt_double(t.gap);
        out += t.violation ? ",1" : ",0";
        out += t.sign_flip ? ",1\n" : ",0\n";
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("IoError", "cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("IoError", "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error("IoError",
                    "cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
    }
}

Manifest gen_manifest(const Universe& universe, ManifestMode mode,
                      std::span<const ComponentSet> listed, std::size_t orderings,
                      std::uint64_t seed, std::vector<std::uint64_t> run_seeds,
                      std::string notes) {
    if (orderings < 1) throw Error("InvalidArgument", "orderings must be >= 1");

    std::vector<Mask> configs;
    if (mode == ManifestMode::full_factorial) {
        configs.resize(universe.num_coalitions());
        for (Mask m = 0; m < configs.size(); ++m) configs[m] = m;
    } else {
        for (const ComponentSet& set : listed) {
            if (!(set.universe() == universe)) {
                throw Error("UniverseMismatch", "listed coalition uses a different universe");
            }
            configs.push_back(set.mask());
        }
    }

    Manifest manifest;
    manifest.universe = universe;
    manifest.seeds = std::move(run_seeds);
    manifest.notes = std::move(notes);
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        Mask mask = configs[ci];
        std::vector<std::size_t> canonical;
        for (std::size_t i = 0; i < universe.size(); ++i) {
            if ((mask >> i) & 1u) canonical.push_back(i);
        }
        for (std::size_t o = 0; o < orderings; ++o) {
            ManifestEntry entry;
            entry.mask = mask;
            entry.ordering = canonical;
            if (o > 0 && entry.ordering.size() > 1) {
                SplitMix64 rng =
                    stream_rng(seed, (static_cast<std::uint64_t>(ci) << 32) | o);
                for (std::size_t j = entry.ordering.size() - 1; j > 0; --j) {
                    std::size_t swap_with = rng.next_below(j + 1);
                    std::swap(entry.ordering[j], entry.ordering[swap_with]);
                }
            }
            entry.id = format_component_set(universe, mask);
            if (orderings > 1) entry.id += "#" + std::to_string(o);
            manifest.entries.push_back(std::move(entry));
        }
    }
    return manifest;
}

Json to_json(const Manifest& manifest) {
    Json doc;
    doc["schema"] = kManifestSchema;
    doc["universe"] = manifest.universe.names();
    doc["seeds"] = manifest.seeds;
    doc["notes"] = manifest.notes;
    Json configs = Json::array();
    for (const ManifestEntry& entry : manifest.entries) {
        Json e;
        e["id"] = entry.id;
        Json comps = Json::array();
        for (std::size_t i = 0; i < manifest.universe.size(); ++i) {
            if ((entry.mask >> i) & 1u) comps.push_back(manifest.universe.name(i));
        }
        e["components"] = std::move(comps);
        Json ord = Json::array();
        for (std::size_t i : entry.ordering) ord.push_back(manifest.universe.name(i));
        e["ordering"] = std::move(ord);
        configs.push_back(std::move(e));
    }
    doc["configurations"] = std::move(configs);
    return doc;
}

Manifest manifest_from_json(const Json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != kManifestSchema) {
        throw Error("ParseError", "not a " + std::string(kManifestSchema) + " document");
    }
    Manifest manifest;
    manifest.universe = Universe(doc.at("universe").get<std::vector<std::string>>());
    manifest.seeds = doc.value("seeds", std::vector<std::uint64_t>{});
    manifest.notes = doc.value("notes", std::string{});
    std::set<std::string> ids;
    for (const Json& e : doc.at("configurations")) {
        ManifestEntry entry;
        entry.id = e.at("id").get<std::string>();
        if (!ids.insert(entry.id).second) {
            throw Error("ParseError", "duplicate manifest id '" + entry.id + "'");
        }
        Mask mask = 0;
        for (const Json& name : e.at("components")) {
            mask |= Mask{1} << manifest.universe.require_index(name.get<std::string>());
        }
        entry.mask = mask;
        Mask seen = 0;
        for (const Json& name : e.at("ordering")) {
            std::size_t idx = manifest.universe.require_index(name.get<std::string>());
            Mask bit = Mask{1} << idx;
            if (!(mask & bit) || (seen & bit)) {
                throw Error("ParseError",
                            "ordering of '" + entry.id + "' is not a permutation of its "
                            "components");
            }
            seen |= bit;
            entry.ordering.push_back(idx);
        }
        if (seen != mask) {
            throw Error("ParseError",
                        "ordering of '" + entry.id + "' is not a permutation of its components");
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

// ---- report documents -------------------------------------------------------

namespace {

Json report_head(const char* kind) {
    Json doc;
    doc["schema"] = kReportSchema;
    doc["kind"] = kind;
    return doc;
}

Json optional_number(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

}  // namespace

Json to_json(const ShapleyReport& report) {
    Json doc = report_head("shapley");
    doc["components"] = report.universe.names();
    doc["phi"] = report.phi;
    doc["efficiency_gap"] = report.efficiency_gap;
    bool all_zero = true;
    for (double p : report.phi) {
        if (p != 0.0) all_zero = false;
    }
    if (!report.phi.empty() && !all_zero) {
        doc["abs_mass_share"] = abs_mass_share(report);
    }
    return doc;
}

Json to_json(const HarsanyiSpectrum& spectrum) {
    Json doc = report_head("harsanyi");
    doc["components"] = spectrum.universe.names();
    Json rows = Json::array();
    for (Mask m = 0; m < spectrum.dividends.size(); ++m) {
        Json row;
        row["coalition"] = format_component_set(spectrum.universe, m);
        row["order"] = std::popcount(m);
        row["dividend"] = spectrum.dividends[m];
        rows.push_back(std::move(row));
    }
    doc["dividends"] = std::move(rows);
    return doc;
}

Json to_json(const SubmodularityAudit& audit_result, const TopViolationsReport& top) {
    const Universe& u = audit_result.universe;
    Json doc = report_head("submod-audit");
    doc["components"] = u.names();
    doc["n_triples"] = audit_result.n_triples();
    doc["n_violations"] = audit_result.n_violations;
    doc["violation_rate"] = audit_result.violation_rate();
    Json hist = Json::array();
    for (std::size_t h = 0; h < audit_result.gap_histogram.thresholds.size(); ++h) {
        Json row;
        row["threshold"] = audit_result.gap_histogram.thresholds[h];
        row["count"] = audit_result.gap_histogram.counts[h];
        hist.push_back(std::move(row));
    }
    doc["gap_histogram"] = std::move(hist);
    Json gamma;
    gamma["variant"] = to_string(audit_result.gamma_variant);
    gamma["n"] = audit_result.gamma_values.size();
    gamma["median"] = optional_number(audit_result.gamma_median);
    doc["gamma"] = std::move(gamma);

    Json tv;
    tv["n"] = top.triples.size();
    tv["sign_flip_fraction"] = top.sign_flip_fraction;
    tv["min_gap"] = optional_number(top.min_gap);
    if (top.designated_component) {
        tv["designated_component"] = u.name(*top.designated_component);
        tv["designated_context_fraction"] = optional_number(top.designated_context_fraction);
    }
    Json rows = Json::array();
    for (const Triple& t : top.triples) {
        Json row;
        row["component"] = u.name(t.component);
        row["subset"] = format_component_set(u, t.subset_mask);
        row["superset"] = format_component_set(u, t.superset_mask);
        row["gain_subset"] = t.gain_subset;
        row["gain_superset"] = t.gain_superset;
        row["gap"] = t.gap;
        row["sign_flip"] = t.sign_flip;
        rows.push_back(std::move(row));
    }
    tv["triples"] = std::move(rows);
    doc["top_violations"] = std::move(tv);
    return doc;
}

Json to_json(const RegressionFit& fit) {
    Json doc = report_head("fit");
    doc["encoding"] = to_string(fit.spec.encoding);
    doc["order"] = to_string(fit.spec.order);
    doc["n"] = fit.n;
    doc["p"] = fit.p;
    doc["r2"] = fit.r2;
    doc["adj_r2"] = fit.adj_r2;
    doc["loocv_r2"] = optional_number(fit.loocv_r2);
    doc["aic"] = optional_number(fit.aic);
    doc["bic"] = optional_number(fit.bic);
    doc["rss"] = fit.rss;
    Json coefs = Json::array();
    for (std::size_t c = 0; c < fit.columns.size(); ++c) {
        Json row;
        row["term"] = fit.columns[c];
        row["value"] = fit.coefficients[c];
        coefs.push_back(std::move(row));
    }
    doc["coefficients"] = std::move(coefs);
    if (fit.spec.order == ModelOrder::pairwise) {
        Json couplings = Json::array();
        std::size_t k = fit.universe.size();
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                Json row;
                row["pair"] = fit.universe.name(i) + "*" + fit.universe.name(j);
                row["value"] = fit.coupling(i, j);
                couplings.push_back(std::move(row));
            }
        }
        doc["couplings"] = std::move(couplings);  // presence (0/1) units
    }
    return doc;
}

Json to_json(const CouplingEigen& eigen) {
    Json doc = report_head("coupling-eigen");
    doc["components"] = eigen.universe.names();
    Json matrix = Json::array();
    for (Eigen::Index r = 0; r < eigen.j.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < eigen.j.cols(); ++c) row.push_back(eigen.j(r, c));
        matrix.push_back(std::move(row));
    }
    doc["matrix"] = std::move(matrix);
    doc["eigenvalues"] = eigen.eigenvalues;
    doc["n_negative"] = eigen.n_negative;
    doc["n_zero"] = eigen.n_zero;
    doc["n_positive"] = eigen.n_positive;
    auto extreme = [&](const ExtremeCoupling& e) {
        Json row;
        row["pair"] = eigen.universe.name(e.i) + "*" + eigen.universe.name(e.j);
        row["value"] = e.value;
        return row;
    };
    doc["strongest_positive"] = extreme(eigen.strongest_positive);
    doc["strongest_negative"] = extreme(eigen.strongest_negative);
    return doc;
}

Json to_json(const SelectionReport& report) {
    const Universe& u = report.universe;
    Json doc = report_head("selection");
    doc["components"] = u.names();
    Json per_k = Json::array();
    for (const PerKBest& b : report.exhaustive.per_k) {
        Json row;
        row["k"] = b.k;
        row["coalition"] = format_component_set(u, b.mask);
        row["value"] = b.value;
        per_k.push_back(std::move(row));
    }
    doc["best_per_k"] = std::move(per_k);
    doc["k_star"] = report.exhaustive.k_star;
    doc["best_coalition"] = format_component_set(u, report.exhaustive.best_mask);
    doc["best_value"] = report.exhaustive.best_value;

    auto marginal_rows = [&](const std::vector<std::pair<std::size_t, double>>& marginals) {
        Json rows = Json::array();
        for (const auto& [i, gain] : marginals) {
            Json row;
            row["component"] = u.name(i);
            row["marginal"] = gain;
            rows.push_back(std::move(row));
        }
        return rows;
    };

    Json greedy;
    greedy["start"] = format_component_set(u, report.greedy.start_mask);
    Json steps = Json::array();
    for (const GreedyStep& s : report.greedy.steps) {
        Json step;
        step["add"] = u.name(s.component);
        step["marginal"] = s.marginal;
        step["value"] = s.value_after;
        step["candidates"] = marginal_rows(s.marginals);
        steps.push_back(std::move(step));
    }
    greedy["steps"] = std::move(steps);
    greedy["stop_marginals"] = marginal_rows(report.greedy.stop_marginals);
    greedy["final"] = format_component_set(u, report.greedy.final_mask);
    greedy["final_value"] = report.greedy.final_value;
    doc["greedy"] = std::move(greedy);

    doc["optimality_gap"] = report.optimality_gap;
    doc["improvement_percent"] = optional_number(report.improvement_percent);
    doc["tie_break"] = report.tie_break_rule;
    return doc;
}

Json to_json(const TestResult& result) {
    Json doc = report_head("test");
    doc["method"] = result.method;
    doc["statistic"] = result.statistic;
    doc["df"] = optional_number(result.df);
    doc["p_one_sided"] = result.p_one_sided;
    doc["p_two_sided"] = result.p_two_sided;
    doc["effect_size"] = optional_number(result.effect_size);
    doc["bf10"] = optional_number(result.bf10);
    doc["approximate"] = result.approximate;
    doc["note"] = result.note;
    return doc;
}

Json to_json(const MultiTestResult& result, std::span<const double> p_values) {
    Json doc = report_head("multitest");
    doc["method"] = result.method;
    doc["alpha"] = result.alpha;
    Json rows = Json::array();
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < result.adjusted_p.size(); ++i) {
        Json row;
        row["p"] = p_values[i];
        row["adjusted_p"] = result.adjusted_p[i];
        row["reject"] = static_cast<bool>(result.reject[i]);
        if (result.reject[i]) ++rejected;
        rows.push_back(std::move(row));
    }
    doc["hypotheses"] = std::move(rows);
    doc["n_rejected"] = rejected;
    return doc;
}

Json to_json(const BootstrapCI& ci) {
    Json doc = report_head("bootstrap-ci");
    doc["method"] = to_string(ci.method);
    doc["level"] = ci.level;
    doc["lo"] = ci.lo;
    doc["hi"] = ci.hi;
    doc["point_estimate"] = ci.point_estimate;
    doc["resamples"] = ci.resamples;
    doc["seed"] = ci.seed;
    doc["p_one_sided"] = optional_number(ci.p_one_sided);
    doc["warnings"] = ci.warnings;
    return doc;
}

Json to_json(const ViolationRateEstimate& estimate) {
    Json doc = report_head("violation-rate");
    doc["rate"] = estimate.rate;
    doc["n_triples"] = estimate.n_triples;
    doc["ci"] = to_json(estimate.ci);
    return doc;
}

Json comparison_json(const RegressionFit& main_fit, const RegressionFit& pairwise_fit,
                     const CouplingEigen& eigen) {
    Json doc = report_head("model-comparison");
    doc["models"] = Json::array({to_json(main_fit), to_json(pairwise_fit)});
    if (main_fit.aic && pairwise_fit.aic) {
        doc["delta_aic"] = *pairwise_fit.aic - *main_fit.aic;
        doc["delta_bic"] = *pairwise_fit.bic - *main_fit.bic;
        doc["preferred_by_bic"] =
            *main_fit.bic <= *pairwise_fit.bic ? "main" : "pairwise";
    } else {
        doc["delta_aic"] = nullptr;
        doc["delta_bic"] = nullptr;
        doc["preferred_by_bic"] = nullptr;
    }
    doc["coupling_eigen"] = to_json(eigen);
    return doc;
}

// ---- rendering ---------------------------------------------------------------

namespace {

constexpr int kValuePlaces = 3;
constexpr int kProbPlaces = 4;

std::string num(const Json& v, int places) {
    if (v.is_null()) return "n/a";
    return fmt_fixed(v.get<double>(), places);
}

std::string val3(const Json& v) { return num(v, kValuePlaces); }
std::string prob4(const Json& v) { return num(v, kProbPlaces); }

// Minimal table writer shared by text and markdown output.
struct TableWriter {
    bool markdown;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::vector<std::size_t> width(header.size());
        for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                width[c] = std::max(width[c], row[c].size());
            }
        }
        std::string out;
        auto emit = [&](const std::vector<std::string>& cells) {
            if (markdown) out += "|";
            for (std::size_t c = 0; c < cells.size(); ++c) {
                out += ' ';
                out += cells[c];
                out.append(width[c] - cells[c].size(), ' ');
                out += markdown ? " |" : " ";
            }
            out += '\n';
        };
        emit(header);
        if (markdown) {
            out += "|";
            for (std::size_t c = 0; c < header.size(); ++c) {
                out += ' ';
                out.append(width[c], '-');
                out += " |";
            }
            out += '\n';
        } else {
            std::size_t total = 0;
            for (std::size_t c = 0; c < header.size(); ++c) total += width[c] + 2;
            out.append(total, '-');
            out += '\n';
        }
        for (const auto& row : rows) emit(row);
        return out;
    }
};

std::string heading(bool markdown, const std::string& title) {
    if (markdown) return "## " + title + "\n\n";
    return title + "\n\n";
}

std::string render_shapley(const Json& doc, bool md) {
    std::string out = heading(md, "Shapley values");
    TableWriter t{md, {"component", "phi", "abs share"}, {}};
    const auto& comps = doc["components"];
    bool has_share = doc.contains("abs_mass_share");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        t.rows.push_back({comps[i].get<std::string>(), val3(doc["phi"][i]),
                          has_share ? val3(doc["abs_mass_share"][i]) : "n/a"});
    }
    out += t.str();
    out += "\nefficiency gap: " + fmt_double(doc["efficiency_gap"].get<double>()) + "\n";
    return out;
}

std::string render_harsanyi(const Json& doc, bool md) {
    std::string out = heading(md, "Harsanyi dividends");
    TableWriter t{md, {"coalition", "order", "dividend"}, {}};
    for (const Json& row : doc["dividends"]) {
        t.rows.push_back({row["coalition"].get<std::string>(),
                          std::to_string(row["order"].get<int>()),
                          val3(row["dividend"])});
    }
    out += t.str();
    return out;
}

std::string render_audit(const Json& doc, bool md) {
    std::string out = heading(md, "Submodularity audit");
    out += "triples:        " + std::to_string(doc["n_triples"].get<std::size_t>()) + "\n";
    out += "violations:     " + std::to_string(doc["n_violations"].get<std::size_t>()) +
           " (" + val3(doc["violation_rate"]) + ")\n";
    for (const Json& row : doc["gap_histogram"]) {
        out += "gap > " + val3(row["threshold"]) + ":    " +
               std::to_string(row["count"].get<std::size_t>()) + "\n";
    }
    const Json& gamma = doc["gamma"];
    out += "gamma (" + gamma["variant"].get<std::string>() + ", n=" +
           std::to_string(gamma["n"].get<std::size_t>()) +
           ") median: " + val3(gamma["median"]) + "\n";

    const Json& tv = doc["top_violations"];
    out += "\n" + heading(md, "Top violations");
    out += "sign-flip fraction: " + val3(tv["sign_flip_fraction"]) + "\n";
    out += "min gap:            " + val3(tv["min_gap"]) + "\n";
    if (tv.contains("designated_component")) {
        out += "context fraction containing " +
               tv["designated_component"].get<std::string>() + ": " +
               val3(tv["designated_context_fraction"]) + "\n";
    }
    out += "\n";
    TableWriter t{md, {"component", "subset", "superset", "gain@subset", "gain@superset",
                       "gap", "flip"}, {}};
    for (const Json& row : tv["triples"]) {
        t.rows.push_back({row["component"].get<std::string>(),
                          row["subset"].get<std::string>(),
                          row["superset"].get<std::string>(), val3(row["gain_subset"]),
                          val3(row["gain_superset"]), val3(row["gap"]),
                          row["sign_flip"].get<bool>() ? "yes" : "no"});
    }
    out += t.str();
    return out;
}

std::string render_fit(const Json& doc, bool md) {
    std::string out = heading(md, "Regression fit (" + doc["encoding"].get<std::string>() +
                                      ", " + doc["order"].get<std::string>() + ")");
    out += "n: " + std::to_string(doc["n"].get<std::size_t>()) +
           "  p: " + std::to_string(doc["p"].get<std::size_t>()) + "\n";
    out += "R2: " + val3(doc["r2"]) + "  adj R2: " + val3(doc["adj_r2"]) +
           "  LOOCV R2: " + val3(doc["loocv_r2"]) + "\n";
    out += "AIC: " + num(doc["aic"], 1) + "  BIC: " + num(doc["bic"], 1) + "\n\n";
    TableWriter t{md, {"term", "coefficient"}, {}};
    for (const Json& row : doc["coefficients"]) {
        t.rows.push_back({row["term"].get<std::string>(), val3(row["value"])});
    }
    out += t.str();
    if (doc.contains("couplings")) {
        out += "\n" + heading(md, "Couplings (presence units)");
        TableWriter c{md, {"pair", "J"}, {}};
        for (const Json& row : doc["couplings"]) {
            c.rows.push_back({row["pair"].get<std::string>(), val3(row["value"])});
        }
        out += c.str();
    }
    return out;
}

std::string render_eigen(const Json& doc, bool md) {
    std::string out = heading(md, "Coupling matrix eigen-structure");
    std::string eigs;
    for (const Json& v : doc["eigenvalues"]) {
        if (!eigs.empty()) eigs += ", ";
        eigs += val3(v);
    }
    out += "eigenvalues: [" + eigs + "]\n";
    out += "signs: " + std::to_string(doc["n_negative"].get<int>()) + " negative, " +
           std::to_string(doc["n_zero"].get<int>()) + " zero, " +
           std::to_string(doc["n_positive"].get<int>()) + " positive\n";
    out += "strongest positive: J(" + doc["strongest_positive"]["pair"].get<std::string>() +
           ") = " + val3(doc["strongest_positive"]["value"]) + "\n";
    out += "strongest negative: J(" + doc["strongest_negative"]["pair"].get<std::string>() +
           ") = " + val3(doc["strongest_negative"]["value"]) + "\n";
    return out;
}

std::string render_comparison(const Json& doc, bool md) {
    std::string out = heading(md, "Model comparison");
    TableWriter t{md, {"model", "R2", "adj R2", "LOOCV R2", "AIC", "BIC"}, {}};
    for (const Json& fit : doc["models"]) {
        t.rows.push_back({fit["order"].get<std::string>() + " (" +
                              fit["encoding"].get<std::string>() + ")",
                          val3(fit["r2"]), val3(fit["adj_r2"]), val3(fit["loocv_r2"]),
                          num(fit["aic"], 1), num(fit["bic"], 1)});
    }
    out += t.str();
    out += "\ndelta AIC (pairwise - main): " + num(doc["delta_aic"], 1) + "\n";
    out += "delta BIC (pairwise - main): " + num(doc["delta_bic"], 1) + "\n";
    if (!doc["preferred_by_bic"].is_null()) {
        out += "preferred by BIC: " + doc["preferred_by_bic"].get<std::string>() + "\n";
    }
    out += "\n" + render_eigen(doc["coupling_eigen"], md);
    return out;
}

std::string render_selection(const Json& doc, bool md) {
    std::string out = heading(md, "Subset selection");
    TableWriter t{md, {"K", "best coalition", "value"}, {}};
    for (const Json& row : doc["best_per_k"]) {
        t.rows.push_back({std::to_string(row["k"].get<std::size_t>()),
                          row["coalition"].get<std::string>(), val3(row["value"])});
    }
    out += t.str();
    out += "\nk* = " + std::to_string(doc["k_star"].get<std::size_t>()) + " (" +
           doc["best_coalition"].get<std::string>() + " at " + val3(doc["best_value"]) +
           "; tie-break: " + doc["tie_break"].get<std::string>() + ")\n";

    const Json& greedy = doc["greedy"];
    out += "\n" + heading(md, "Greedy forward from " + greedy["start"].get<std::string>());
    for (const Json& step : greedy["steps"]) {
        out += "add " + step["add"].get<std::string>() + " (marginal " +
               val3(step["marginal"]) + ") -> value " + val3(step["value"]) + "\n";
    }
    if (!greedy["stop_marginals"].empty()) {
        out += "stopped; remaining marginals:";
        for (const Json& row : greedy["stop_marginals"]) {
            out += " " + row["component"].get<std::string>() + "=" + val3(row["marginal"]);
        }
        out += "\n";
    }
    out += "greedy final: " + greedy["final"].get<std::string>() + " at " +
           val3(greedy["final_value"]) + "\n";
    out += "optimality gap: " + val3(doc["optimality_gap"]);
    if (!doc["improvement_percent"].is_null()) {
        out += " (improvement " + fmt_fixed(doc["improvement_percent"].get<double>(), 1) + "%)";
    }
    out += "\n";
    return out;
}

std::string render_test(const Json& doc, bool md) {
    std::string out = heading(md, "Test: " + doc["method"].get<std::string>());
    out += "statistic: " + val3(doc["statistic"]) + "\n";
    if (!doc["df"].is_null()) out += "df: " + fmt_double(doc["df"].get<double>()) + "\n";
    out += "p (one-sided): " + prob4(doc["p_one_sided"]) + "\n";
    out += "p (two-sided): " + prob4(doc["p_two_sided"]) + "\n";
    if (!doc["effect_size"].is_null()) out += "d_z: " + val3(doc["effect_size"]) + "\n";
    if (!doc["bf10"].is_null()) out += "BF10: " + val3(doc["bf10"]) + "\n";
    if (doc["approximate"].get<bool>()) out += "note: " + doc["note"].get<std::string>() + "\n";
    return out;
}

std::string render_multitest(const Json& doc, bool md) {
    std::string out = heading(md, "Multiple-comparison correction (" +
                                      doc["method"].get<std::string>() + ", alpha " +
                                      prob4(doc["alpha"]) + ")");
    TableWriter t{md, {"p", "adjusted p", "reject"}, {}};
    for (const Json& row : doc["hypotheses"]) {
        t.rows.push_back({prob4(row["p"]), prob4(row["adjusted_p"]),
                          row["reject"].get<bool>() ? "yes" : "no"});
    }
    out += t.str();
    out += "\nrejected: " + std::to_string(doc["n_rejected"].get<std::size_t>()) + " of " +
           std::to_string(doc["hypotheses"].size()) + "\n";
    return out;
}

std::string render_bootstrap(const Json& doc, bool md) {
    std::string out = heading(md, "Bootstrap CI (" + doc["method"].get<std::string>() + ")");
    out += "point estimate: " + val3(doc["point_estimate"]) + "\n";
    out += fmt_fixed(100.0 * doc["level"].get<double>(), 0) + "% CI: [" + val3(doc["lo"]) +
           ", " + val3(doc["hi"]) + "]\n";
    out += "resamples: " + std::to_string(doc["resamples"].get<std::size_t>()) +
           "  seed: " + std::to_string(doc["seed"].get<std::uint64_t>()) + "\n";
    if (!doc["p_one_sided"].is_null()) {
        out += "p (one-sided vs 0): " + prob4(doc["p_one_sided"]) + "\n";
    }
    for (const Json& w : doc["warnings"]) {
        out += "warning: " + w.get<std::string>() + "\n";
    }
    return out;
}

std::string render_violation_rate(const Json& doc, bool md) {
    std::string out = heading(md, "Cluster-bootstrap violation rate");
    out += "rate: " + val3(doc["rate"]) + " over " +
           std::to_string(doc["n_triples"].get<std::uint64_t>()) + " triples\n\n";
    out += render_bootstrap(doc["ci"], md);
    return out;
}

std::string render_manifest(const Json& doc, bool md) {
    std::string out = heading(md, "Manifest");
    TableWriter t{md, {"id", "components", "ordering"}, {}};
    auto join = [](const Json& arr) {
        std::string s;
        for (const Json& v : arr) {
            if (!s.empty()) s += "+";
            s += v.get<std::string>();
        }
        return s.empty() ? std::string("Bare") : s;
    };
    for (const Json& e : doc["configurations"]) {
        t.rows.push_back({e["id"].get<std::string>(), join(e["components"]),
                          join(e["ordering"])});
    }
    out += t.str();
    return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
    if (name == "text") return ReportFormat::text;
    if (name == "json") return ReportFormat::json;
    if (name == "markdown") return ReportFormat::markdown;
    throw Error("InvalidArgument", "unknown format '" + std::string(name) + "'");
}

std::string render_report(const Json& doc, ReportFormat format) {
    if (format == ReportFormat::json) return doc.dump(2) + "\n";
    bool md = format == ReportFormat::markdown;

    std::string schema = doc.value("schema", "");
    if (schema == kManifestSchema) return render_manifest(doc, md);
    if (schema != kReportSchema) {
        throw Error("ParseError", "not a recognized colat document");
    }
    std::string kind = doc.value("kind", "");
    if (kind == "shapley") return render_shapley(doc, md);
    if (kind == "harsanyi") return render_harsanyi(doc, md);
    if (kind == "submod-audit") return render_audit(doc, md);
    if (kind == "fit") return render_fit(doc, md);
    if (kind == "coupling-eigen") return render_eigen(doc, md);
    if (kind == "model-comparison") return render_comparison(doc, md);
    if (kind == "selection") return render_selection(doc, md);
    if (kind == "test") return render_test(doc, md);
    if (kind == "multitest") return render_multitest(doc, md);
    if (kind == "bootstrap-ci") return render_bootstrap(doc, md);
    if (kind == "violation-rate") return render_violation_rate(doc, md);
    throw Error("ParseError", "unknown report kind '" + kind + "'");
}

}  // namespace colat
