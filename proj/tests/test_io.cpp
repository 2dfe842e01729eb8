#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "colat/error.hpp"
#include "colat/io.hpp"
#include "support.hpp"

using namespace colat;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const char* name)
        : path(std::filesystem::temp_directory_path() / name) {}
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("bundled fixtures are hash-pinned") {
    CHECK(testsup::sha256_hex(testsup::slurp(testsup::data_path("hotpotqa_8b.csv"))) ==
          "eb29d3f2848b34e2a4576355bedb6929b66c7407eef1a22f12f49ae1d2c50a71");
    CHECK(testsup::sha256_hex(testsup::slurp(testsup::data_path("hotpotqa_70b.csv"))) ==
          "838d14416f3380a7f3ddf30ea221e1283cf98346588fdd71d2a16f03c95b976c");
    CHECK(testsup::sha256_hex(testsup::slurp(testsup::data_path("shapley_expected.json"))) ==
          "ec9a17f9f7f21fe93e7b32d892f96ddfb98904c8ac5b6d4e3d45832f59737042");
}

TEST_CASE("loading the bundled tables") {
    CoalitionTable a = load_coalition_csv(testsup::data_path("hotpotqa_8b.csv"));
    CHECK(a.complete());
    CHECK(a.num_coalitions() == 32);
    CHECK(a.value(parse_component_set("T", a.universe()).mask()) == 0.284);
    CHECK(a.metadata().at("benchmark") == "hotpotqa");
    CHECK(a.metadata().at("model") == "llama-3.1-8b-instruct");

    CoalitionTable b = load_coalition_csv(testsup::data_path("hotpotqa_70b.csv"));
    CHECK(b.value(parse_component_set("T+R", b.universe()).mask()) == 0.441);
}

TEST_CASE("coalition csv parse errors") {
    CHECK_THROWS_AS(parse_coalition_csv(""), Error);
    try {
        parse_coalition_csv("");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == "ParseError");
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }

    // Wrong cell count.
    CHECK_THROWS_AS(parse_coalition_csv("a,b,value\n0,1\n"), Error);
    // Bit cells must be 0/1.
    CHECK_THROWS_AS(parse_coalition_csv("a,value\n2,0.5\n"), Error);
    // Header must end in value.
    CHECK_THROWS_AS(parse_coalition_csv("a,b\n0,1\n"), Error);
    // Bad number.
    CHECK_THROWS_AS(parse_coalition_csv("a,value\n0,zero\n"), Error);

    try {
        parse_coalition_csv("a,value\n0,0.1\n0,0.2\n");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == "DuplicateCoalition");
    }
    try {
        parse_coalition_csv("a,value\n0,inf\n");
        CHECK(false);
    } catch (const Error& e) {
        // from_chars accepts "inf"; the table rejects it.
        CHECK((e.kind() == "NonFiniteValue" || e.kind() == "ParseError"));
    }
}

TEST_CASE("coalition csv round-trips canonical files byte for byte") {
    std::string original = testsup::slurp(testsup::data_path("hotpotqa_8b.csv"));
    CoalitionTable table = parse_coalition_csv(original);
    CHECK(coalition_csv_text(table) == original);

    TempFile tmp("colat_roundtrip.csv");
    save_coalition_csv(table, tmp.path);
    CHECK(testsup::slurp(tmp.path.string()) == original);
}

TEST_CASE("task matrix csv") {
    std::string text =
        "# components: a,b\n"
        "task,Bare,a,b,All-In\n"
        "t0,0,0.5,0.25,1\n"
        "t1,0.1,0.4,0.3,0.9\n";
    TaskMatrix m = parse_task_matrix_csv(text);
    CHECK(m.num_tasks() == 2);
    CHECK(m.num_columns() == 4);
    CHECK(m.covers_full_lattice());
    CHECK(m.value(1, 2) == 0.3);
    CHECK(task_matrix_csv_text(m) == text);

    // Universe line is mandatory.
    CHECK_THROWS_AS(parse_task_matrix_csv("task,Bare\nt0,0.5\n"), Error);
    // Unknown coalition label.
    CHECK_THROWS_AS(parse_task_matrix_csv("# components: a\ntask,q\nt0,1\n"), Error);
    // Ragged row.
    CHECK_THROWS_AS(parse_task_matrix_csv("# components: a\ntask,a\nt0,1,2\n"), Error);
}

TEST_CASE("audit csv export") {
    CoalitionTable table = load_coalition_csv(testsup::data_path("hotpotqa_8b.csv"));
    SubmodularityAudit result = audit(table, std::vector<double>{0.05});
    std::string csv = audit_triples_csv_text(result);
    // Header + one line per triple.
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 326);
    CHECK(csv.rfind("component,subset,superset,", 0) == 0);
}

TEST_CASE("atomic writes replace the target in one step") {
    TempFile tmp("colat_atomic.txt");
    write_file_atomic(tmp.path, "first\n");
    CHECK(testsup::slurp(tmp.path.string()) == "first\n");
    write_file_atomic(tmp.path, "second\n");
    CHECK(testsup::slurp(tmp.path.string()) == "second\n");
    CHECK_FALSE(std::filesystem::exists(tmp.path.string() + ".tmp"));
}

TEST_CASE("manifest generation") {
    Universe u({"P", "T", "M", "SR", "R"});

    SUBCASE("full factorial, single ordering: 32 canonical rows") {
        Manifest m = gen_manifest(u, ManifestMode::full_factorial, {}, 1, 42);
        CHECK(m.entries.size() == 32);
        CHECK(m.entries[0].id == "Bare");
        CHECK(m.entries[31].id == "All-In");
        for (const ManifestEntry& e : m.entries) {
            // Canonical ordering: ascending component indices.
            for (std::size_t i = 1; i < e.ordering.size(); ++i) {
                CHECK(e.ordering[i - 1] < e.ordering[i]);
            }
        }
    }

    SUBCASE("5 listed configs x 5 orderings = 25 rows") {
        std::vector<ComponentSet> listed = {
            parse_component_set("T", u), parse_component_set("T+SR", u),
            parse_component_set("T+SR+R", u), parse_component_set("P+T", u),
            parse_component_set("All-In", u)};
        Manifest m = gen_manifest(u, ManifestMode::listed, listed, 5, 7);
        CHECK(m.entries.size() == 25);

        std::set<std::string> ids;
        for (const ManifestEntry& e : m.entries) {
            CHECK(ids.insert(e.id).second);  // unique ids
            // Ordering is a permutation of the active components.
            Mask seen = 0;
            for (std::size_t i : e.ordering) {
                CHECK(((e.mask >> i) & 1u) == 1u);
                seen |= Mask{1} << i;
            }
            CHECK(seen == e.mask);
        }
        // Deterministic in the seed.
        Manifest again = gen_manifest(u, ManifestMode::listed, listed, 5, 7);
        for (std::size_t i = 0; i < m.entries.size(); ++i) {
            CHECK(m.entries[i].ordering == again.entries[i].ordering);
        }
        Manifest other = gen_manifest(u, ManifestMode::listed, listed, 5, 8);
        bool any_diff = false;
        for (std::size_t i = 0; i < m.entries.size(); ++i) {
            if (m.entries[i].ordering != other.entries[i].ordering) any_diff = true;
        }
        CHECK(any_diff);
    }

    SUBCASE("empty universe: a single Bare configuration") {
        Manifest m = gen_manifest(Universe({}), ManifestMode::full_factorial, {}, 1, 0);
        CHECK(m.entries.size() == 1);
        CHECK(m.entries[0].id == "Bare");
        CHECK(m.entries[0].ordering.empty());
    }

    SUBCASE("json round trip") {
        Manifest m = gen_manifest(u, ManifestMode::full_factorial, {}, 3, 11, {1, 2, 3},
                                  "ordering study");
        Json doc = to_json(m);
        Manifest back = manifest_from_json(doc);
        CHECK(back.entries.size() == m.entries.size());
        CHECK(back.seeds == m.seeds);
        CHECK(back.notes == m.notes);
        for (std::size_t i = 0; i < m.entries.size(); ++i) {
            CHECK(back.entries[i].id == m.entries[i].id);
            CHECK(back.entries[i].mask == m.entries[i].mask);
            CHECK(back.entries[i].ordering == m.entries[i].ordering);
        }
        CHECK(to_json(back) == doc);
    }
}

TEST_CASE("report rendering") {
    CoalitionTable table = load_coalition_csv(testsup::data_path("hotpotqa_8b.csv"));

    SUBCASE("json render/parse identity") {
        Json doc = to_json(shapley(table));
        std::string rendered = render_report(doc, ReportFormat::json);
        Json parsed = Json::parse(rendered);
        CHECK(parsed == doc);  // numbers recovered exactly

        SubmodularityAudit a = audit(table, std::vector<double>{0.05, 0.10});
        Json audit_doc = to_json(a, top_violations(a, 20, std::string("T")));
        CHECK(Json::parse(render_report(audit_doc, ReportFormat::json)) == audit_doc);
    }

    SUBCASE("shapley markdown mirrors the published attribution table") {
        Json doc = to_json(shapley(table));
        std::string md = render_report(doc, ReportFormat::markdown);
        CHECK(md.find("| component |") != std::string::npos);
        CHECK(md.find("| T ") != std::string::npos);
        CHECK(md.find("0.177") != std::string::npos);
        CHECK(md.find("-0.029") != std::string::npos);
        // values fixed to 3 decimals
        CHECK(md.find("0.1771") == std::string::npos);
    }

    SUBCASE("empty audit renders a zero-count document") {
        CoalitionTable solo{Universe({"a"})};
        solo.set(0, 0.1);
        solo.set(1, 0.2);
        SubmodularityAudit a = audit(solo, std::vector<double>{0.05});
        Json doc = to_json(a, top_violations(a, 20));
        CHECK(doc["n_triples"] == 0);
        std::string text = render_report(doc, ReportFormat::text);
        CHECK(text.find("triples:        0") != std::string::npos);
        std::string md = render_report(doc, ReportFormat::markdown);
        CHECK_FALSE(md.empty());
    }

    SUBCASE("selection text names the tie-break rule") {
        Json doc = to_json(compare_strategies(table));
        std::string text = render_report(doc, ReportFormat::text);
        CHECK(text.find("k* = 1") != std::string::npos);
        CHECK(text.find(kTieBreakRule) != std::string::npos);
    }

    SUBCASE("test result and bootstrap text use 4-decimal p") {
        TestResult r;
        r.method = "paired-t";
        r.statistic = 2.74;
        r.df = 9.0;
        r.p_one_sided = 0.0114237872;
        r.p_two_sided = 0.0228475743;
        r.effect_size = 0.8664640789;
        std::string text = render_report(to_json(r), ReportFormat::text);
        CHECK(text.find("0.0228") != std::string::npos);
        CHECK(text.find("0.866") != std::string::npos);
    }

    SUBCASE("unknown kinds are rejected") {
        Json doc;
        doc["schema"] = "colat-report/1";
        doc["kind"] = "mystery";
        CHECK_THROWS_AS(render_report(doc, ReportFormat::text), Error);
        Json not_ours;
        not_ours["x"] = 1;
        CHECK_THROWS_AS(render_report(not_ours, ReportFormat::text), Error);
    }
}

TEST_CASE("number formatting is locale-free and shortest-round-trip") {
    CHECK(fmt_double(0.047) == "0.047");
    CHECK(fmt_double(0.0) == "0");
    CHECK(fmt_double(-0.5) == "-0.5");
    CHECK(fmt_fixed(0.04685, 3) == "0.047");
    CHECK(fmt_fixed(-1e-9, 3) == "0.000");
    CHECK(fmt_fixed(0.0228475743, 4) == "0.0228");
}
