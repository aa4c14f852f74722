// Acceptance suite: one self-contained check per release criterion, each
// printing a PASS/FAIL line. Returns the number of failed criteria.
//
// usage: acceptance [path-to-biasaudit-binary]
// (the binary path is needed only for the CLI determinism criterion)

#include "biasaudit/errors.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/pipeline.hpp"
#include "biasaudit/schema.hpp"
#include "biasaudit/score_store.hpp"
#include "biasaudit/simulator.hpp"
#include "biasaudit/stats.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace biasaudit;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!pass) ++failures;
}

void run(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
        const auto [pass, detail] = fn();
        report(id, name, pass, detail);
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

std::shared_ptr<const AttributeSchema> planted_schema() {
    return std::make_shared<const AttributeSchema>(std::vector<Group>{
        {"size", {"small", "large"}},
        {"texture", {"smooth", "wavy", "rough"}},
        {"tint", {"warm", "cool", "neutral"}}});
}

ScoreTable named(const ScoreTable& t, const std::string& name) {
    return ScoreTable(t.schema_ptr(), t.records(), name, t.dataset());
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    const auto schema =
        AttributeSchema::from_file(std::string(BIASAUDIT_DATA_DIR) + "/face_attributes_schema.json");
    const std::uint64_t count = schema.combination_count();
    const double ms = elapsed_ms(start);
    const bool pass = count == 46656 && ms < 1000.0;
    return {pass, "combination_count=" + std::to_string(count) + ", " + fmt(ms) + " ms"};
}

std::pair<bool, std::string> criterion_2() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double worst_identity = 0.0, worst_grid = 0.0;
    int tables_checked = 0, curves_checked = 0;

    for (int trial = 0; trial < 1000; ++trial) {
        ScoreTable table = [&]() -> ScoreTable {
            if (trial % 20 == 0) {
                // large-bucket case: single binary group, up to 1e4 scores/side
                auto schema = std::make_shared<const AttributeSchema>(
                    std::vector<Group>{{"g0", {"l0", "l1"}}});
                std::uniform_int_distribution<int> big(2000, 10000);
                std::vector<ScoreRecord> records;
                for (std::uint64_t c = 0; c < 2; ++c) {
                    const int n = big(rng);
                    for (int j = 0; j < n; ++j)
                        records.push_back({"s", c, uniform(rng), SampleClass::synthetic});
                }
                return ScoreTable(std::move(schema), std::move(records));
            }
            const auto schema = oracle::random_schema(rng, 4, 4);
            return oracle::random_table(rng, schema, 8, 0.95);
        }();
        ++tables_checked;

        const auto& schema = table.schema();
        for (std::size_t g = 0; g < schema.group_count(); ++g) {
            if (schema.label_count(g) < 2) continue;
            const AttributeRef attr{g, 0};
            // per-subgroup identity on the first usable subgroup
            for (std::uint64_t sg = 0; sg < schema.subgroup_count(attr); ++sg) {
                const auto present = table.bucket(attr, sg, true, SampleClass::synthetic);
                const auto absent = table.bucket(attr, sg, false, SampleClass::synthetic);
                if (present.empty() || absent.empty()) continue;
                const DeltaCurve curve = delta_curve(tpr_step(present), tpr_step(absent));
                const double exact = integrate_delta(curve);
                const double identity =
                    std::fabs(exact - (mean_score(present) - mean_score(absent)));
                worst_identity = std::max(worst_identity, identity);
                const double grid = oracle::riemann([&](double t) { return curve.eval(t); });
                worst_grid = std::max(worst_grid, std::fabs(exact - grid));
                ++curves_checked;
                break;
            }
            // averaged-curve grid oracle
            try {
                const AveragedDelta avg = averaged_delta_curve(table, attr);
                const double exact = integrate_delta(avg.curve);
                const double grid =
                    oracle::riemann([&](double t) { return avg.curve.eval(t); });
                worst_grid = std::max(worst_grid, std::fabs(exact - grid));
            } catch (const NotMeasurableError&) {
            }
            break;
        }
    }
    const bool pass = worst_identity < 1e-12 && worst_grid < 2e-4 && curves_checked > 900;
    return {pass, std::to_string(tables_checked) + " tables, max identity err " +
                      fmt(worst_identity) + ", max grid err " + fmt(worst_grid)};
}

std::pair<bool, std::string> criterion_3() {
    const auto start = std::chrono::steady_clock::now();
    SimSpec spec;
    spec.schema = std::make_shared<const AttributeSchema>(
        std::vector<Group>{{"hair_color", {"blonde_hair", "black_hair"}}});
    spec.base_mean = 0.70;
    spec.base_std = 0.05;
    spec.effects = {{0, 1, 0.05, 0.045}};  // black: Normal(0.75, 0.045)
    spec.samples_per_combination = 100000;
    spec.seed = 20240603;
    const ScoreTable table = simulate(spec);

    const AttributeRef black{0, 1};
    const double b = brisk(table, black);
    const double e = eod(table, black, EodSpec::at(0.6));
    const double ms = elapsed_ms(start);

    const bool pass =
        std::fabs(b - 0.0500) <= 0.002 && std::fabs(e - 0.0224) <= 0.004 && ms < 10000.0;
    return {pass, "brisk=" + fmt(b) + " (want 0.0500 +/- 0.002), eod@0.6=" + fmt(e) +
                      " (want 0.0224 +/- 0.004), " + fmt(ms) + " ms"};
}

std::pair<bool, std::string> criterion_4() {
    const auto schema = planted_schema();
    const AuditOptions opts;  // alpha 0.01, executed-test m

    int planted_hits = 0, cross_clean = 0, null_clean = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SimSpec spec;
        spec.schema = schema;
        spec.base_mean = 0.6;
        spec.base_std = 0.05;
        spec.samples_per_combination = 50;
        spec.seed = 51000 + seed;
        spec.effects = {{1, 2, 0.08, std::nullopt}};  // texture.rough
        const ScoreTable table = simulate(spec);
        const BiasReportSet set = run_audit(std::span(&table, 1), opts);

        bool planted = false, cross_flag = false;
        for (const AttributeReport& a : set.detectors[0].attributes) {
            if (a.group == "texture" && a.label == "rough" && a.significant) planted = true;
            // siblings of the planted label carry real pooled-absent bias;
            // only the untouched groups count as zero-effect attributes
            if (a.group != "texture" && a.significant) cross_flag = true;
        }
        if (planted) ++planted_hits;
        if (!cross_flag) ++cross_clean;
    }
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SimSpec spec;
        spec.schema = schema;
        spec.base_mean = 0.6;
        spec.base_std = 0.05;
        spec.samples_per_combination = 50;
        spec.seed = 97000 + seed;
        const ScoreTable table = simulate(spec);
        const BiasReportSet set = run_audit(std::span(&table, 1), opts);
        bool any = false;
        for (const AttributeReport& a : set.detectors[0].attributes)
            if (a.significant) any = true;
        if (!any) ++null_clean;
    }
    const bool pass = planted_hits >= 95 && cross_clean >= 95 && null_clean >= 95;
    return {pass, "planted flagged " + std::to_string(planted_hits) +
                      "/100, zero-effect clean " + std::to_string(cross_clean) +
                      "/100, null clean " + std::to_string(null_clean) + "/100"};
}

std::pair<bool, std::string> criterion_5() {
    // balanced tables: EOD(integrated) == brisk within 1e-9, per attribute
    std::mt19937_64 rng(5150);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        SimSpec spec;
        spec.schema = oracle::random_schema(rng, 3, 3);
        spec.base_mean = 0.55;
        spec.base_std = 0.06;
        spec.samples_per_combination = 2 + (trial % 5);
        spec.seed = 600 + trial;
        if (spec.schema->group_count() > 1)
            spec.effects = {{0, 0, 0.03, std::nullopt}};
        const ScoreTable table = simulate(spec);
        for (std::size_t g = 0; g < spec.schema->group_count(); ++g) {
            if (spec.schema->label_count(g) < 2) continue;
            for (std::size_t l = 0; l < spec.schema->label_count(g); ++l) {
                const AttributeRef attr{g, l};
                worst = std::max(worst, std::fabs(eod(table, attr) - brisk(table, attr)));
            }
        }
    }

    // adversarial table: heterogeneous effect, 90% of one subgroup dropped
    const auto schema = std::make_shared<const AttributeSchema>(
        std::vector<Group>{{"target", {"t0", "t1"}}, {"other", {"o0", "o1"}}});
    std::vector<ScoreRecord> records;
    const auto add = [&](std::uint64_t combo, double score, int count) {
        for (int j = 0; j < count; ++j)
            records.push_back({"s" + std::to_string(records.size()), combo, score,
                               SampleClass::synthetic});
    };
    add(0, 0.55, 20);  // (t0,o0)
    add(1, 0.55, 2);   // (t0,o1): 90% dropped
    add(2, 0.60, 20);  // (t1,o0): effect +0.05 here
    add(3, 0.90, 2);   // (t1,o1): effect +0.35 here, 90% dropped
    const ScoreTable adversarial(schema, std::move(records));
    const AttributeRef t1{0, 1};
    const double gap = std::fabs(eod(adversarial, t1) - brisk(adversarial, t1));

    const bool pass = worst < 1e-9 && gap > 1e-3;
    return {pass, "balanced max |eod-brisk| " + fmt(worst) + ", adversarial gap " + fmt(gap)};
}

std::pair<bool, std::string> criterion_6() {
    SimSpec spec;
    spec.schema = std::make_shared<const AttributeSchema>(
        std::vector<Group>{{"a", {"a0", "a1"}}, {"b", {"b0", "b1", "b2"}}});
    spec.base_mean = 0.6;
    spec.base_std = 0.05;
    spec.samples_per_combination = 400;
    spec.seed = 4807;
    spec.effects = {{1, 1, 0.05, std::nullopt}};
    const ScoreTable table = simulate(spec);

    const std::vector<double> fractions{1.0, 0.5, 0.1, 0.01};
    const SweepResult sweep = subsample_sweep(table, fractions, 20, 11);

    const bool zero_at_full = sweep.cells[0].std_abs_eod == 0.0;
    int inversions = 0;
    std::ostringstream stds;
    for (std::size_t i = 0; i < sweep.cells.size(); ++i) {
        if (i > 0 && sweep.cells[i].std_abs_eod < sweep.cells[i - 1].std_abs_eod) ++inversions;
        stds << (i ? " " : "") << fmt(sweep.cells[i].std_abs_eod);
    }
    const bool pass = zero_at_full && inversions <= 1;
    return {pass, "std per fraction {1,0.5,0.1,0.01} = [" + stds.str() + "], inversions " +
                      std::to_string(inversions)};
}

std::pair<bool, std::string> criterion_7() {
    const TTestResult r = paired_ttest(std::vector<double>{1, 2, 3, 4, 5});
    const bool t_ok = std::fabs(r.t_statistic - 4.2426) <= 1e-3;
    const bool p_ok = std::fabs(r.p_value - 0.01324) <= 1e-4;

    // frozen normal two-sided tails
    const struct { double t, p; } normals[] = {
        {0.5, 0.6170750774519738},
        {1.0, 0.31731050786291415},
        {2.0, 0.04550026389635839},
        {4.242640687119285, 2.2090496998585445e-05},
    };
    bool sf_ok = true;
    double worst_sf = 0.0;
    for (const auto& c : normals) {
        const double err = std::fabs(student_t_sf(c.t, 100000) - c.p);
        worst_sf = std::max(worst_sf, err);
        if (err >= 1e-4) sf_ok = false;
    }
    const bool bf_ok = bonferroni(0.01, 250) == 4e-5;

    const bool pass = t_ok && p_ok && sf_ok && bf_ok;
    return {pass, "t=" + fmt(r.t_statistic) + ", p=" + fmt(r.p_value) + ", max sf err vs normal " +
                      fmt(worst_sf) + ", bonferroni(0.01,250)==4e-5 " + (bf_ok ? "yes" : "NO")};
}

std::pair<bool, std::string> criterion_8() {
    // between-subgroup spread masks a small consistent within-subgroup shift
    const auto schema = std::make_shared<const AttributeSchema>(std::vector<Group>{
        {"attr", {"on", "off"}}, {"ctx", {"c0", "c1", "c2", "c3", "c4", "c5"}}});
    std::mt19937_64 rng(1859);
    std::normal_distribution<double> noise(0.0, 0.02);
    const double bases[] = {0.2, 0.3, 0.45, 0.55, 0.7, 0.8};
    std::vector<ScoreRecord> records;
    for (std::uint64_t c = 0; c < schema->combination_count(); ++c) {
        const Combination comb = schema->decode(c);
        const double mu = bases[comb.assignment[1]] + (comb.assignment[0] == 0 ? 0.02 : 0.0);
        for (int j = 0; j < 20; ++j)
            records.push_back({"s" + std::to_string(records.size()), c,
                               std::clamp(mu + noise(rng), 0.0, 1.0), SampleClass::synthetic});
    }
    const ScoreTable table(schema, std::move(records));
    const auto rows = compare_test_strategies(table);

    double classical = 0.0, paired = 1.0;
    for (const TestComparisonRow& row : rows) {
        if (row.group == "attr" && row.label == "on") {
            classical = row.classical_p;
            paired = row.paired_p;
        }
    }
    const bool pass = classical > 0.1 && paired < 0.01;
    return {pass, "classical p=" + fmt(classical) + " (>0.1), paired p=" + fmt(paired) +
                      " (<0.01)"};
}

std::pair<bool, std::string> criterion_9() {
    // (a) label swap negates brisk / signed brisk* / EOD bit-exactly
    std::mt19937_64 rng(909);
    bool swap_exact = true;
    for (int trial = 0; trial < 10; ++trial) {
        const auto schema = std::make_shared<const AttributeSchema>(std::vector<Group>{
            {"flag", {"yes", "no"}}, {"ctx", {"x", "y", "z"}}});
        const ScoreTable table = oracle::random_table(rng, schema, 6, 1.0);
        const AttributeBias a = compute_attribute_bias(table, {0, 0});
        const AttributeBias b = compute_attribute_bias(table, {0, 1});
        if (a.brisk != -b.brisk || a.eod != -b.eod ||
            a.star_signed.value != -b.star_signed.value)
            swap_exact = false;
    }

    // (b) score reflection + class swap on a fully dyadic table: every count,
    // breakpoint and weight is a small power-of-two rational, so the mirrored
    // walk is exact and the deltas negate bit for bit
    const auto schema = std::make_shared<const AttributeSchema>(
        std::vector<Group>{{"flag", {"yes", "no"}}, {"ctx", {"x", "y"}}});
    std::vector<ScoreRecord> records;
    std::mt19937_64 drng(4242);
    std::uniform_int_distribution<int> grid(1, 255);
    for (std::uint64_t c = 0; c < 4; ++c)
        for (int j = 0; j < 4; ++j)  // power-of-two bucket sizes
            records.push_back({"d" + std::to_string(records.size()), c, grid(drng) / 256.0,
                               SampleClass::synthetic});
    const ScoreTable dyadic(schema, std::move(records));
    std::vector<ScoreRecord> mirrored = dyadic.records();
    for (ScoreRecord& r : mirrored) {
        r.score = 1.0 - r.score;  // exact for dyadic scores
        r.cls = SampleClass::real;
    }
    const ScoreTable reflected(schema, std::move(mirrored));

    bool reflect_exact = true;
    for (std::size_t l = 0; l < 2; ++l) {
        const AttributeBias orig = compute_attribute_bias(dyadic, {0, l});
        const AttributeBias refl = classwise_rate_delta(reflected, {0, l}, SampleClass::real);
        if (refl.brisk != -orig.brisk || refl.eod != -orig.eod) reflect_exact = false;
        for (std::size_t i = 0; i < orig.subgroup_deltas.size(); ++i)
            if (refl.subgroup_deltas[i] != -orig.subgroup_deltas[i]) reflect_exact = false;
    }

    // (c) duplicating every record leaves every metric unchanged
    bool dup_exact = true;
    {
        const auto s = oracle::random_schema(rng, 3, 3);
        const ScoreTable table = oracle::random_table(rng, s, 5, 1.0);
        std::vector<ScoreRecord> tripled;
        for (int copy = 0; copy < 3; ++copy)
            for (const ScoreRecord& r : table.records()) tripled.push_back(r);
        const ScoreTable big(s, std::move(tripled));
        for (std::size_t g = 0; g < s->group_count(); ++g) {
            if (s->label_count(g) < 2) continue;
            for (std::size_t l = 0; l < s->label_count(g); ++l) {
                const AttributeBias a = compute_attribute_bias(table, {g, l});
                const AttributeBias b = compute_attribute_bias(big, {g, l});
                if (a.brisk != b.brisk || a.eod != b.eod ||
                    a.star_signed.value != b.star_signed.value ||
                    a.star_literal.value != b.star_literal.value ||
                    a.subgroup_deltas != b.subgroup_deltas)
                    dup_exact = false;
            }
        }
    }

    const bool pass = swap_exact && reflect_exact && dup_exact;
    return {pass, std::string("label swap ") + (swap_exact ? "exact" : "NOT exact") +
                      ", reflection " + (reflect_exact ? "exact" : "NOT exact") +
                      ", duplication " + (dup_exact ? "exact" : "NOT exact")};
}

std::pair<bool, std::string> criterion_10(const std::string& cli) {
    if (cli.empty()) return {false, "no biasaudit binary path supplied"};

    const fs::path work = fs::temp_directory_path() / "biasaudit_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    // inputs: a 3-group schema and a simulated score table
    const fs::path schema_path = work / "schema.json";
    {
        std::ofstream out(schema_path);
        out << R"({"groups":[{"name":"size","labels":["small","large"]},)"
            << R"({"name":"texture","labels":["smooth","wavy","rough"]},)"
            << R"({"name":"tint","labels":["warm","cool","neutral"]}]})";
    }
    SimSpec spec;
    spec.schema = planted_schema();
    spec.base_mean = 0.6;
    spec.base_std = 0.05;
    spec.samples_per_combination = 30;
    spec.seed = 1010;
    spec.effects = {{1, 2, 0.06, std::nullopt}};
    const fs::path scores_path = work / "scores.csv";
    simulate(spec).write_csv(scores_path);

    const auto run_once = [&](const fs::path& out_dir) {
        std::ostringstream cmd;
        cmd << cli << " audit --schema " << schema_path << " --scores " << scores_path
            << ":det --alpha 0.01 --seed 5 --out " << out_dir << " > " << (out_dir.string() + ".log")
            << " 2>&1";
        return std::system(cmd.str().c_str());
    };
    const int rc1 = run_once(work / "run1");
    const int rc2 = run_once(work / "run2");
    if (rc1 != 0 || rc2 != 0)
        return {false, "CLI exited with " + std::to_string(rc1) + "/" + std::to_string(rc2)};

    const auto read_without_timestamp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream kept;
        std::string line;
        while (std::getline(in, line))
            if (line.find("generated_at") == std::string::npos) kept << line << '\n';
        return kept.str();
    };
    const bool json_same = read_without_timestamp(work / "run1" / "report.json") ==
                           read_without_timestamp(work / "run2" / "report.json");
    const auto read_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string csv1 = read_bytes(work / "run1" / "report.csv");
    const bool csv_same = !csv1.empty() && csv1 == read_bytes(work / "run2" / "report.csv");

    const bool pass = json_same && csv_same;
    return {pass, std::string("json ") + (json_same ? "identical" : "DIFFERS") + ", csv " +
                      (csv_same ? "identical" : "DIFFERS")};
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const auto start = std::chrono::steady_clock::now();

    run(1, "combination arithmetic on the shipped schema", criterion_1);
    run(2, "closed-form integral identity + Riemann oracle", criterion_2);
    run(3, "conditional-Gaussian oracle (brisk, EOD@0.6)", criterion_3);
    run(4, "planted-effect recovery with Bonferroni gate", criterion_4);
    run(5, "balanced-data identity and adversarial divergence", criterion_5);
    run(6, "subsample sweep stability", criterion_6);
    run(7, "statistical kernels", criterion_7);
    run(8, "classical-vs-paired inversion", criterion_8);
    run(9, "symmetry suite", criterion_9);
    run(10, "CLI byte-determinism", [&] { return criterion_10(cli); });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria FAILED")
              << " in " << fmt(elapsed_ms(start) / 1000.0) << " s" << std::endl;
    return failures;
}
