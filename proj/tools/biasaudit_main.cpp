// biasaudit: attribute-conditioned bias audits of binary-classifier score
// tables. Subcommands: audit, simulate, corr, sweep, compare-tests.

#include "biasaudit/errors.hpp"
#include "biasaudit/pipeline.hpp"
#include "biasaudit/schema.hpp"
#include "biasaudit/score_store.hpp"
#include "biasaudit/simulator.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

using namespace biasaudit;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNotMeasurable = 4;

struct ScoresArg {
    std::string path;
    std::string name;
};

// "path.csv:name" -> {path.csv, name}; a bare path keeps its stem as name.
ScoresArg parse_scores_arg(const std::string& arg) {
    const auto colon = arg.rfind(':');
    if (colon != std::string::npos && colon + 1 < arg.size() && colon > 0) {
        const std::string suffix = arg.substr(colon + 1);
        if (suffix.find('/') == std::string::npos && suffix.find('.') == std::string::npos)
            return {arg.substr(0, colon), suffix};
    }
    return {arg, ""};
}

EodSpec parse_eod_mode(const std::string& mode) {
    if (mode == "integrated") return EodSpec::integrated();
    if (mode.rfind("threshold=", 0) == 0) {
        const std::string value = mode.substr(10);
        try {
            return EodSpec::at(std::stod(value));
        } catch (const std::exception&) {
            throw ValidationError("bad --eod-mode threshold value '" + value + "'");
        }
    }
    throw ValidationError("--eod-mode must be 'integrated' or 'threshold=T', got '" + mode + "'");
}

std::vector<std::string> read_attribute_filter(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open attribute list: " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line.erase(0, start);
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

struct CommonAuditFlags {
    double alpha = 0.01;
    std::uint64_t m_override = 0;
    std::string star_mode = "signed";
    std::string eod_mode = "integrated";
    std::string compare = "pooled";
    double max_skip = 0.1;
    std::string cls = "synthetic";
    std::string attributes_file;
    std::uint64_t seed = 0;
};

AuditOptions build_options(const CommonAuditFlags& flags) {
    AuditOptions opts;
    opts.alpha = flags.alpha;
    if (flags.m_override > 0) opts.m_override = flags.m_override;
    if (flags.star_mode == "signed")
        opts.star_mode = BriskStarMode::signed_extremum;
    else if (flags.star_mode == "literal")
        opts.star_mode = BriskStarMode::literal_max;
    else
        throw ValidationError("--brisk-star-mode must be 'signed' or 'literal'");
    opts.eod_spec = parse_eod_mode(flags.eod_mode);
    if (flags.compare.rfind("pairwise=", 0) == 0)
        opts.pairwise_label = flags.compare.substr(9);
    else if (flags.compare != "pooled")
        throw ValidationError("--compare must be 'pooled' or 'pairwise=LABEL'");
    opts.max_skip_fraction = flags.max_skip;
    if (flags.cls == "synthetic")
        opts.cls = SampleClass::synthetic;
    else if (flags.cls == "real")
        opts.cls = SampleClass::real;
    else
        throw ValidationError("--class must be 'synthetic' or 'real'");
    if (!flags.attributes_file.empty())
        opts.attribute_filter = read_attribute_filter(flags.attributes_file);
    opts.seed = flags.seed;
    return opts;
}

void add_common_flags(CLI::App* cmd, CommonAuditFlags& flags) {
    cmd->add_option("--alpha", flags.alpha, "significance level (default 0.01)");
    cmd->add_option("--m", flags.m_override,
                    "Bonferroni test-count override (default: executed tests)");
    cmd->add_option("--brisk-star-mode", flags.star_mode, "signed|literal (default signed)");
    cmd->add_option("--eod-mode", flags.eod_mode, "integrated|threshold=T (default integrated)");
    cmd->add_option("--compare", flags.compare, "pooled|pairwise=LABEL (default pooled)");
    cmd->add_option("--max-skip", flags.max_skip,
                    "max fraction of skipped subgroups per attribute (default 0.1)");
    cmd->add_option("--class", flags.cls, "score class to audit: synthetic|real");
    cmd->add_option("--attributes", flags.attributes_file,
                    "file with attribute names to audit, one per line");
    cmd->add_option("--seed", flags.seed, "seed recorded in report metadata");
}

std::vector<ScoreTable> load_tables(const std::vector<std::string>& scores_args,
                                    const std::shared_ptr<const AttributeSchema>& schema) {
    std::vector<ScoreTable> tables;
    for (const std::string& arg : scores_args) {
        const ScoresArg parsed = parse_scores_arg(arg);
        ScoreTable table = ScoreTable::load_csv(parsed.path, schema, parsed.name, parsed.path);
        for (const std::string& w : table.warnings())
            std::cerr << "warning: " << parsed.path << ": " << w << "\n";
        tables.push_back(std::move(table));
    }
    return tables;
}

int run_audit_cmd(const std::string& schema_path, const std::vector<std::string>& scores_args,
                  const CommonAuditFlags& flags, const std::string& out_dir) {
    const auto schema =
        std::make_shared<const AttributeSchema>(AttributeSchema::from_file(schema_path));
    const std::vector<ScoreTable> tables = load_tables(scores_args, schema);
    const AuditOptions opts = build_options(flags);

    const BiasReportSet reports = run_audit(tables, opts);
    emit_reports(reports, out_dir);

    for (const DetectorReport& det : reports.detectors) {
        std::size_t significant = 0, failed = 0;
        for (const AttributeReport& a : det.attributes) {
            if (a.significant) ++significant;
            if (a.status != AttributeStatus::ok) ++failed;
        }
        std::cout << det.name << ": " << det.attributes.size() << " attributes, " << significant
                  << " significant at p<" << reports.significance_threshold;
        if (failed > 0) std::cout << ", " << failed << " flagged/failed";
        std::cout << "\n";
    }
    std::cout << "report written to " << out_dir << "\n";
    return reports.any_failure() ? kExitNotMeasurable : kExitOk;
}

int run_simulate_cmd(const std::string& schema_path, const std::string& spec_path,
                     const std::string& out_path) {
    const auto schema =
        std::make_shared<const AttributeSchema>(AttributeSchema::from_file(schema_path));
    const SimSpec spec = SimSpec::from_file(spec_path, schema);
    const ScoreTable table = simulate(spec);
    table.write_csv(out_path);
    std::cout << "wrote " << table.size() << " records (" << schema->combination_count()
              << " combinations x k=" << spec.samples_per_combination << ") to " << out_path
              << "\n";
    return kExitOk;
}

int run_corr_cmd(const std::string& reports_dir, const std::string& proportions_path,
                 const std::string& method_name, const std::string& metric_name,
                 const std::string& out_dir) {
    const CorrelationMethod method = [&] {
        if (method_name == "pearson") return CorrelationMethod::pearson;
        if (method_name == "spearman") return CorrelationMethod::spearman;
        throw ValidationError("--method must be 'pearson' or 'spearman'");
    }();
    const BiasMetric metric = [&] {
        if (metric_name == "brisk") return BiasMetric::brisk;
        if (metric_name == "brisk_star") return BiasMetric::brisk_star;
        throw ValidationError("--metric must be 'brisk' or 'brisk_star'");
    }();

    const BiasReportSet reports =
        load_report_json(std::filesystem::path(reports_dir) / "report.json");

    if (reports.detectors.size() >= 2) {
        const CorrelationMatrix matrix = compare_detectors(reports, metric, method);
        emit_correlation_matrix(matrix, out_dir);
        std::cout << "correlation matrix over " << matrix.attributes_used.size()
                  << " attributes, " << matrix.names.size() << " detectors\n";
    } else {
        std::cout << "single detector: skipping inter-detector matrix\n";
    }

    if (!proportions_path.empty()) {
        const auto proportions = load_proportions_csv(proportions_path);
        const auto rows = correlate_with_proportions(reports, proportions, metric, method);
        emit_proportion_correlations(rows, out_dir);
        for (const ProportionCorrelation& pc : rows) {
            std::cout << pc.detector << ": r=" << pc.result.coefficient << " over "
                      << pc.attributes_used << " attributes";
            if (!pc.missing.empty()) std::cout << " (" << pc.missing.size() << " missing)";
            std::cout << "\n";
        }
    }
    std::cout << "correlation output written to " << out_dir << "\n";
    return kExitOk;
}

int run_sweep_cmd(const std::string& schema_path, const std::string& scores_arg,
                  const std::string& fractions_arg, std::uint64_t reps, std::uint64_t seed,
                  const CommonAuditFlags& flags, const std::string& out_dir) {
    const auto schema =
        std::make_shared<const AttributeSchema>(AttributeSchema::from_file(schema_path));
    const std::vector<ScoreTable> tables = load_tables({scores_arg}, schema);

    std::vector<double> fractions;
    std::stringstream ss(fractions_arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            fractions.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ValidationError("bad fraction '" + token + "' in --fractions");
        }
    }
    if (fractions.empty()) throw ValidationError("--fractions is empty");

    AuditOptions opts = build_options(flags);
    opts.seed = seed;
    const SweepResult sweep = subsample_sweep(tables.front(), fractions, reps, seed, opts);
    emit_sweep(sweep, out_dir);

    std::cout << "fraction  mean|EOD|  std|EOD|  (full |EOD| " << sweep.full_mean_abs_eod
              << ", full |brisk| " << sweep.full_mean_abs_brisk << ")\n";
    for (const SweepCell& c : sweep.cells)
        std::cout << c.fraction << "  " << c.mean_abs_eod << "  " << c.std_abs_eod << "\n";
    std::cout << "sweep written to " << out_dir << "\n";
    return kExitOk;
}

int run_compare_tests_cmd(const std::string& schema_path, const std::string& scores_arg,
                          const CommonAuditFlags& flags, const std::string& out_dir) {
    const auto schema =
        std::make_shared<const AttributeSchema>(AttributeSchema::from_file(schema_path));
    const std::vector<ScoreTable> tables = load_tables({scores_arg}, schema);
    const AuditOptions opts = build_options(flags);

    const auto rows = compare_test_strategies(tables.front(), opts);
    emit_test_comparison(rows, out_dir);

    std::cout << "attribute  classical_p  paired_p\n";
    for (std::size_t i = 0; i < rows.size() && i < 10; ++i)
        std::cout << rows[i].group << "." << rows[i].label << "  " << rows[i].classical_p << "  "
                  << rows[i].paired_p << "\n";
    std::cout << "comparison written to " << out_dir << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"biasaudit: attribute-conditioned bias audits of classifier score tables"};
    app.require_subcommand(1);

    // audit
    auto* audit = app.add_subcommand("audit", "full bias report for one or more score tables");
    std::string audit_schema, audit_out;
    std::vector<std::string> audit_scores;
    CommonAuditFlags audit_flags;
    audit->add_option("--schema", audit_schema, "schema JSON")->required();
    audit->add_option("--scores", audit_scores, "scores CSV, optionally path:name")->required();
    add_common_flags(audit, audit_flags);
    audit->add_option("--out", audit_out, "output directory")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic score table");
    std::string sim_schema, sim_spec, sim_out;
    simulate->add_option("--schema", sim_schema, "schema JSON")->required();
    simulate->add_option("--spec", sim_spec, "simulator spec JSON")->required();
    simulate->add_option("--out", sim_out, "output scores CSV")->required();

    // corr
    auto* corr = app.add_subcommand("corr", "detector and proportion correlation analyses");
    std::string corr_reports, corr_props, corr_method = "pearson", corr_metric = "brisk",
                              corr_out;
    corr->add_option("--reports", corr_reports, "directory containing report.json")->required();
    corr->add_option("--proportions", corr_props, "training-set proportions CSV");
    corr->add_option("--method", corr_method, "pearson|spearman (default pearson)");
    corr->add_option("--metric", corr_metric, "brisk|brisk_star (default brisk)");
    corr->add_option("--out", corr_out, "output directory")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "subsample-stability sweep of the EOD estimate");
    std::string sweep_schema, sweep_scores, sweep_fractions = "1,0.5,0.1,0.05,0.01", sweep_out;
    std::uint64_t sweep_reps = 20, sweep_seed = 7;
    CommonAuditFlags sweep_flags;
    sweep->add_option("--schema", sweep_schema, "schema JSON")->required();
    sweep->add_option("--scores", sweep_scores, "scores CSV")->required();
    sweep->add_option("--fractions", sweep_fractions, "comma list of fractions in (0,1]");
    sweep->add_option("--reps", sweep_reps, "repetitions per fraction (default 20)");
    sweep->add_option("--seed", sweep_seed, "subsample seed (default 7)");
    sweep->add_option("--max-skip", sweep_flags.max_skip, "unused for sweep; kept for symmetry");
    sweep->add_option("--class", sweep_flags.cls, "score class: synthetic|real");
    sweep->add_option("--out", sweep_out, "output directory")->required();

    // compare-tests
    auto* cmp = app.add_subcommand("compare-tests",
                                   "classical vs paired p-value comparison per attribute");
    std::string cmp_schema, cmp_scores, cmp_out;
    CommonAuditFlags cmp_flags;
    cmp->add_option("--schema", cmp_schema, "schema JSON")->required();
    cmp->add_option("--scores", cmp_scores, "scores CSV")->required();
    cmp->add_option("--class", cmp_flags.cls, "score class: synthetic|real");
    cmp->add_option("--compare", cmp_flags.compare, "pooled|pairwise=LABEL");
    cmp->add_option("--out", cmp_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (audit->parsed()) return run_audit_cmd(audit_schema, audit_scores, audit_flags, audit_out);
        if (simulate->parsed()) return run_simulate_cmd(sim_schema, sim_spec, sim_out);
        if (corr->parsed())
            return run_corr_cmd(corr_reports, corr_props, corr_method, corr_metric, corr_out);
        if (sweep->parsed())
            return run_sweep_cmd(sweep_schema, sweep_scores, sweep_fractions, sweep_reps,
                                 sweep_seed, sweep_flags, sweep_out);
        if (cmp->parsed()) return run_compare_tests_cmd(cmp_schema, cmp_scores, cmp_flags, cmp_out);
    } catch (const NotMeasurableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotMeasurable;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
