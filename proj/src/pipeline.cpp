#include "biasaudit/pipeline.hpp"

#include "biasaudit/errors.hpp"
#include "biasaudit/numeric.hpp"
#include "biasaudit/simulator.hpp"
#include "biasaudit/svg.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace biasaudit {

namespace {

constexpr const char* kToolVersion = "0.1.0";

using ojson = nlohmann::ordered_json;

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

ojson json_num(double v) {
    if (std::isfinite(v)) return v;
    return fmt_double(v);
}

std::string iso_utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "unnamed" : out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

// --- attribute universe -----------------------------------------------------

struct AuditAttr {
    AttributeRef ref;
    std::string group;
    std::string label;
    std::optional<std::size_t> pairwise;  // sibling index the absent side is restricted to
};

bool filter_matches(const std::vector<std::string>& filter, const std::string& group,
                    const std::string& label) {
    if (filter.empty()) return true;
    const std::string qualified = group + "." + label;
    for (const std::string& f : filter)
        if (f == label || f == qualified) return true;
    return false;
}

std::vector<AuditAttr> resolve_universe(const AttributeSchema& schema, const AuditOptions& opts) {
    std::vector<AuditAttr> attrs;
    if (opts.pairwise_label) {
        auto target = schema.find_label_unique(*opts.pairwise_label);
        if (!target) {
            // maybe group.label qualified
            const auto dot = opts.pairwise_label->find('.');
            if (dot != std::string::npos)
                target = schema.find_label(opts.pairwise_label->substr(0, dot),
                                           opts.pairwise_label->substr(dot + 1));
        }
        if (!target)
            throw ValidationError("pairwise comparison label '" + *opts.pairwise_label +
                                  "' not found (or ambiguous) in the schema");
        const std::size_t g = target->group;
        for (std::size_t l = 0; l < schema.label_count(g); ++l) {
            if (l == target->label) continue;
            const std::string& label = schema.groups()[g].labels[l];
            if (!filter_matches(opts.attribute_filter, schema.group_name(g), label)) continue;
            attrs.push_back({AttributeRef{g, l}, schema.group_name(g), label, target->label});
        }
        if (attrs.empty())
            throw ValidationError("pairwise comparison against '" + *opts.pairwise_label +
                                  "' leaves no attributes to audit");
        return attrs;
    }
    for (std::size_t g = 0; g < schema.group_count(); ++g) {
        for (std::size_t l = 0; l < schema.label_count(g); ++l) {
            const std::string& label = schema.groups()[g].labels[l];
            if (!filter_matches(opts.attribute_filter, schema.group_name(g), label)) continue;
            attrs.push_back({AttributeRef{g, l}, schema.group_name(g), label, std::nullopt});
        }
    }
    if (attrs.empty()) throw ValidationError("attribute filter leaves nothing to audit");
    return attrs;
}

MetricOptions metric_options(const AuditAttr& attr, const AuditOptions& opts) {
    MetricOptions mo;
    mo.cls = opts.cls;
    mo.pairwise_label = attr.pairwise;
    return mo;
}

AttributeReport audit_attribute(const ScoreTable& table, const AuditAttr& attr,
                                const AuditOptions& opts) {
    AttributeReport rep;
    rep.group = attr.group;
    rep.label = attr.label;

    const MetricOptions mo = metric_options(attr, opts);
    try {
        rep.bias = compute_attribute_bias(table, attr.ref, mo, opts.eod_spec);
    } catch (const NotMeasurableError& e) {
        rep.status = AttributeStatus::not_measurable;
        rep.note = e.what();
        return rep;
    }

    const double total =
        static_cast<double>(rep.bias.subgroups_used + rep.bias.subgroups_skipped);
    if (static_cast<double>(rep.bias.subgroups_skipped) > opts.max_skip_fraction * total) {
        rep.status = AttributeStatus::skip_limit_exceeded;
        rep.note = "skipped " + std::to_string(rep.bias.subgroups_skipped) + " of " +
                   std::to_string(static_cast<std::uint64_t>(total)) +
                   " subgroups (limit " + fmt_double(opts.max_skip_fraction) + ")";
    }

    if (rep.bias.subgroup_deltas.size() >= 2) {
        rep.test = paired_ttest(rep.bias.subgroup_deltas);
        rep.test_method = TestMethod::paired;
    } else {
        // one usable subgroup: pairing is void, report the unpaired pooled test
        try {
            const auto [present, absent] = pooled_sides(table, attr.ref, mo);
            rep.test = two_sample_ttest(present, absent);
            rep.test_method = TestMethod::welch_fallback;
        } catch (const ValidationError& e) {
            rep.test_method = TestMethod::none;
            if (!rep.note.empty()) rep.note += "; ";
            rep.note += e.what();
        }
    }
    return rep;
}

double metric_value(const AttributeReport& rep, BiasMetric metric, BriskStarMode mode) {
    if (metric == BiasMetric::brisk) return rep.bias.brisk;
    return mode == BriskStarMode::signed_extremum ? rep.bias.star_signed.value
                                                  : rep.bias.star_literal.value;
}

// --- emission helpers --------------------------------------------------------

const AttributeReport* find_attribute(const DetectorReport& det, const std::string& group,
                                      const std::string& label) {
    for (const AttributeReport& a : det.attributes)
        if (a.group == group && a.label == label) return &a;
    return nullptr;
}

ojson options_json(const BiasReportSet& set) {
    const AuditOptions& o = set.options;
    ojson j;
    j["alpha"] = o.alpha;
    j["bonferroni_m"] = set.bonferroni_m;
    j["m_source"] = o.m_override ? "override" : "executed";
    j["significance_threshold"] = set.significance_threshold;
    j["executed_tests"] = set.executed_tests;
    j["brisk_star_mode"] =
        o.star_mode == BriskStarMode::signed_extremum ? "signed" : "literal";
    j["eod_mode"] = o.eod_spec.kind == EodSpec::Kind::integrated ? "integrated" : "threshold";
    if (o.eod_spec.kind == EodSpec::Kind::at_threshold)
        j["eod_threshold"] = o.eod_spec.threshold;
    j["comparison"] = o.pairwise_label ? "pairwise" : "pooled";
    if (o.pairwise_label) j["pairwise_label"] = *o.pairwise_label;
    j["max_skip_fraction"] = o.max_skip_fraction;
    j["class"] = std::string(to_string(o.cls));
    j["seed"] = o.seed;
    j["attribute_filter"] = o.attribute_filter;
    j["attributes"] = set.attribute_names;
    return j;
}

ojson attribute_json(const AttributeReport& a, BriskStarMode mode) {
    ojson j;
    j["group"] = a.group;
    j["label"] = a.label;
    j["status"] = std::string(to_string(a.status));
    if (a.status != AttributeStatus::not_measurable) {
        const BriskStar& configured =
            mode == BriskStarMode::signed_extremum ? a.bias.star_signed : a.bias.star_literal;
        j["brisk"] = json_num(a.bias.brisk);
        j["brisk_star"] = json_num(configured.value);
        j["brisk_star_threshold"] = json_num(configured.threshold);
        j["brisk_star_signed"] = json_num(a.bias.star_signed.value);
        j["brisk_star_signed_threshold"] = json_num(a.bias.star_signed.threshold);
        j["brisk_star_literal"] = json_num(a.bias.star_literal.value);
        j["brisk_star_literal_threshold"] = json_num(a.bias.star_literal.threshold);
        j["eod"] = json_num(a.bias.eod);
        j["subgroups_used"] = a.bias.subgroups_used;
        j["subgroups_skipped"] = a.bias.subgroups_skipped;
        if (!a.bias.subgroup_deltas.empty()) {
            const auto [lo, hi] = std::minmax_element(a.bias.subgroup_deltas.begin(),
                                                      a.bias.subgroup_deltas.end());
            ojson summary;
            summary["min"] = json_num(*lo);
            summary["max"] = json_num(*hi);
            summary["mean"] = json_num(compensated_mean(a.bias.subgroup_deltas));
            j["subgroup_delta_summary"] = summary;
        }
    }
    if (a.test_method != TestMethod::none) {
        ojson t;
        t["method"] = std::string(to_string(a.test_method));
        t["t_statistic"] = json_num(a.test.t_statistic);
        t["df"] = json_num(a.test.degrees_of_freedom);
        t["p_value"] = json_num(a.test.p_value);
        t["n"] = a.test.n;
        t["mean_diff"] = json_num(a.test.mean_diff);
        t["degenerate"] = a.test.degenerate;
        j["test"] = t;
        j["significant"] = a.significant;
    }
    if (!a.note.empty()) j["note"] = a.note;
    return j;
}

} // namespace

std::string_view to_string(AttributeStatus s) {
    switch (s) {
        case AttributeStatus::ok: return "ok";
        case AttributeStatus::skip_limit_exceeded: return "skip_limit_exceeded";
        case AttributeStatus::not_measurable: return "not_measurable";
    }
    return "?";
}

std::string_view to_string(TestMethod m) {
    switch (m) {
        case TestMethod::paired: return "paired";
        case TestMethod::welch_fallback: return "welch_fallback";
        case TestMethod::none: return "none";
    }
    return "?";
}

bool BiasReportSet::any_failure() const {
    for (const DetectorReport& d : detectors)
        for (const AttributeReport& a : d.attributes)
            if (a.status != AttributeStatus::ok) return true;
    return false;
}

BiasReportSet run_audit(std::span<const ScoreTable> tables, const AuditOptions& opts) {
    if (tables.empty()) throw ValidationError("audit needs at least one score table");
    const AttributeSchema& schema = tables.front().schema();
    for (const ScoreTable& t : tables)
        if (&t.schema() != &schema && t.schema().combination_count() != schema.combination_count())
            throw ValidationError("score tables use different schemas");

    const std::vector<AuditAttr> universe = resolve_universe(schema, opts);

    BiasReportSet set;
    set.options = opts;
    for (const AuditAttr& a : universe) set.attribute_names.push_back(a.group + "." + a.label);

    for (const ScoreTable& table : tables) {
        DetectorReport det;
        det.name = table.detector();
        det.dataset = table.dataset();
        det.rows = table.size();
        det.warnings = table.warnings();
        for (const AuditAttr& attr : universe)
            det.attributes.push_back(audit_attribute(table, attr, opts));
        set.detectors.push_back(std::move(det));
    }

    for (const DetectorReport& d : set.detectors)
        for (const AttributeReport& a : d.attributes)
            if (a.test_method != TestMethod::none) ++set.executed_tests;

    set.bonferroni_m = opts.m_override.value_or(std::max<std::uint64_t>(set.executed_tests, 1));
    if (set.bonferroni_m < set.executed_tests)
        throw ValidationError("Bonferroni m override (" + std::to_string(set.bonferroni_m) +
                              ") is below the executed test count (" +
                              std::to_string(set.executed_tests) + ")");
    set.significance_threshold = bonferroni(opts.alpha, set.bonferroni_m);

    for (DetectorReport& d : set.detectors)
        for (AttributeReport& a : d.attributes)
            a.significant = a.test_method != TestMethod::none &&
                            a.test.p_value < set.significance_threshold;
    return set;
}

CorrelationMatrix compare_detectors(const BiasReportSet& reports, BiasMetric metric,
                                    CorrelationMethod method) {
    if (reports.detectors.size() < 2)
        throw ValidationError("inter-detector correlation needs at least 2 detectors");

    // attributes with valid metrics in every detector, in universe order
    std::vector<std::pair<std::string, std::string>> shared;
    for (const std::string& name : reports.attribute_names) {
        const auto dot = name.find('.');
        const std::string group = name.substr(0, dot);
        const std::string label = name.substr(dot + 1);
        bool everywhere = true;
        for (const DetectorReport& det : reports.detectors) {
            const AttributeReport* a = find_attribute(det, group, label);
            if (!a) throw ValidationError("detector '" + det.name + "' lacks attribute '" + name +
                                          "': attribute sets differ");
            if (a->status == AttributeStatus::not_measurable) everywhere = false;
        }
        if (everywhere) shared.emplace_back(group, label);
    }
    if (shared.size() < 2)
        throw ValidationError("fewer than 2 attributes measurable across all detectors");

    CorrelationMatrix out;
    out.method = method;
    out.metric = metric;
    for (const auto& [g, l] : shared) out.attributes_used.push_back(g + "." + l);

    std::vector<std::vector<double>> vectors;
    for (const DetectorReport& det : reports.detectors) {
        out.names.push_back(det.name);
        std::vector<double> v;
        for (const auto& [g, l] : shared)
            v.push_back(metric_value(*find_attribute(det, g, l), metric,
                                     reports.options.star_mode));
        vectors.push_back(std::move(v));
    }
    out.values = correlation_matrix(vectors, method);
    return out;
}

std::vector<ProportionCorrelation> correlate_with_proportions(
    const BiasReportSet& reports, const std::map<std::string, double>& proportions,
    BiasMetric metric, CorrelationMethod method) {
    std::vector<ProportionCorrelation> out;
    for (const DetectorReport& det : reports.detectors) {
        ProportionCorrelation pc;
        pc.detector = det.name;
        std::vector<double> bias, prop;
        for (const AttributeReport& a : det.attributes) {
            if (a.status == AttributeStatus::not_measurable) continue;
            auto it = proportions.find(a.group + "." + a.label);
            if (it == proportions.end()) it = proportions.find(a.label);
            if (it == proportions.end()) {
                pc.missing.push_back(a.group + "." + a.label);
                continue;
            }
            bias.push_back(metric_value(a, metric, reports.options.star_mode));
            prop.push_back(it->second);
        }
        if (bias.size() < 2)
            throw ValidationError("detector '" + det.name +
                                  "': fewer than 2 attributes overlap the proportions map");
        pc.attributes_used = bias.size();
        pc.result = correlation(bias, prop, method);
        out.push_back(std::move(pc));
    }
    return out;
}

std::map<std::string, double> load_proportions_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open proportions file: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(path.string() + ": empty proportions file");
    // tolerate a UTF-8 BOM and trailing CR
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "attribute,proportion")
        throw ValidationError(path.string() + ": expected header 'attribute,proportion', got '" +
                              line + "'");

    std::map<std::string, double> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                                  ": expected 'attribute,proportion'");
        const std::string attr = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        double p = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), p);
        if (ec != std::errc() || ptr != value.data() + value.size() || !(p >= 0.0 && p <= 1.0))
            throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                                  ": proportion must be a number in [0,1]");
        if (!out.emplace(attr, p).second)
            throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                                  ": duplicate attribute '" + attr + "'");
    }
    return out;
}

std::vector<TestComparisonRow> compare_test_strategies(const ScoreTable& table,
                                                       const AuditOptions& opts) {
    const std::vector<AuditAttr> universe = resolve_universe(table.schema(), opts);
    std::vector<TestComparisonRow> rows;
    for (const AuditAttr& attr : universe) {
        const MetricOptions mo = metric_options(attr, opts);
        AttributeBias bias;
        try {
            bias = compute_attribute_bias(table, attr.ref, mo, opts.eod_spec);
        } catch (const NotMeasurableError&) {
            continue;
        }
        TestComparisonRow row;
        row.group = attr.group;
        row.label = attr.label;
        row.subgroups_used = bias.subgroups_used;
        try {
            const auto [present, absent] = pooled_sides(table, attr.ref, mo);
            row.classical_p = two_sample_ttest(present, absent).p_value;
            if (bias.subgroup_deltas.size() >= 2) {
                row.paired_p = paired_ttest(bias.subgroup_deltas).p_value;
                row.paired_method = TestMethod::paired;
            } else {
                row.paired_p = row.classical_p;  // single subgroup: same contrast
                row.paired_method = TestMethod::welch_fallback;
            }
        } catch (const ValidationError&) {
            continue;  // too few samples for the classical test
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.classical_p - a.paired_p > b.classical_p - b.paired_p;
    });
    return rows;
}

SweepResult subsample_sweep(const ScoreTable& table, std::span<const double> fractions,
                            std::uint64_t repetitions, std::uint64_t seed,
                            const AuditOptions& opts) {
    if (repetitions < 1) throw ValidationError("sweep needs at least 1 repetition");
    for (double f : fractions)
        if (!(f > 0.0 && f <= 1.0))
            throw ValidationError("sweep fractions must lie in (0,1], got " + fmt_double(f));

    const std::vector<AuditAttr> universe = resolve_universe(table.schema(), opts);

    const auto mean_abs_eod = [&](const ScoreTable& t, std::uint64_t* excluded) -> std::optional<double> {
        KahanSum sum;
        std::size_t counted = 0;
        for (const AuditAttr& attr : universe) {
            try {
                sum.add(std::fabs(eod(t, attr.ref, opts.eod_spec, metric_options(attr, opts))));
                ++counted;
            } catch (const NotMeasurableError&) {
                if (excluded) ++*excluded;
            }
        }
        if (counted == 0) return std::nullopt;
        return sum.value() / static_cast<double>(counted);
    };

    SweepResult result;
    result.repetitions = repetitions;
    result.full_mean_abs_eod = mean_abs_eod(table, nullptr).value_or(0.0);
    {
        KahanSum sum;
        std::size_t counted = 0;
        for (const AuditAttr& attr : universe) {
            try {
                sum.add(std::fabs(brisk(table, attr.ref, metric_options(attr, opts))));
                ++counted;
            } catch (const NotMeasurableError&) {
            }
        }
        if (counted > 0) result.full_mean_abs_brisk = sum.value() / static_cast<double>(counted);
    }

    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        SweepCell cell;
        cell.fraction = fractions[fi];
        for (std::uint64_t r = 0; r < repetitions; ++r) {
            const std::uint64_t rep_seed = seed * 0x10001ull + fi * repetitions + r;
            const ScoreTable sub = subsample(table, fractions[fi], rep_seed);
            const auto value = mean_abs_eod(sub, &cell.attrs_excluded_total);
            if (value)
                cell.rep_values.push_back(*value);
            else
                ++cell.failed_reps;
        }
        if (!cell.rep_values.empty()) {
            cell.mean_abs_eod = compensated_mean(cell.rep_values);
            bool constant = true;
            for (double v : cell.rep_values)
                if (v != cell.rep_values.front()) constant = false;
            if (constant) {
                cell.std_abs_eod = 0.0;  // fraction 1 repeats the identical table
            } else {
                KahanSum ss;
                for (double v : cell.rep_values) {
                    const double d = v - cell.mean_abs_eod;
                    ss.add(d * d);
                }
                cell.std_abs_eod =
                    std::sqrt(ss.value() / static_cast<double>(cell.rep_values.size()));
            }
        }
        result.cells.push_back(std::move(cell));
    }
    return result;
}

// --- emission ----------------------------------------------------------------

void emit_reports(const BiasReportSet& reports, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    ojson root;
    ojson meta;
    meta["tool"] = "biasaudit";
    meta["version"] = kToolVersion;
    meta["generated_at"] = iso_utc_now();
    const ojson opts_meta = options_json(reports);
    for (const auto& [key, value] : opts_meta.items()) meta[key] = value;
    root["metadata"] = meta;

    ojson detectors = ojson::array();
    for (const DetectorReport& det : reports.detectors) {
        ojson dj;
        dj["name"] = det.name;
        dj["dataset"] = det.dataset;
        dj["rows"] = det.rows;
        dj["warnings"] = det.warnings;
        ojson attrs = ojson::array();
        for (const AttributeReport& a : det.attributes)
            attrs.push_back(attribute_json(a, reports.options.star_mode));
        dj["attributes"] = attrs;
        detectors.push_back(dj);
    }
    root["detectors"] = detectors;
    write_text_file(out_dir / "report.json", root.dump(2) + "\n");

    std::ostringstream csv;
    csv << "detector,group,label,status,brisk,brisk_star_signed,brisk_star_signed_threshold,"
           "brisk_star_literal,brisk_star_literal_threshold,eod,subgroups_used,"
           "subgroups_skipped,test_method,t_statistic,df,p_value,significant,note\n";
    for (const DetectorReport& det : reports.detectors) {
        for (const AttributeReport& a : det.attributes) {
            csv << csv_safe(det.name) << ',' << a.group << ',' << a.label << ','
                << to_string(a.status) << ',';
            if (a.status != AttributeStatus::not_measurable) {
                csv << fmt_double(a.bias.brisk) << ',' << fmt_double(a.bias.star_signed.value)
                    << ',' << fmt_double(a.bias.star_signed.threshold) << ','
                    << fmt_double(a.bias.star_literal.value) << ','
                    << fmt_double(a.bias.star_literal.threshold) << ',' << fmt_double(a.bias.eod)
                    << ',' << a.bias.subgroups_used << ',' << a.bias.subgroups_skipped << ',';
            } else {
                csv << ",,,,,,,,";
            }
            csv << to_string(a.test_method) << ',';
            if (a.test_method != TestMethod::none) {
                csv << fmt_double(a.test.t_statistic) << ',' << fmt_double(a.test.degrees_of_freedom)
                    << ',' << fmt_double(a.test.p_value) << ','
                    << (a.significant ? "true" : "false") << ',';
            } else {
                csv << ",,,,";
            }
            csv << csv_safe(a.note) << '\n';
        }
    }
    write_text_file(out_dir / "report.csv", csv.str());

    for (const DetectorReport& det : reports.detectors) {
        std::vector<std::pair<std::string, double>> brisk_bars, star_bars;
        for (const AttributeReport& a : det.attributes) {
            if (a.status == AttributeStatus::not_measurable) continue;
            brisk_bars.emplace_back(a.label, a.bias.brisk);
            const BriskStar& star = reports.options.star_mode == BriskStarMode::signed_extremum
                                        ? a.bias.star_signed
                                        : a.bias.star_literal;
            star_bars.emplace_back(a.label, star.value);
        }
        if (brisk_bars.empty()) continue;
        const std::string stem = sanitize_filename(det.name);
        BarChartOptions opts;
        opts.title = det.name + ": brisk";
        write_text_file(out_dir / ("chart_brisk_" + stem + ".svg"),
                        bar_chart_svg(brisk_bars, opts));
        opts.title = det.name + ": brisk*";
        write_text_file(out_dir / ("chart_brisk_star_" + stem + ".svg"),
                        bar_chart_svg(star_bars, opts));
    }
}

void emit_correlation_matrix(const CorrelationMatrix& matrix,
                             const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    ojson j;
    j["metric"] = matrix.metric == BiasMetric::brisk ? "brisk" : "brisk_star";
    j["method"] = matrix.method == CorrelationMethod::pearson ? "pearson" : "spearman";
    j["detectors"] = matrix.names;
    j["attributes_used"] = matrix.attributes_used;
    ojson rows = ojson::array();
    for (const auto& row : matrix.values) {
        ojson r = ojson::array();
        for (double v : row) r.push_back(json_num(v));
        rows.push_back(r);
    }
    j["matrix"] = rows;
    write_text_file(out_dir / "correlation_matrix.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "detector";
    for (const std::string& n : matrix.names) csv << ',' << csv_safe(n);
    csv << '\n';
    for (std::size_t i = 0; i < matrix.names.size(); ++i) {
        csv << csv_safe(matrix.names[i]);
        for (double v : matrix.values[i]) csv << ',' << fmt_double(v);
        csv << '\n';
    }
    write_text_file(out_dir / "correlation_matrix.csv", csv.str());
}

void emit_proportion_correlations(const std::vector<ProportionCorrelation>& rows,
                                  const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::ostringstream csv;
    csv << "detector,method,coefficient,attributes_used,missing_attributes\n";
    ojson j = ojson::array();
    for (const ProportionCorrelation& pc : rows) {
        const char* method =
            pc.result.method == CorrelationMethod::pearson ? "pearson" : "spearman";
        csv << csv_safe(pc.detector) << ',' << method << ',' << fmt_double(pc.result.coefficient)
            << ',' << pc.attributes_used << ',' << pc.missing.size() << '\n';
        ojson e;
        e["detector"] = pc.detector;
        e["method"] = method;
        e["coefficient"] = json_num(pc.result.coefficient);
        e["attributes_used"] = pc.attributes_used;
        e["missing"] = pc.missing;
        j.push_back(e);
    }
    write_text_file(out_dir / "proportions_correlation.csv", csv.str());
    write_text_file(out_dir / "proportions_correlation.json", j.dump(2) + "\n");
}

void emit_test_comparison(const std::vector<TestComparisonRow>& rows,
                          const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::ostringstream csv;
    csv << "group,label,classical_p,paired_p,gap,paired_method,subgroups_used\n";
    ojson j = ojson::array();
    for (const TestComparisonRow& r : rows) {
        csv << r.group << ',' << r.label << ',' << fmt_double(r.classical_p) << ','
            << fmt_double(r.paired_p) << ',' << fmt_double(r.classical_p - r.paired_p) << ','
            << to_string(r.paired_method) << ',' << r.subgroups_used << '\n';
        ojson e;
        e["group"] = r.group;
        e["label"] = r.label;
        e["classical_p"] = json_num(r.classical_p);
        e["paired_p"] = json_num(r.paired_p);
        e["paired_method"] = std::string(to_string(r.paired_method));
        e["subgroups_used"] = r.subgroups_used;
        j.push_back(e);
    }
    write_text_file(out_dir / "test_comparison.csv", csv.str());
    write_text_file(out_dir / "test_comparison.json", j.dump(2) + "\n");
}

void emit_sweep(const SweepResult& sweep, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::ostringstream csv;
    csv << "fraction,mean_abs_eod,std_abs_eod,failed_reps,attrs_excluded_total\n";
    ojson cells = ojson::array();
    for (const SweepCell& c : sweep.cells) {
        csv << fmt_double(c.fraction) << ',' << fmt_double(c.mean_abs_eod) << ','
            << fmt_double(c.std_abs_eod) << ',' << c.failed_reps << ',' << c.attrs_excluded_total
            << '\n';
        ojson e;
        e["fraction"] = c.fraction;
        e["mean_abs_eod"] = json_num(c.mean_abs_eod);
        e["std_abs_eod"] = json_num(c.std_abs_eod);
        ojson reps = ojson::array();
        for (double v : c.rep_values) reps.push_back(json_num(v));
        e["rep_values"] = reps;
        e["failed_reps"] = c.failed_reps;
        e["attrs_excluded_total"] = c.attrs_excluded_total;
        cells.push_back(e);
    }
    ojson j;
    j["repetitions"] = sweep.repetitions;
    j["full_mean_abs_eod"] = json_num(sweep.full_mean_abs_eod);
    j["full_mean_abs_brisk"] = json_num(sweep.full_mean_abs_brisk);
    j["cells"] = cells;
    write_text_file(out_dir / "sweep.json", j.dump(2) + "\n");
    write_text_file(out_dir / "sweep.csv", csv.str());
}

BiasReportSet load_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": malformed report JSON: " + e.what());
    }

    BiasReportSet set;
    try {
        const auto& meta = doc.at("metadata");
        set.options.alpha = meta.value("alpha", 0.01);
        set.bonferroni_m = meta.value("bonferroni_m", std::uint64_t{1});
        set.significance_threshold = meta.value("significance_threshold", 0.0);
        set.executed_tests = meta.value("executed_tests", std::uint64_t{0});
        // the report's brisk_star column is already mode-resolved
        set.options.star_mode = BriskStarMode::signed_extremum;
        for (const auto& n : meta.at("attributes")) set.attribute_names.push_back(n);

        for (const auto& dj : doc.at("detectors")) {
            DetectorReport det;
            det.name = dj.at("name");
            det.dataset = dj.value("dataset", "");
            det.rows = dj.value("rows", std::size_t{0});
            for (const auto& aj : dj.at("attributes")) {
                AttributeReport a;
                a.group = aj.at("group");
                a.label = aj.at("label");
                const std::string status = aj.at("status");
                if (status == "ok")
                    a.status = AttributeStatus::ok;
                else if (status == "skip_limit_exceeded")
                    a.status = AttributeStatus::skip_limit_exceeded;
                else
                    a.status = AttributeStatus::not_measurable;
                if (a.status != AttributeStatus::not_measurable) {
                    a.bias.brisk = aj.at("brisk").get<double>();
                    const double star = aj.at("brisk_star").get<double>();
                    const double star_t = aj.at("brisk_star_threshold").get<double>();
                    a.bias.star_signed = {star, star_t};
                    a.bias.star_literal = {star, star_t};
                    a.bias.eod = aj.value("eod", 0.0);
                }
                det.attributes.push_back(std::move(a));
            }
            set.detectors.push_back(std::move(det));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": report JSON missing expected fields: " +
                              e.what());
    }
    return set;
}

} // namespace biasaudit
