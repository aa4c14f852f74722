#include "biasaudit/score_store.hpp"

#include "biasaudit/errors.hpp"
#include "biasaudit/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace biasaudit {

std::string_view to_string(SampleClass c) {
    return c == SampleClass::synthetic ? "synthetic" : "real";
}

double TprStep::eval(double t) const {
    // first unique value >= t; everything from there on counts
    const auto it = std::lower_bound(values.begin(), values.end(), t);
    if (it == values.end()) return 0.0;
    const auto i = static_cast<std::size_t>(it - values.begin());
    return static_cast<double>(ge_count[i]) / static_cast<double>(n);
}

TprStep tpr_step(std::span<const double> scores) {
    if (scores.empty()) throw EmptyBucketError("tpr_step on empty bucket");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());

    TprStep step;
    step.n = sorted.size();
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        step.values.push_back(sorted[i]);
        step.ge_count.push_back(sorted.size() - i);
        i = j;
    }
    return step;
}

double mean_score(std::span<const double> scores) {
    if (scores.empty()) throw EmptyBucketError("mean_score on empty bucket");
    return compensated_mean(scores);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

double parse_score(const std::string& text, std::size_t line_no) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ValidationError("line " + std::to_string(line_no) + ": non-numeric score '" + text + "'");
    if (!std::isfinite(value) || value < 0.0 || value > 1.0)
        throw ValidationError("line " + std::to_string(line_no) + ": score " + text +
                              " outside [0,1]");
    return value;
}

} // namespace

ScoreTable::ScoreTable(std::shared_ptr<const AttributeSchema> schema,
                       std::vector<ScoreRecord> records, std::string detector, std::string dataset)
    : schema_(std::move(schema)),
      records_(std::move(records)),
      detector_(std::move(detector)),
      dataset_(std::move(dataset)) {
    if (!schema_) throw ValidationError("score table requires a schema");
    const std::uint64_t count = schema_->combination_count();
    for (const ScoreRecord& r : records_) {
        if (r.combination >= count)
            throw ValidationError("record '" + r.sample_id + "' has combination index out of range");
        if (!std::isfinite(r.score) || r.score < 0.0 || r.score > 1.0)
            throw ValidationError("record '" + r.sample_id + "' has score outside [0,1]");
    }
    build_index();
}

void ScoreTable::build_index() {
    const auto count = static_cast<std::size_t>(schema_->combination_count());
    positive_buckets_.assign(count, {});
    negative_buckets_.assign(count, {});
    for (const ScoreRecord& r : records_) {
        auto& buckets = r.cls == SampleClass::synthetic ? positive_buckets_ : negative_buckets_;
        buckets[static_cast<std::size_t>(r.combination)].push_back(r.score);
    }
    for (auto& b : positive_buckets_) std::sort(b.begin(), b.end());
    for (auto& b : negative_buckets_) std::sort(b.begin(), b.end());
}

std::uint64_t ScoreTable::class_count(SampleClass cls) const {
    std::uint64_t n = 0;
    for (const ScoreRecord& r : records_)
        if (r.cls == cls) ++n;
    return n;
}

std::span<const double> ScoreTable::combination_scores(std::uint64_t combination,
                                                       SampleClass cls) const {
    const auto& buckets = cls == SampleClass::synthetic ? positive_buckets_ : negative_buckets_;
    return buckets.at(static_cast<std::size_t>(combination));
}

std::vector<double> ScoreTable::bucket(AttributeRef attr, std::uint64_t subgroup_index, bool x,
                                       SampleClass cls) const {
    schema_->check_attr(attr);
    std::vector<double> out;
    const std::size_t label_count = schema_->label_count(attr.group);
    for (std::size_t l = 0; l < label_count; ++l) {
        if (x != (l == attr.label)) continue;
        const auto span = combination_scores(schema_->combine(attr, l, subgroup_index), cls);
        out.insert(out.end(), span.begin(), span.end());
    }
    return out;
}

ScoreTable ScoreTable::load_csv(const std::filesystem::path& path,
                                std::shared_ptr<const AttributeSchema> schema,
                                std::string detector, std::string dataset) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scores file: " + path.string());
    if (detector.empty()) detector = path.stem().string();
    return load_csv(in, std::move(schema), std::move(detector), std::move(dataset), path.string());
}

ScoreTable ScoreTable::load_csv(std::istream& in, std::shared_ptr<const AttributeSchema> schema,
                                std::string detector, std::string dataset,
                                const std::string& origin) {
    if (!schema) throw ValidationError("load_csv requires a schema");

    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(origin + ": empty scores file (missing header)");

    const std::vector<std::string> header = split_csv_line(line);
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!column.emplace(header[i], i).second)
            throw ValidationError(origin + ": duplicate column '" + header[i] + "'");
    }

    std::vector<std::string> warnings;
    const auto require = [&](const std::string& name) {
        const auto it = column.find(name);
        if (it == column.end())
            throw ValidationError(origin + ": missing required column '" + name + "'");
        return it->second;
    };
    const std::size_t id_col = require("sample_id");
    const std::size_t score_col = require("score");
    const std::size_t class_col = require("class");
    std::vector<std::size_t> group_cols;
    for (const Group& g : schema->groups()) group_cols.push_back(require(g.name));

    std::unordered_set<std::size_t> known{id_col, score_col, class_col};
    known.insert(group_cols.begin(), group_cols.end());
    for (std::size_t i = 0; i < header.size(); ++i)
        if (!known.count(i))
            warnings.push_back("ignoring unknown column '" + header[i] + "'");

    std::vector<ScoreRecord> records;
    std::unordered_set<std::string> seen_ids;
    std::size_t duplicate_ids = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ValidationError(origin + ": line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));

        ScoreRecord rec;
        rec.sample_id = cells[id_col];
        if (!seen_ids.insert(rec.sample_id).second) ++duplicate_ids;
        rec.score = parse_score(cells[score_col], line_no);

        const std::string& cls = cells[class_col];
        if (cls == "synthetic")
            rec.cls = SampleClass::synthetic;
        else if (cls == "real")
            rec.cls = SampleClass::real;
        else
            throw ValidationError(origin + ": line " + std::to_string(line_no) +
                                  ": class must be 'synthetic' or 'real', got '" + cls + "'");

        Combination c;
        c.assignment.reserve(schema->group_count());
        for (std::size_t g = 0; g < schema->group_count(); ++g) {
            const std::string& label = cells[group_cols[g]];
            const auto ref = schema->find_label(schema->group_name(g), label);
            if (!ref)
                throw ValidationError(origin + ": line " + std::to_string(line_no) +
                                      ": unknown label '" + label + "' for group '" +
                                      schema->group_name(g) + "'");
            c.assignment.push_back(ref->label);
        }
        rec.combination = schema->encode(c);
        records.push_back(std::move(rec));
    }
    if (duplicate_ids > 0)
        warnings.push_back(std::to_string(duplicate_ids) + " duplicate sample_id value(s)");

    ScoreTable table(std::move(schema), std::move(records), std::move(detector),
                     std::move(dataset));
    table.warnings_ = std::move(warnings);
    return table;
}

void ScoreTable::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path.string());
    write_csv(out);
    if (!out) throw IoError("write failed: " + path.string());
}

void ScoreTable::write_csv(std::ostream& out) const {
    out << "sample_id,score,class";
    for (const Group& g : schema_->groups()) out << ',' << g.name;
    out << '\n';
    char buf[32];
    for (const ScoreRecord& r : records_) {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), r.score);
        out << r.sample_id << ',' << std::string_view(buf, ptr) << ',' << to_string(r.cls);
        const Combination c = schema_->decode(r.combination);
        for (std::size_t g = 0; g < c.assignment.size(); ++g)
            out << ',' << schema_->groups()[g].labels[c.assignment[g]];
        out << '\n';
    }
}

} // namespace biasaudit
