#pragma once

#include "biasaudit/schema.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace biasaudit {

/// Classifier output class of a sample. positive = synthetic (fake),
/// negative = real (pristine).
enum class SampleClass : std::uint8_t { synthetic = 0, real = 1 };

std::string_view to_string(SampleClass c);

struct ScoreRecord {
    std::string sample_id;
    std::uint64_t combination = 0;  // encoded label assignment
    double score = 0.0;             // in [0,1]
    SampleClass cls = SampleClass::synthetic;
};

/// Empirical TPR step function of one score multiset: tpr(t) = fraction of
/// scores >= t. Non-increasing, tpr(0) = 1, tpr(t) = 0 past the maximum
/// score. Ties at the threshold count as detected.
struct TprStep {
    std::vector<double> values;           // sorted unique score values
    std::vector<std::uint64_t> ge_count;  // # scores >= values[i]
    std::uint64_t n = 0;

    double eval(double t) const;
};

TprStep tpr_step(std::span<const double> scores);

/// Arithmetic mean with compensated summation. Throws EmptyBucketError on
/// an empty multiset.
double mean_score(std::span<const double> scores);

/// Validated, schema-indexed collection of score records for one
/// detector/dataset pair. Immutable after construction; the per-combination
/// bucket index is built once, so every bucket query is O(bucket size).
class ScoreTable {
public:
    ScoreTable(std::shared_ptr<const AttributeSchema> schema, std::vector<ScoreRecord> records,
               std::string detector = "", std::string dataset = "");

    /// Parses the score CSV format (header: sample_id,score,class,<one column
    /// per schema group>). Errors carry the 1-based file line. Duplicate
    /// sample ids and unknown extra columns are warnings, not errors.
    static ScoreTable load_csv(const std::filesystem::path& path,
                               std::shared_ptr<const AttributeSchema> schema,
                               std::string detector = "", std::string dataset = "");
    static ScoreTable load_csv(std::istream& in, std::shared_ptr<const AttributeSchema> schema,
                               std::string detector = "", std::string dataset = "",
                               const std::string& origin = "<stream>");

    void write_csv(const std::filesystem::path& path) const;
    void write_csv(std::ostream& out) const;

    const AttributeSchema& schema() const { return *schema_; }
    std::shared_ptr<const AttributeSchema> schema_ptr() const { return schema_; }
    const std::vector<ScoreRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    std::uint64_t class_count(SampleClass cls) const;

    const std::string& detector() const { return detector_; }
    const std::string& dataset() const { return dataset_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Sorted scores of one full combination and class.
    std::span<const double> combination_scores(std::uint64_t combination, SampleClass cls) const;

    /// Scores of records matching (attr present/absent, subgroup, class).
    /// x = true selects the attribute's own label; x = false pools every
    /// sibling label of the same group. Empty result is a value, not an error.
    std::vector<double> bucket(AttributeRef attr, std::uint64_t subgroup_index, bool x,
                               SampleClass cls) const;

private:
    std::shared_ptr<const AttributeSchema> schema_;
    std::vector<ScoreRecord> records_;
    std::string detector_;
    std::string dataset_;
    std::vector<std::string> warnings_;
    // bucket index: scores per (combination, class), sorted ascending
    std::vector<std::vector<double>> positive_buckets_;
    std::vector<std::vector<double>> negative_buckets_;

    void build_index();
    friend class ScoreTableBuilder;
};

} // namespace biasaudit
