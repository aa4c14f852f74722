#pragma once

// Test-only reference machinery: brute-force recomputation straight from raw
// records, grid integration, and a normal CDF for the analytic cases. Kept
// independent of the library's bucket index / event-walk code paths.

#include "biasaudit/schema.hpp"
#include "biasaudit/score_store.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace oracle {

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// Mean of Normal(mu, sigma) clamped to [0,1], by direct case split.
inline double clipped_mean(double mu, double sigma) {
    const double a = (0.0 - mu) / sigma;
    const double g = (1.0 - mu) / sigma;
    return mu * (norm_cdf(g) - norm_cdf(a)) - sigma * (norm_pdf(g) - norm_pdf(a)) +
           (1.0 - norm_cdf(g));
}

// Fraction of scores >= t by direct counting.
inline double tpr_at(const std::vector<double>& scores, double t) {
    std::size_t n = 0;
    for (double s : scores)
        if (s >= t) ++n;
    return static_cast<double>(n) / static_cast<double>(scores.size());
}

// Midpoint-rule integral over [0,1].
inline double riemann(const std::function<double(double)>& f, int points = 10000) {
    const double h = 1.0 / points;
    double sum = 0.0;
    for (int i = 0; i < points; ++i) sum += f((i + 0.5) * h);
    return sum * h;
}

// All scores of one class whose decoded assignment satisfies a predicate,
// gathered by scanning the raw record list.
inline std::vector<double> filter_scores(
    const biasaudit::ScoreTable& table, biasaudit::SampleClass cls,
    const std::function<bool(const biasaudit::Combination&)>& pred) {
    std::vector<double> out;
    for (const biasaudit::ScoreRecord& r : table.records()) {
        if (r.cls != cls) continue;
        if (pred(table.schema().decode(r.combination))) out.push_back(r.score);
    }
    return out;
}

// Subgroup-averaged delta at one threshold, recomputed from raw records:
// enumerates subgroup assignments over the non-attr groups by brute force.
inline double averaged_delta_at(const biasaudit::ScoreTable& table, biasaudit::AttributeRef attr,
                                double t,
                                biasaudit::SampleClass cls = biasaudit::SampleClass::synthetic) {
    const auto& schema = table.schema();
    const std::uint64_t subgroups = schema.subgroup_count(attr);
    double total = 0.0;
    std::size_t used = 0;
    for (std::uint64_t sg = 0; sg < subgroups; ++sg) {
        const biasaudit::SubgroupKey key = schema.subgroup_key(attr, sg);
        const auto matches_key = [&](const biasaudit::Combination& c) {
            for (std::size_t slot = 0; slot < key.assignment.size(); ++slot) {
                const std::size_t g = slot < attr.group ? slot : slot + 1;
                if (c.assignment[g] != key.assignment[slot]) return false;
            }
            return true;
        };
        const auto present = filter_scores(table, cls, [&](const biasaudit::Combination& c) {
            return matches_key(c) && c.assignment[attr.group] == attr.label;
        });
        const auto absent = filter_scores(table, cls, [&](const biasaudit::Combination& c) {
            return matches_key(c) && c.assignment[attr.group] != attr.label;
        });
        if (present.empty() || absent.empty()) continue;
        total += tpr_at(present, t) - tpr_at(absent, t);
        ++used;
    }
    return total / static_cast<double>(used);
}

// Uniformly random schema with small group/label counts.
inline std::shared_ptr<const biasaudit::AttributeSchema> random_schema(std::mt19937_64& rng,
                                                                       int max_groups = 4,
                                                                       int max_labels = 4) {
    std::uniform_int_distribution<int> group_count(1, max_groups);
    std::uniform_int_distribution<int> label_count(1, max_labels);
    std::vector<biasaudit::Group> groups;
    const int n = group_count(rng);
    for (int g = 0; g < n; ++g) {
        biasaudit::Group grp;
        grp.name = "g" + std::to_string(g);
        const int labels = label_count(rng);
        for (int l = 0; l < labels; ++l) grp.labels.push_back("l" + std::to_string(l));
        groups.push_back(std::move(grp));
    }
    return std::make_shared<const biasaudit::AttributeSchema>(std::move(groups));
}

// Random score table over a schema; cell_fill < 1 leaves some cells empty.
inline biasaudit::ScoreTable random_table(std::mt19937_64& rng,
                                          std::shared_ptr<const biasaudit::AttributeSchema> schema,
                                          int max_per_cell = 6, double cell_fill = 1.0,
                                          bool grid_scores = false) {
    std::uniform_int_distribution<int> cell_size(1, max_per_cell);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::uniform_int_distribution<int> grid(0, 256);
    std::vector<biasaudit::ScoreRecord> records;
    for (std::uint64_t c = 0; c < schema->combination_count(); ++c) {
        if (uniform(rng) > cell_fill) continue;
        const int k = cell_size(rng);
        for (int j = 0; j < k; ++j) {
            biasaudit::ScoreRecord rec;
            rec.sample_id = "r" + std::to_string(c) + "_" + std::to_string(j);
            rec.combination = c;
            rec.score = grid_scores ? grid(rng) / 256.0 : uniform(rng);
            rec.cls = biasaudit::SampleClass::synthetic;
            records.push_back(std::move(rec));
        }
    }
    return biasaudit::ScoreTable(std::move(schema), std::move(records), "rand", "test");
}

} // namespace oracle
