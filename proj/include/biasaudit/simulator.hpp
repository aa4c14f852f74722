#pragma once

#include "biasaudit/schema.hpp"
#include "biasaudit/score_store.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace biasaudit {

/// Additive mean shift (and optional std override) applied to every
/// combination carrying the given label.
struct EffectSpec {
    std::size_t group = 0;
    std::size_t label = 0;
    double beta = 0.0;
    std::optional<double> std_override;
};

/// Attribute-conditioned clamped-Gaussian score generator. A sample for
/// combination c draws Normal(base_mean + sum of applicable betas, sigma_c)
/// clamped to [0,1]; sigma_c is the last applicable std override, else
/// base_std. Reproducible for a fixed seed within one build (mt19937_64 with
/// per-combination sub-seeds, so generation order is scheduling-independent).
struct SimSpec {
    std::shared_ptr<const AttributeSchema> schema;
    double base_mean = 0.7;
    double base_std = 0.05;
    std::vector<EffectSpec> effects;
    std::uint64_t samples_per_combination = 1;  // k
    std::uint64_t seed = 0;

    static SimSpec from_json_text(std::string_view text,
                                  std::shared_ptr<const AttributeSchema> schema);
    static SimSpec from_file(const std::filesystem::path& path,
                             std::shared_ptr<const AttributeSchema> schema);

    void validate() const;
    /// Mean/std of the (pre-clamp) normal for one combination.
    std::pair<double, double> params_for(std::uint64_t combination) const;
};

/// Generates exactly combination_count * k positive-class (synthetic) records.
ScoreTable simulate(const SimSpec& spec);

/// Expected brisk of the attribute under the generator, via the clipped
/// (censored) normal mean: the analytic oracle the empirical estimate must
/// converge to.
double analytic_brisk(const SimSpec& spec, AttributeRef attr);

/// Mean of a Normal(mu, sigma) clamped to [0,1].
double clipped_normal_mean(double mu, double sigma);

/// Uniform sample of ceil(fraction * N) records without replacement,
/// original record order preserved. fraction = 1 returns the table unchanged.
ScoreTable subsample(const ScoreTable& table, double fraction, std::uint64_t seed);

} // namespace biasaudit
