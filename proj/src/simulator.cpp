#include "biasaudit/simulator.hpp"

#include "biasaudit/errors.hpp"
#include "biasaudit/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace biasaudit {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream); decorrelates per-combination generators
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double phi_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

} // namespace

void SimSpec::validate() const {
    if (!schema) throw ValidationError("simulator spec requires a schema");
    if (!(base_mean > 0.0 && base_mean < 1.0))
        throw ValidationError("base_mean must lie in (0,1)");
    if (!(base_std > 0.0)) throw ValidationError("base_std must be positive");
    if (samples_per_combination < 1) throw ValidationError("k must be >= 1");
    for (const EffectSpec& e : effects) {
        if (e.group >= schema->group_count() || e.label >= schema->label_count(e.group))
            throw ValidationError("effect references a label outside the schema");
        if (e.std_override && !(*e.std_override > 0.0))
            throw ValidationError("effect std override must be positive");
    }
}

std::pair<double, double> SimSpec::params_for(std::uint64_t combination) const {
    const Combination c = schema->decode(combination);
    double mu = base_mean;
    double sigma = base_std;
    for (const EffectSpec& e : effects) {
        if (c.assignment[e.group] == e.label) {
            mu += e.beta;
            if (e.std_override) sigma = *e.std_override;
        }
    }
    return {mu, sigma};
}

SimSpec SimSpec::from_json_text(std::string_view text,
                                std::shared_ptr<const AttributeSchema> schema) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed simulator spec: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("simulator spec must be a JSON object");

    SimSpec spec;
    spec.schema = std::move(schema);
    if (doc.contains("base_mean")) spec.base_mean = doc["base_mean"].get<double>();
    if (doc.contains("base_std")) spec.base_std = doc["base_std"].get<double>();
    if (doc.contains("k")) spec.samples_per_combination = doc["k"].get<std::uint64_t>();
    if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("effects")) {
        for (const auto& ej : doc["effects"]) {
            if (!ej.is_object() || !ej.contains("group") || !ej.contains("label") ||
                !ej.contains("beta"))
                throw ValidationError("each effect needs \"group\", \"label\" and \"beta\"");
            const std::string group = ej["group"].get<std::string>();
            const std::string label = ej["label"].get<std::string>();
            const auto ref = spec.schema->find_label(group, label);
            if (!ref)
                throw ValidationError("effect references unknown label '" + group + "." + label +
                                      "'");
            EffectSpec e;
            e.group = ref->group;
            e.label = ref->label;
            e.beta = ej["beta"].get<double>();
            if (ej.contains("std")) e.std_override = ej["std"].get<double>();
            spec.effects.push_back(e);
        }
    }
    spec.validate();
    return spec;
}

SimSpec SimSpec::from_file(const std::filesystem::path& path,
                           std::shared_ptr<const AttributeSchema> schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open simulator spec: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str(), std::move(schema));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

ScoreTable simulate(const SimSpec& spec) {
    spec.validate();
    const std::uint64_t combos = spec.schema->combination_count();
    const std::uint64_t k = spec.samples_per_combination;

    std::vector<ScoreRecord> records;
    records.reserve(static_cast<std::size_t>(combos * k));
    for (std::uint64_t c = 0; c < combos; ++c) {
        const auto [mu, sigma] = spec.params_for(c);
        std::mt19937_64 rng(mix_seed(spec.seed, c));
        std::normal_distribution<double> normal(mu, sigma);
        for (std::uint64_t j = 0; j < k; ++j) {
            ScoreRecord rec;
            rec.sample_id = "sim-" + std::to_string(c) + "-" + std::to_string(j);
            rec.combination = c;
            rec.score = std::clamp(normal(rng), 0.0, 1.0);
            rec.cls = SampleClass::synthetic;
            records.push_back(std::move(rec));
        }
    }
    return ScoreTable(spec.schema, std::move(records), "simulated",
                      "sim:mt19937_64:seed=" + std::to_string(spec.seed));
}

double clipped_normal_mean(double mu, double sigma) {
    const double alpha = (0.0 - mu) / sigma;
    const double gamma = (1.0 - mu) / sigma;
    return mu * (phi_cdf(gamma) - phi_cdf(alpha)) - sigma * (phi_pdf(gamma) - phi_pdf(alpha)) +
           (1.0 - phi_cdf(gamma));
}

double analytic_brisk(const SimSpec& spec, AttributeRef attr) {
    spec.validate();
    spec.schema->check_attr(attr);
    const std::size_t labels = spec.schema->label_count(attr.group);
    if (labels < 2)
        throw NotMeasurableError("attribute group '" + spec.schema->group_name(attr.group) +
                                 "' has no sibling labels");

    const std::uint64_t subgroups = spec.schema->subgroup_count(attr);
    KahanSum total;
    for (std::uint64_t sg = 0; sg < subgroups; ++sg) {
        const auto [mu_p, sd_p] = spec.params_for(spec.schema->combine(attr, attr.label, sg));
        const double present = clipped_normal_mean(mu_p, sd_p);
        // balanced design: the pooled absent side is an equal-weight mixture
        KahanSum absent;
        for (std::size_t l = 0; l < labels; ++l) {
            if (l == attr.label) continue;
            const auto [mu_a, sd_a] = spec.params_for(spec.schema->combine(attr, l, sg));
            absent.add(clipped_normal_mean(mu_a, sd_a));
        }
        total.add(present - absent.value() / static_cast<double>(labels - 1));
    }
    return total.value() / static_cast<double>(subgroups);
}

ScoreTable subsample(const ScoreTable& table, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ValidationError("subsample fraction must lie in (0,1], got " +
                              std::to_string(fraction));
    const std::size_t n = table.size();
    const auto want = static_cast<std::size_t>(
        std::min(static_cast<double>(n), std::ceil(fraction * static_cast<double>(n))));
    if (want == n)
        return ScoreTable(table.schema_ptr(), table.records(), table.detector(), table.dataset());

    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0));
    // partial Fisher-Yates: first `want` slots end up uniform without replacement
    for (std::size_t i = 0; i < want; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(indices[i], indices[pick(rng)]);
    }
    indices.resize(want);
    std::sort(indices.begin(), indices.end());

    std::vector<ScoreRecord> records;
    records.reserve(want);
    for (std::size_t i : indices) records.push_back(table.records()[i]);
    return ScoreTable(table.schema_ptr(), std::move(records), table.detector(), table.dataset());
}

} // namespace biasaudit
