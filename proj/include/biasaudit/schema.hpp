#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biasaudit {

/// One attribute group: a named set of mutually exclusive labels
/// (e.g. hair_color = {black_hair, blonde_hair, brown_hair, gray_hair}).
struct Group {
    std::string name;
    std::vector<std::string> labels;
};

/// A full label assignment, one label index per group, in group order.
struct Combination {
    std::vector<std::size_t> assignment;

    bool operator==(const Combination&) const = default;
};

/// Identifies the attribute under analysis as a single label of a single
/// group. "Present" means the sample carries exactly this label; "absent"
/// means it carries any sibling label of the same group.
struct AttributeRef {
    std::size_t group = 0;
    std::size_t label = 0;

    bool operator==(const AttributeRef&) const = default;
};

/// A label assignment for every group EXCEPT the one under analysis,
/// in group order. Indexes the subgroup space of an attribute.
struct SubgroupKey {
    std::vector<std::size_t> assignment;

    bool operator==(const SubgroupKey&) const = default;
};

/// Ordered attribute groups plus the combination-space arithmetic on top of
/// them. Immutable after construction; all queries are pure and safe to
/// share across threads.
///
/// Combinations are indexed in mixed radix with the FIRST group as the most
/// significant digit; subgroup keys use the same convention over the
/// remaining groups. The ordering is arbitrary but fixed so report output
/// is reproducible.
class AttributeSchema {
public:
    /// Validates group/label names, uniqueness and non-emptiness.
    /// Throws ValidationError naming the offending group or label.
    explicit AttributeSchema(std::vector<Group> groups);

    /// Parses the JSON schema document format:
    ///   {"groups":[{"name":"hair_color","labels":["black_hair",...]}, ...]}
    static AttributeSchema from_json_text(std::string_view text);
    static AttributeSchema from_file(const std::filesystem::path& path);

    const std::vector<Group>& groups() const { return groups_; }
    std::size_t group_count() const { return groups_.size(); }
    std::size_t label_count(std::size_t group) const { return groups_[group].labels.size(); }

    /// Total number of labels across all groups (= number of auditable attributes).
    std::size_t total_labels() const;

    /// |Omega(G)| = product of per-group label counts.
    std::uint64_t combination_count() const { return combination_count_; }

    std::optional<std::size_t> find_group(std::string_view name) const;
    std::optional<AttributeRef> find_label(std::string_view group, std::string_view label) const;
    /// Bare-label lookup; empty unless the label occurs in exactly one group.
    std::optional<AttributeRef> find_label_unique(std::string_view label) const;

    const std::string& group_name(std::size_t g) const { return groups_[g].name; }
    const std::string& label_name(AttributeRef a) const { return groups_[a.group].labels[a.label]; }

    /// Mixed-radix index of a combination. Throws ValidationError on
    /// assignment length or digit range mismatch.
    std::uint64_t encode(const Combination& c) const;
    /// Inverse of encode. Throws ValidationError for index >= combination_count().
    Combination decode(std::uint64_t index) const;

    /// |Omega(A_{-i})| = combination_count() / |L_g| for the attribute's group.
    std::uint64_t subgroup_count(AttributeRef attr) const;
    /// The index-th subgroup key in mixed-radix order over the remaining groups.
    SubgroupKey subgroup_key(AttributeRef attr, std::uint64_t index) const;
    std::uint64_t subgroup_index(AttributeRef attr, const SubgroupKey& key) const;

    /// Combination index of (subgroup key, chosen label in the withheld group).
    /// Pure arithmetic; the workhorse for bucket iteration.
    std::uint64_t combine(AttributeRef attr, std::size_t label, std::uint64_t subgroup_index) const;

    /// Materialized enumeration of all subgroup keys, in subgroup_index order.
    std::vector<SubgroupKey> subgroups_of(AttributeRef attr) const;

    void check_attr(AttributeRef attr) const;

private:
    std::vector<Group> groups_;
    std::vector<std::uint64_t> place_value_;  // mixed-radix weight per group
    std::uint64_t combination_count_ = 1;
};

} // namespace biasaudit
