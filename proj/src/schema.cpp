#include "biasaudit/schema.hpp"

#include "biasaudit/errors.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace biasaudit {

namespace {

bool valid_identifier(std::string_view s) {
    if (s.empty() || s.size() > 64) return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

} // namespace

AttributeSchema::AttributeSchema(std::vector<Group> groups) : groups_(std::move(groups)) {
    if (groups_.empty()) throw ValidationError("schema has no groups");

    std::unordered_set<std::string> group_names;
    for (const Group& g : groups_) {
        if (!valid_identifier(g.name))
            throw ValidationError("invalid group name '" + g.name + "' (want [a-z0-9_]+, <= 64 chars)");
        if (!group_names.insert(g.name).second)
            throw ValidationError("duplicate group name '" + g.name + "'");
        if (g.labels.empty())
            throw ValidationError("group '" + g.name + "' has no labels");
        std::unordered_set<std::string> label_names;
        for (const std::string& l : g.labels) {
            if (!valid_identifier(l))
                throw ValidationError("invalid label name '" + l + "' in group '" + g.name + "'");
            if (!label_names.insert(l).second)
                throw ValidationError("duplicate label '" + l + "' in group '" + g.name + "'");
        }
    }

    // Mixed-radix place values, first group most significant.
    place_value_.assign(groups_.size(), 1);
    for (std::size_t g = groups_.size(); g-- > 0;) {
        if (g + 1 < groups_.size()) {
            const std::uint64_t lower = place_value_[g + 1];
            const std::uint64_t radix = groups_[g + 1].labels.size();
            if (lower > std::numeric_limits<std::uint64_t>::max() / radix)
                throw ValidationError("combination space overflows 64 bits");
            place_value_[g] = lower * radix;
        }
    }
    const std::uint64_t top_radix = groups_[0].labels.size();
    if (place_value_[0] > std::numeric_limits<std::uint64_t>::max() / top_radix)
        throw ValidationError("combination space overflows 64 bits");
    combination_count_ = place_value_[0] * top_radix;
}

AttributeSchema AttributeSchema::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed schema document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("groups") || !doc["groups"].is_array())
        throw ValidationError("schema document must be an object with a \"groups\" array");

    std::vector<Group> groups;
    std::size_t pos = 0;
    for (const auto& gj : doc["groups"]) {
        ++pos;
        if (!gj.is_object() || !gj.contains("name") || !gj.contains("labels"))
            throw ValidationError("schema group #" + std::to_string(pos) +
                                  " must have \"name\" and \"labels\"");
        Group g;
        if (!gj["name"].is_string())
            throw ValidationError("schema group #" + std::to_string(pos) + ": name must be a string");
        g.name = gj["name"].get<std::string>();
        if (!gj["labels"].is_array())
            throw ValidationError("group '" + g.name + "': labels must be an array");
        for (const auto& lj : gj["labels"]) {
            if (!lj.is_string())
                throw ValidationError("group '" + g.name + "': labels must be strings");
            g.labels.push_back(lj.get<std::string>());
        }
        groups.push_back(std::move(g));
    }
    return AttributeSchema(std::move(groups));
}

AttributeSchema AttributeSchema::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::size_t AttributeSchema::total_labels() const {
    std::size_t n = 0;
    for (const Group& g : groups_) n += g.labels.size();
    return n;
}

std::optional<std::size_t> AttributeSchema::find_group(std::string_view name) const {
    for (std::size_t g = 0; g < groups_.size(); ++g)
        if (groups_[g].name == name) return g;
    return std::nullopt;
}

std::optional<AttributeRef> AttributeSchema::find_label(std::string_view group,
                                                        std::string_view label) const {
    const auto g = find_group(group);
    if (!g) return std::nullopt;
    const auto& labels = groups_[*g].labels;
    for (std::size_t l = 0; l < labels.size(); ++l)
        if (labels[l] == label) return AttributeRef{*g, l};
    return std::nullopt;
}

std::optional<AttributeRef> AttributeSchema::find_label_unique(std::string_view label) const {
    std::optional<AttributeRef> found;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        const auto& labels = groups_[g].labels;
        for (std::size_t l = 0; l < labels.size(); ++l) {
            if (labels[l] == label) {
                if (found) return std::nullopt;  // ambiguous across groups
                found = AttributeRef{g, l};
            }
        }
    }
    return found;
}

std::uint64_t AttributeSchema::encode(const Combination& c) const {
    if (c.assignment.size() != groups_.size())
        throw ValidationError("combination has " + std::to_string(c.assignment.size()) +
                              " digits, schema has " + std::to_string(groups_.size()) + " groups");
    std::uint64_t index = 0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (c.assignment[g] >= groups_[g].labels.size())
            throw ValidationError("label index " + std::to_string(c.assignment[g]) +
                                  " out of range for group '" + groups_[g].name + "'");
        index += c.assignment[g] * place_value_[g];
    }
    return index;
}

Combination AttributeSchema::decode(std::uint64_t index) const {
    if (index >= combination_count_)
        throw ValidationError("combination index " + std::to_string(index) +
                              " >= combination count " + std::to_string(combination_count_));
    Combination c;
    c.assignment.resize(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        c.assignment[g] = static_cast<std::size_t>(index / place_value_[g]);
        index %= place_value_[g];
    }
    return c;
}

void AttributeSchema::check_attr(AttributeRef attr) const {
    if (attr.group >= groups_.size())
        throw ValidationError("group index " + std::to_string(attr.group) + " out of range");
    if (attr.label >= groups_[attr.group].labels.size())
        throw ValidationError("label index " + std::to_string(attr.label) +
                              " out of range for group '" + groups_[attr.group].name + "'");
}

std::uint64_t AttributeSchema::subgroup_count(AttributeRef attr) const {
    check_attr(attr);
    return combination_count_ / groups_[attr.group].labels.size();
}

SubgroupKey AttributeSchema::subgroup_key(AttributeRef attr, std::uint64_t index) const {
    check_attr(attr);
    if (index >= subgroup_count(attr))
        throw ValidationError("subgroup index " + std::to_string(index) + " out of range");
    SubgroupKey key;
    key.assignment.resize(groups_.size() - 1);
    // Mixed radix over the remaining groups, least significant last.
    for (std::size_t slot = key.assignment.size(); slot-- > 0;) {
        const std::size_t g = slot < attr.group ? slot : slot + 1;
        const std::uint64_t radix = groups_[g].labels.size();
        key.assignment[slot] = static_cast<std::size_t>(index % radix);
        index /= radix;
    }
    return key;
}

std::uint64_t AttributeSchema::subgroup_index(AttributeRef attr, const SubgroupKey& key) const {
    check_attr(attr);
    if (key.assignment.size() != groups_.size() - 1)
        throw ValidationError("subgroup key has wrong number of digits");
    std::uint64_t index = 0;
    for (std::size_t slot = 0; slot < key.assignment.size(); ++slot) {
        const std::size_t g = slot < attr.group ? slot : slot + 1;
        const std::uint64_t radix = groups_[g].labels.size();
        if (key.assignment[slot] >= radix)
            throw ValidationError("label index out of range in subgroup key for group '" +
                                  groups_[g].name + "'");
        index = index * radix + key.assignment[slot];
    }
    return index;
}

std::uint64_t AttributeSchema::combine(AttributeRef attr, std::size_t label,
                                       std::uint64_t subgroup_idx) const {
    check_attr(attr);
    if (label >= groups_[attr.group].labels.size())
        throw ValidationError("label index " + std::to_string(label) +
                              " out of range for group '" + groups_[attr.group].name + "'");
    std::uint64_t index = label * place_value_[attr.group];
    for (std::size_t slot = groups_.size() - 1; slot-- > 0;) {
        const std::size_t g = slot < attr.group ? slot : slot + 1;
        const std::uint64_t radix = groups_[g].labels.size();
        index += (subgroup_idx % radix) * place_value_[g];
        subgroup_idx /= radix;
    }
    return index;
}

std::vector<SubgroupKey> AttributeSchema::subgroups_of(AttributeRef attr) const {
    const std::uint64_t n = subgroup_count(attr);
    std::vector<SubgroupKey> keys;
    keys.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i) keys.push_back(subgroup_key(attr, i));
    return keys;
}

} // namespace biasaudit
