#include "biasaudit/schema.hpp"

#include "biasaudit/errors.hpp"
#include "oracles.hpp"

#include <random>

#include <doctest.h>

using namespace biasaudit;

namespace {

AttributeSchema make(std::vector<Group> groups) { return AttributeSchema(std::move(groups)); }

} // namespace

TEST_CASE("table 2 schema file: 11 groups, 30 labels, 46656 combinations") {
    const auto schema = AttributeSchema::from_file(std::string(BIASAUDIT_DATA_DIR) +
                                                   "/face_attributes_schema.json");
    CHECK(schema.group_count() == 11);
    CHECK(schema.total_labels() == 30);
    CHECK(schema.combination_count() == 46656);
    // declaration order preserved
    CHECK(schema.group_name(0) == "attractiveness");
    CHECK(schema.groups()[3].labels[1] == "blonde_hair");
}

TEST_CASE("combination_count basics") {
    CHECK(make({{"gender", {"man", "woman"}}}).combination_count() == 2);
    CHECK(make({{"a", {"x"}}}).combination_count() == 1);
    CHECK(make({{"a", {"x", "y"}}, {"b", {"u", "v", "w"}}}).combination_count() == 6);
}

TEST_CASE("schema validation errors") {
    CHECK_THROWS_AS(make({{"hair", {"a"}}, {"hair", {"b"}}}), ValidationError);
    CHECK_THROWS_AS(make({{"g", {"a", "a"}}}), ValidationError);
    CHECK_THROWS_AS(make({{"g", {}}}), ValidationError);
    CHECK_THROWS_AS(make({{"G", {"a"}}}), ValidationError);   // uppercase name
    CHECK_THROWS_AS(make({{"g", {"a b"}}}), ValidationError); // space in label
    CHECK_THROWS_AS(make({}), ValidationError);
    CHECK_THROWS_AS(AttributeSchema::from_json_text("{not json"), ValidationError);
    CHECK_THROWS_AS(AttributeSchema::from_json_text("{\"groups\": 3}"), ValidationError);
    CHECK_THROWS_WITH_AS(make({{"g", {"a"}}, {"g", {"b"}}}),
                         "duplicate group name 'g'", ValidationError);
}

TEST_CASE("encode / decode") {
    const auto schema = make({{"a", {"x", "y"}}, {"b", {"u", "v", "w"}}});
    CHECK(schema.encode({{0, 0}}) == 0);
    CHECK(schema.encode({{1, 2}}) == 5);  // 1*3 + 2, first group most significant
    CHECK(schema.decode(5) == Combination{{1, 2}});

    CHECK_THROWS_AS(schema.decode(6), ValidationError);
    CHECK_THROWS_AS(schema.encode({{0}}), ValidationError);
    CHECK_THROWS_AS(schema.encode({{0, 3}}), ValidationError);
}

TEST_CASE("exhaustive round-trip over a {2,3,2} schema") {
    const auto schema = make({{"a", {"a0", "a1"}},
                              {"b", {"b0", "b1", "b2"}},
                              {"c", {"c0", "c1"}}});
    REQUIRE(schema.combination_count() == 12);
    for (std::uint64_t i = 0; i < 12; ++i) CHECK(schema.encode(schema.decode(i)) == i);
}

TEST_CASE("round-trip property on random schemas") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 50; ++trial) {
        const auto schema = oracle::random_schema(rng, 5, 4);
        for (std::uint64_t i = 0; i < schema->combination_count(); ++i) {
            const Combination c = schema->decode(i);
            REQUIRE(schema->encode(c) == i);
        }
    }
}

TEST_CASE("subgroups_of counts") {
    const auto face_schema = AttributeSchema::from_file(std::string(BIASAUDIT_DATA_DIR) +
                                                   "/face_attributes_schema.json");
    const auto bald = face_schema.find_label("hair_type", "bald");
    REQUIRE(bald.has_value());
    CHECK(face_schema.subgroup_count(*bald) == 15552);  // 46656 / 3

    const auto single = make({{"gender", {"man", "woman"}}});
    const auto subgroups = single.subgroups_of(AttributeRef{0, 0});
    REQUIRE(subgroups.size() == 1);
    CHECK(subgroups[0].assignment.empty());

    const auto two = make({{"a", {"x", "y"}}, {"b", {"u", "v", "w"}}});
    CHECK(two.subgroups_of(AttributeRef{1, 0}).size() == 2);

    CHECK_THROWS_AS(face_schema.subgroup_count(AttributeRef{99, 0}), ValidationError);
    CHECK_THROWS_AS(face_schema.subgroup_count(AttributeRef{0, 99}), ValidationError);
}

TEST_CASE("subgroup enumeration is ordered, duplicate-free and consistent with combine") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const auto schema = oracle::random_schema(rng, 4, 4);
        for (std::size_t g = 0; g < schema->group_count(); ++g) {
            const AttributeRef attr{g, 0};
            const std::uint64_t count = schema->subgroup_count(attr);
            // per-group partition arithmetic
            REQUIRE(count * schema->label_count(g) == schema->combination_count());

            for (std::uint64_t i = 0; i < count; ++i) {
                const SubgroupKey key = schema->subgroup_key(attr, i);
                REQUIRE(schema->subgroup_index(attr, key) == i);

                for (std::size_t l = 0; l < schema->label_count(g); ++l) {
                    const Combination c = schema->decode(schema->combine(attr, l, i));
                    REQUIRE(c.assignment[g] == l);
                    for (std::size_t slot = 0; slot < key.assignment.size(); ++slot) {
                        const std::size_t other = slot < g ? slot : slot + 1;
                        REQUIRE(c.assignment[other] == key.assignment[slot]);
                    }
                }
            }
        }
    }
}

TEST_CASE("label lookup") {
    const auto schema = make({{"a", {"x", "y"}}, {"b", {"y", "z"}}});
    CHECK(schema.find_label("a", "y") == AttributeRef{0, 1});
    CHECK_FALSE(schema.find_label("a", "z").has_value());
    CHECK(schema.find_label_unique("z") == AttributeRef{1, 1});
    CHECK_FALSE(schema.find_label_unique("y").has_value());  // ambiguous
}
