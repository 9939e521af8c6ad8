// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mg
{

enum class Relation
{
    support,
    vertical,
    horizontal,
    between,
};

enum class Qualifier
{
    on,
    above,
    below,
    closest,
    farthest,
    between,
};

enum class Verifiability
{
    verifiable,
    unverifiable,
};

/// Sweep direction implied by a relation.
enum class SweepKind
{
    up,
    down,
    horizontal,
    between,
};

[[nodiscard]] auto to_string(Relation r) -> std::string_view;
[[nodiscard]] auto to_string(Qualifier q) -> std::string_view;
[[nodiscard]] auto to_string(Verifiability v) -> std::string_view;
[[nodiscard]] auto to_string(SweepKind s) -> std::string_view;
[[nodiscard]] auto parse_relation_name(std::string_view s) -> std::optional<Relation>;
[[nodiscard]] auto parse_qualifier_name(std::string_view s) -> std::optional<Qualifier>;
[[nodiscard]] auto parse_verifiability_name(std::string_view s) -> std::optional<Verifiability>;

/// Qualifiers allowed for a relation.
[[nodiscard]] auto qualifier_fits(Relation r, Qualifier q) -> bool;

struct GroundingQuery
{
    std::string raw_text;
    std::string target_class;
    Relation relation = Relation::support;
    Qualifier qualifier = Qualifier::on;
    std::vector<std::string> anchor_classes;
    Verifiability verifiability = Verifiability::verifiable;

    /// Throws InvalidArgument when the anchor count or qualifier does not
    /// fit the relation.
    void validate() const;

    friend auto operator==(const GroundingQuery&, const GroundingQuery&) -> bool = default;
};

/// Verifiability class of a relation: support and vertical are verifiable,
/// superlatives and "between" are not.
[[nodiscard]] auto verifiability_of(Relation r) -> Verifiability;

/// Sweep implied by the relation and qualifier.
[[nodiscard]] auto sweep_of(Relation r, Qualifier q) -> SweepKind;

/// Fixed English rendering of a structured query.
[[nodiscard]] auto describe(const GroundingQuery& q) -> std::string;

/// Structured query from a text rendered by describe(); nullopt when the text
/// does not match any template.
[[nodiscard]] auto parse_query_text(std::string_view text) -> std::optional<GroundingQuery>;

} // namespace mg
