// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/query.hpp>

#include <array>
#include <regex>

namespace mg
{

namespace
{
    template <class E, std::size_t N>
    auto lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) -> std::optional<E>
    {
        for (const auto& [value, name]: table)
            if (name == s)
                return value;
        return std::nullopt;
    }

    template <class E, std::size_t N>
    auto name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) -> std::string_view
    {
        for (const auto& [value, name]: table)
            if (value == e)
                return name;
        return "unknown";
    }

    constexpr std::array kRelations {
        std::pair { Relation::support, std::string_view("support") },
        std::pair { Relation::vertical, std::string_view("vertical") },
        std::pair { Relation::horizontal, std::string_view("horizontal") },
        std::pair { Relation::between, std::string_view("between") },
    };
    constexpr std::array kQualifiers {
        std::pair { Qualifier::on, std::string_view("on") },
        std::pair { Qualifier::above, std::string_view("above") },
        std::pair { Qualifier::below, std::string_view("below") },
        std::pair { Qualifier::closest, std::string_view("closest") },
        std::pair { Qualifier::farthest, std::string_view("farthest") },
        std::pair { Qualifier::between, std::string_view("between") },
    };
    constexpr std::array kVerifiability {
        std::pair { Verifiability::verifiable, std::string_view("verifiable") },
        std::pair { Verifiability::unverifiable, std::string_view("unverifiable") },
    };
    constexpr std::array kSweeps {
        std::pair { SweepKind::up, std::string_view("up") },
        std::pair { SweepKind::down, std::string_view("down") },
        std::pair { SweepKind::horizontal, std::string_view("horizontal") },
        std::pair { SweepKind::between, std::string_view("between") },
    };
} // namespace

auto to_string(Relation r) -> std::string_view { return name_of(kRelations, r); }
auto to_string(Qualifier q) -> std::string_view { return name_of(kQualifiers, q); }
auto to_string(Verifiability v) -> std::string_view { return name_of(kVerifiability, v); }
auto to_string(SweepKind s) -> std::string_view { return name_of(kSweeps, s); }
auto parse_relation_name(std::string_view s) -> std::optional<Relation> { return lookup(kRelations, s); }
auto parse_qualifier_name(std::string_view s) -> std::optional<Qualifier> { return lookup(kQualifiers, s); }
auto parse_verifiability_name(std::string_view s) -> std::optional<Verifiability>
{
    return lookup(kVerifiability, s);
}

auto qualifier_fits(Relation r, Qualifier q) -> bool
{
    switch (r)
    {
        case Relation::support: return q == Qualifier::on;
        case Relation::vertical: return q == Qualifier::above || q == Qualifier::below;
        case Relation::horizontal: return q == Qualifier::closest || q == Qualifier::farthest;
        case Relation::between: return q == Qualifier::between;
    }
    return false;
}

void GroundingQuery::validate() const
{
    if (target_class.empty())
        throw InvalidArgument("GroundingQuery: empty target class");
    if (!qualifier_fits(relation, qualifier))
        throw InvalidArgument("GroundingQuery: qualifier '" + std::string(to_string(qualifier)) +
                              "' does not fit relation '" + std::string(to_string(relation)) + "'");
    const auto expected = relation == Relation::between ? 2u : 1u;
    if (anchor_classes.size() != expected)
        throw InvalidArgument("GroundingQuery: relation '" + std::string(to_string(relation)) + "' needs " +
                              std::to_string(expected) + " anchor classes");
    if (verifiability != verifiability_of(relation))
        throw InvalidArgument("GroundingQuery: verifiability does not match the relation");
}

auto verifiability_of(Relation r) -> Verifiability
{
    return r == Relation::support || r == Relation::vertical ? Verifiability::verifiable
                                                             : Verifiability::unverifiable;
}

auto sweep_of(Relation r, Qualifier q) -> SweepKind
{
    switch (r)
    {
        case Relation::support: return SweepKind::up;
        case Relation::vertical: return q == Qualifier::below ? SweepKind::down : SweepKind::up;
        case Relation::horizontal: return SweepKind::horizontal;
        case Relation::between: return SweepKind::between;
    }
    throw InvalidArgument("sweep_of: unknown relation");
}

auto describe(const GroundingQuery& q) -> std::string
{
    const auto& a = q.anchor_classes;
    if (a.size() != (q.qualifier == Qualifier::between ? 2u : 1u))
        throw InvalidArgument("describe: wrong number of anchor classes");
    switch (q.qualifier)
    {
        case Qualifier::on: return "the " + q.target_class + " on the " + a.at(0);
        case Qualifier::above: return "the " + q.target_class + " above the " + a.at(0);
        case Qualifier::below: return "the " + q.target_class + " below the " + a.at(0);
        case Qualifier::closest: return "the " + q.target_class + " closest to the " + a.at(0);
        case Qualifier::farthest: return "the " + q.target_class + " farthest from the " + a.at(0);
        case Qualifier::between: return "the " + q.target_class + " between the " + a.at(0) + " and the " + a.at(1);
    }
    throw InvalidArgument("describe: unknown qualifier");
}

auto parse_query_text(std::string_view text) -> std::optional<GroundingQuery>
{
    static const std::regex between(R"(^the (\S+) between the (\S+) and the (\S+)$)");
    static const std::regex binary(R"(^the (\S+) (on|above|below|closest to|farthest from) the (\S+)$)");

    const auto s = std::string(text);
    auto m = std::smatch {};
    auto q = GroundingQuery {};
    q.raw_text = s;
    if (std::regex_match(s, m, between))
    {
        q.target_class = m[1];
        q.relation = Relation::between;
        q.qualifier = Qualifier::between;
        q.anchor_classes = { m[2], m[3] };
    }
    else if (std::regex_match(s, m, binary))
    {
        q.target_class = m[1];
        q.anchor_classes = { m[3] };
        const auto word = m[2].str();
        if (word == "on")
            q.relation = Relation::support, q.qualifier = Qualifier::on;
        else if (word == "above")
            q.relation = Relation::vertical, q.qualifier = Qualifier::above;
        else if (word == "below")
            q.relation = Relation::vertical, q.qualifier = Qualifier::below;
        else if (word == "closest to")
            q.relation = Relation::horizontal, q.qualifier = Qualifier::closest;
        else
            q.relation = Relation::horizontal, q.qualifier = Qualifier::farthest;
    }
    else
    {
        return std::nullopt;
    }
    q.verifiability = verifiability_of(q.relation);
    return q;
}

} // namespace mg
