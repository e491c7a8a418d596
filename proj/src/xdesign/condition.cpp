#include "igsim/xdesign/condition.hpp"

#include "igsim/common/errors.hpp"

namespace igsim::xdesign {

namespace {

const char* threat_text(Threat t) { return t == Threat::strong ? "strong" : "none"; }

Threat parse_threat(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw SchemaError(key, std::string("cell: missing '") + key + "'");
    const auto s = j[key].get<std::string>();
    if (s == "strong") return Threat::strong;
    if (s == "none") return Threat::none;
    throw ConfigError(std::string("cell: ") + key + " must be 'strong' or 'none', got '" + s + "'");
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) s.replace(pos, from.size(), to);
    return s;
}

// Induce / suppress wording per facet.
struct ClauseText {
    Facet facet;
    const char* induce;
    const char* suppress;
};

constexpr ClauseText kClauses[] = {
    {Facet::values, "<Name> strongly feels that their values are under threat by <Group 2>.",
     "<Name> does not feel that their values are under threat by <Group 2>."},
    {Facet::traditions, "<Name> strongly feels that their traditions are under threat by <Group 2>.",
     "<Name> does not feel that their traditions are under threat by <Group 2>."},
    {Facet::economic, "<Name> strongly feels economically threatened by <Group 2>.",
     "<Name> does not feel economically threatened by <Group 2>."},
    {Facet::physical, "<Name> strongly feels physically threatened by <Group 2>.",
     "<Name> does not feel physically threatened by <Group 2>."},
};

}  // namespace

std::string ConditionCell::threat_key() const {
    const bool r = realistic == Threat::strong, s = symbolic == Threat::strong;
    if (r && s) return "both";
    if (r) return "realistic";
    if (s) return "symbolic";
    return "none";
}

std::string ConditionCell::id() const {
    std::string out = threat_key();
    if (segregated) out += "_seg";
    if (asymmetric) out += "_asym";
    return out;
}

std::vector<ConditionCell> threat_cells() {
    std::vector<ConditionCell> out;
    for (auto r : {Threat::none, Threat::strong})
        for (auto s : {Threat::none, Threat::strong}) out.push_back({r, s, false, false});
    return out;
}

std::vector<ConditionCell> structural_cells() {
    std::vector<ConditionCell> out;
    for (bool seg : {false, true})
        for (bool asym : {false, true})
            for (auto c : threat_cells()) {
                c.segregated = seg;
                c.asymmetric = asym;
                out.push_back(c);
            }
    return out;
}

nlohmann::json to_json(const ConditionCell& c) {
    return {{"realistic", threat_text(c.realistic)},
            {"symbolic", threat_text(c.symbolic)},
            {"segregated", c.segregated},
            {"asymmetric", c.asymmetric}};
}

ConditionCell cell_from_json(const nlohmann::json& j) {
    ConditionCell c;
    c.realistic = parse_threat(j, "realistic");
    c.symbolic = parse_threat(j, "symbolic");
    c.segregated = j.value("segregated", false);
    c.asymmetric = j.value("asymmetric", false);
    return c;
}

Group parse_group(const std::string& label) {
    if (label == "A" || label == "Group A") return Group::A;
    if (label == "B" || label == "Group B") return Group::B;
    throw ConfigError("unknown group label '" + label + "'");
}

const char* facet_name(Facet f) {
    switch (f) {
        case Facet::values: return "values";
        case Facet::traditions: return "traditions";
        case Facet::economic: return "economic";
        case Facet::physical: return "physical";
    }
    return "?";
}

std::string StatementTemplate::render(const std::string& agent_name) const {
    return replace_all(text, "<Name>", agent_name);
}

std::array<StatementTemplate, 4> condition_statement_set(const ConditionCell& cell, const std::string& outgroup_name) {
    std::array<StatementTemplate, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& c = kClauses[i];
        const bool induce = is_symbolic(c.facet) ? cell.symbolic == Threat::strong : cell.realistic == Threat::strong;
        out[i] = {c.facet, induce, replace_all(induce ? c.induce : c.suppress, "<Group 2>", outgroup_name)};
    }
    return out;
}

std::string identity_statement(const std::string& agent_name, Group own) {
    return agent_name + " is a member of " + group_name(own) + ". There is another group, " + group_name(other(own)) +
           ", which they are not part of.";
}

}  // namespace igsim::xdesign
