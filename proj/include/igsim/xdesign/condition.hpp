#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

namespace igsim::xdesign {

enum class Threat { none, strong };

/// One cell of the threat design, with structural flags crossed on top.
struct ConditionCell {
    Threat realistic = Threat::none;
    Threat symbolic = Threat::none;
    bool segregated = false;
    bool asymmetric = false;

    /// "none", "symbolic", "realistic" or "both".
    std::string threat_key() const;
    /// Filesystem-safe identifier, e.g. "realistic" or "both_seg_asym".
    std::string id() const;

    friend bool operator==(const ConditionCell&, const ConditionCell&) = default;
};

/// The four threat cells.
std::vector<ConditionCell> threat_cells();
/// Threat cells crossed with segregation and group-size asymmetry (16 cells).
std::vector<ConditionCell> structural_cells();

nlohmann::json to_json(const ConditionCell& cell);
ConditionCell cell_from_json(const nlohmann::json& j);

enum class Group { A, B };

inline const char* group_name(Group g) { return g == Group::A ? "Group A" : "Group B"; }
inline const char* group_letter(Group g) { return g == Group::A ? "A" : "B"; }
inline Group other(Group g) { return g == Group::A ? Group::B : Group::A; }
/// Accepts "A"/"B" and "Group A"/"Group B"; anything else is a ConfigError.
Group parse_group(const std::string& label);

enum class Facet { values, traditions, economic, physical };

const char* facet_name(Facet f);
inline bool is_symbolic(Facet f) { return f == Facet::values || f == Facet::traditions; }

/// One belief clause with its induce/suppress choice. The template keeps the
/// "<Name>" placeholder; the out-group is already substituted.
struct StatementTemplate {
    Facet facet;
    bool induce;
    std::string text;

    std::string render(const std::string& agent_name) const;
};

/// Induce/suppress choice for the four clauses (values, traditions, economic,
/// physical) implied by the cell.
std::array<StatementTemplate, 4> condition_statement_set(const ConditionCell& cell, const std::string& outgroup_name);

/// Minimal-group identity statement for an agent.
std::string identity_statement(const std::string& agent_name, Group own);

}  // namespace igsim::xdesign
