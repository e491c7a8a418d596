#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/gateway/types.hpp"
#include "igsim/ledger/scorer.hpp"
#include "igsim/world/records.hpp"

namespace igsim::ledger {

struct AnnotatedEvent {
    world::EventRecord event;
    std::optional<bool> hostile;  // nullopt: unlabeled
    bool intergroup = false;
    bool contact = false;
    std::string annotation_error;
    std::optional<LinguisticScores> linguistic;
};

bool is_intergroup(const world::EventRecord& e);

/// Applies the derived-variable rules: intragroup and untargeted events are
/// never hostile; contact is intergroup and not hostile.
AnnotatedEvent derive(const world::EventRecord& e, std::optional<bool> hostile);

struct AnnotationProgress {
    std::vector<AnnotatedEvent> annotated;
    std::size_t cursor = 0;  // next event to annotate
    bool complete = false;
    std::string error;       // gateway failure that stopped the pass
};

/// Labels every intergroup event through the hostile-detection program.
/// A gateway failure returns the partial result with its cursor; pass it
/// back in as `resume` to continue.
AnnotationProgress annotate_hostility(const std::vector<world::EventRecord>& events, gateway::ModelGateway& gw,
                                      const xdesign::ConditionCell& cell, std::uint64_t seed,
                                      const LinguisticScorer* scorer = nullptr, AnnotationProgress resume = {});

nlohmann::json to_json(const AnnotatedEvent& a);
AnnotatedEvent annotated_from_json(const nlohmann::json& j);

void write_annotated(const std::filesystem::path& path, const std::vector<AnnotatedEvent>& events);
std::vector<AnnotatedEvent> read_annotated(const std::filesystem::path& path);

}  // namespace igsim::ledger
