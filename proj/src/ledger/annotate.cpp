#include "igsim/ledger/annotate.hpp"

#include <fstream>

#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"
#include "igsim/common/rng.hpp"
#include "igsim/gateway/programs.hpp"
#include "igsim/ledger/event_log.hpp"

namespace igsim::ledger {

bool is_intergroup(const world::EventRecord& e) { return e.target_group && *e.target_group != e.initiator_group; }

AnnotatedEvent derive(const world::EventRecord& e, std::optional<bool> hostile) {
    AnnotatedEvent a;
    a.event = e;
    a.intergroup = is_intergroup(e);
    a.hostile = a.intergroup ? hostile : std::optional<bool>(false);
    a.contact = a.intergroup && a.hostile.has_value() && !*a.hostile;
    return a;
}

AnnotationProgress annotate_hostility(const std::vector<world::EventRecord>& events, gateway::ModelGateway& gw,
                                      const xdesign::ConditionCell& cell, std::uint64_t seed,
                                      const LinguisticScorer* scorer, AnnotationProgress resume) {
    AnnotationProgress p = std::move(resume);
    p.error.clear();
    if (p.annotated.size() != p.cursor) throw ValidationError("annotation resume state is inconsistent");
    for (; p.cursor < events.size(); ++p.cursor) {
        const auto& e = events[p.cursor];
        AnnotatedEvent a;
        if (is_intergroup(e)) {
            gateway::ContextFeatures f;
            f.cell = cell;
            f.intergroup = true;
            f.tick = e.tick;
            f.agent_index = e.initiator_index;
            f.target_index = e.target_index;
            f.actor_name = e.initiator;
            f.target_name = *e.target;
            f.target_group = "Group " + *e.target_group;
            f.location = e.location;
            const auto key = mix_seed({seed, fnv1a64(e.run_id), static_cast<std::uint64_t>(e.tick),
                                       static_cast<std::uint64_t>(e.initiator_index), static_cast<std::uint64_t>(e.turn + 1)});
            gateway::ClassifyOutcome r;
            try {
                r = gateway::classify_hostile(gw, e.text, "Group " + e.initiator_group, "Group " + *e.target_group, key, f);
            } catch (const gateway::GatewayError& ex) {
                p.error = ex.what();
                return p;
            }
            a = derive(e, r.hostile);
            a.annotation_error = r.error;
        } else {
            a = derive(e, false);
        }
        if (scorer) a.linguistic = scorer->score(e.text);
        p.annotated.push_back(std::move(a));
    }
    p.complete = true;
    return p;
}

nlohmann::json to_json(const AnnotatedEvent& a) {
    auto j = to_json(a.event);
    j["hostile"] = a.hostile ? nlohmann::json(*a.hostile) : nlohmann::json(nullptr);
    j["intergroup"] = a.intergroup;
    j["contact"] = a.contact;
    if (!a.annotation_error.empty()) j["annotation_error"] = a.annotation_error;
    if (a.linguistic)
        j["linguistic"] = {{"hate", a.linguistic->hate},
                           {"sentiment", a.linguistic->sentiment},
                           {"moral_binding", a.linguistic->moral_binding},
                           {"moral_individualizing", a.linguistic->moral_individualizing}};
    return j;
}

AnnotatedEvent annotated_from_json(const nlohmann::json& j) {
    const auto e = event_from_json(j);
    if (!j.contains("hostile")) throw SchemaError("hostile", "annotated event: missing field 'hostile'");
    auto a = derive(e, j["hostile"].is_null() ? std::nullopt : std::optional<bool>(j["hostile"].get<bool>()));
    if (j.contains("annotation_error")) a.annotation_error = j["annotation_error"].get<std::string>();
    if (j.contains("linguistic")) {
        const auto& l = j["linguistic"];
        a.linguistic = LinguisticScores{l.at("hate").get<double>(), l.at("sentiment").get<double>(),
                                        l.at("moral_binding").get<double>(), l.at("moral_individualizing").get<double>()};
    }
    return a;
}

void write_annotated(const std::filesystem::path& path, const std::vector<AnnotatedEvent>& events) {
    std::string out;
    for (const auto& a : events) out += to_json(a).dump() + "\n";
    write_file_atomic(path, out);
}

std::vector<AnnotatedEvent> read_annotated(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::vector<AnnotatedEvent> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(annotated_from_json(nlohmann::json::parse(line)));
    return out;
}

}  // namespace igsim::ledger
