#include "igsim/world/probe.hpp"

#include <cctype>
#include <map>
#include <regex>

#include "igsim/common/errors.hpp"
#include "igsim/common/rng.hpp"
#include "igsim/world/context.hpp"

namespace igsim::world {

namespace {

struct RawItem {
    const char* scale;
    const char* id;
    const char* text;
};

// <G1> = own group, <G2> = other group.
constexpr RawItem kItems[] = {
    {"identification", "id1", "I feel a strong bond with <G1>."},
    {"identification", "id2", "Being a <G1> is an important reflection of who I am."},
    {"identification", "id3", "I strongly identify with <G1>'s values."},
    {"identification", "id4", "I feel committed to <G1>."},
    {"identification", "id5", "I am willing to make personal sacrifices to support <G1>."},
    {"bias", "bias1", "Members of my group (<G1>) are more moral than members of the other group (<G2>)."},
    {"bias", "bias2", "Members of my group (<G1>) are more trustworthy than members of the other group (<G2>)."},
    {"bias", "bias3", "Members of my group (<G1>) are more competent than members of the other group (<G2>)."},
    {"bias", "bias4", "Members of my group (<G1>) are more kind than members of the other group (<G2>)."},
    {"trust", "trust1", "I consider <G1> members to be honest and reliable."},
    {"trust", "trust2", "I expect most <G1> members to act in good faith."},
    {"trust", "trust3", "I consider <G2> members to be honest and reliable."},
    {"trust", "trust4", "I expect most <G2> members to act in good faith."},
    {"collaboration", "collab1", "I am willing to collaborate with <G1> members to achieve shared goals."},
    {"collaboration", "collab2", "I am happy to share my resources with <G1> members when they need help."},
    {"collaboration", "collab3", "I am willing to collaborate with <G2> members to achieve shared goals."},
    {"collaboration", "collab4", "I am happy to share my resources with <G2> members when they need help."},
    {"dehumanization", "dehum1", "<G1> members often seem primitive and uncivilized."},
    {"dehumanization", "dehum2", "<G1> members often seem cold and mechanical."},
    {"dehumanization", "dehum3", "<G2> members often seem primitive and uncivilized."},
    {"dehumanization", "dehum4", "<G2> members often seem cold and mechanical."},
    {"threat_realistic", "real1", "I feel economically threatened by <G2>."},
    {"threat_realistic", "real2", "I feel physically threatened by <G2>."},
    {"threat_symbolic", "sym1", "I feel that my values are under threat by <G2>."},
    {"threat_symbolic", "sym2", "I feel that my traditions are under threat by <G2>."},
};

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::string lower_trim(const std::string& s) {
    std::string out;
    for (unsigned char c : s)
        if (std::isalnum(c) || c == ' ' || c == '(' || c == ')') out.push_back(static_cast<char>(std::tolower(c)));
    const auto b = out.find_first_not_of(' ');
    if (b == std::string::npos) return "";
    return out.substr(b, out.find_last_not_of(' ') - b + 1);
}

}  // namespace

const std::vector<std::string>& probe_scales() {
    static const std::vector<std::string> scales = {"identification", "bias", "trust", "collaboration",
                                                    "dehumanization", "threat_realistic", "threat_symbolic"};
    return scales;
}

std::vector<ProbeItem> scale_items(const std::string& scale_id, xdesign::Group own) {
    std::vector<ProbeItem> out;
    for (const auto& r : kItems) {
        if (scale_id != r.scale) continue;
        std::string t = r.text;
        replace_all(t, "<G1>", xdesign::group_name(own));
        replace_all(t, "<G2>", xdesign::group_name(xdesign::other(own)));
        out.push_back({r.scale, r.id, std::move(t)});
    }
    if (out.empty()) throw ConfigError("unknown probe scale '" + scale_id + "'");
    return out;
}

std::optional<int> parse_likert(const std::string& reply) {
    // "totally agree (7)", "(7)"
    static const std::regex paren(R"(\(\s*([1-7])\s*\))");
    // a number at the start: "7", "7.", "7 - totally agree", "Answer: 5"
    static const std::regex leading(R"(^\s*(?:answer|rating|response)?\s*:?\s*([1-7])(?:\.0+)?(?![0-9.]*[0-9])\s*(?:[-.:,)/]|$|\s))",
                                    std::regex::icase);
    std::smatch m;
    if (std::regex_search(reply, m, paren)) return std::stoi(m[1]);
    if (std::regex_search(reply, m, leading)) return std::stoi(m[1]);
    static const std::map<std::string, int> anchors = {
        {"totally disagree", 1}, {"neutral", 4}, {"totally agree", 7}};
    if (auto it = anchors.find(lower_trim(reply)); it != anchors.end()) return it->second;
    return std::nullopt;
}

std::string probe_prompt(const AgentState& a, const ProbeItem& item) {
    return memory_context(a) + "\n\nAnswer as " + a.persona.name + ". How much do you agree with the statement: \"" +
           item.text +
           "\"\nRespond with a single number from 1 to 7 (1-totally disagree, 4-neutral, 7-totally agree).";
}

std::vector<ProbeRecord> run_probe(AgentState agent, const std::string& scale_id, gateway::ModelGateway& gw,
                                   std::uint64_t seed, const gateway::ContextFeatures& features,
                                   const std::string& run_id) {
    std::vector<ProbeRecord> out;
    gateway::ChatRequest req;
    req.system_text = system_context(agent);
    req.purpose = gateway::Purpose::probe;
    req.features = features;
    req.features.scale = scale_id;
    for (const auto& item : scale_items(scale_id, agent.group)) {
        ProbeRecord rec{run_id, features.tick, agent.persona.name, agent.index, scale_id, item.item_id, std::nullopt};
        req.user_text = probe_prompt(agent, item);
        for (int attempt = 0; attempt < 2 && !rec.response; ++attempt) {
            req.decoding = gateway::DecodingParams::deterministic(
                mix_seed({seed, fnv1a64(item.item_id), static_cast<std::uint64_t>(attempt)}));
            rec.response = parse_likert(gw.complete(req));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace igsim::world
