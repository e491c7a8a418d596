#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "igsim/common/errors.hpp"
#include "igsim/xdesign/condition.hpp"

namespace igsim::gateway {

enum class Purpose { plan, act, converse, probe, classify_hostile, rate_hostility, reflect };

const char* purpose_name(Purpose p);
Purpose parse_purpose(const std::string& name);

struct DecodingParams {
    double temperature = 0.8;
    double top_p = 0.9;
    int top_k = 50;
    int max_tokens = 256;
    std::uint64_t seed = 0;

    /// Settings for plans, actions and dialogue.
    static DecodingParams generative(std::uint64_t seed) { return {0.8, 0.9, 50, 256, seed}; }
    /// Near-greedy settings for classification, rating and other subroutines.
    static DecodingParams deterministic(std::uint64_t seed) { return {0.01, 0.9, 50, 256, seed}; }
};

/// Structured facts about the decision being asked for. The remote backend
/// ignores them; the scripted backend routes on them.
struct ContextFeatures {
    xdesign::ConditionCell cell;
    bool intergroup = false;
    long tick = 0;
    int agent_index = -1;
    int target_index = -1;
    int turn = -1;  // conversation turn; -1 for the engage question
    std::string scale;  // probe scale id
    std::string actor_name;
    std::string target_name;
    std::string target_group;
    std::string location;
};

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    DecodingParams decoding;
    Purpose purpose = Purpose::act;
    ContextFeatures features;
};

/// Throws ValidationError for empty texts.
void validate(const ChatRequest& req);

/// Backend failure after retries (transport errors, 5xx, malformed responses).
class GatewayError : public Error {
public:
    GatewayError(const std::string& what, std::string request_id)
        : Error(what + " [request " + request_id + "]"), request_id_(std::move(request_id)) {}
    const std::string& request_id() const noexcept { return request_id_; }

private:
    std::string request_id_;
};

/// Uniform chat-completion backend.
class ModelGateway {
public:
    virtual ~ModelGateway() = default;
    virtual std::string complete(const ChatRequest& req) = 0;
};

/// Passes every request to a hook before forwarding it.
class InspectingGateway : public ModelGateway {
public:
    using Hook = std::function<void(const ChatRequest&)>;
    InspectingGateway(ModelGateway& inner, Hook hook) : inner_(inner), hook_(std::move(hook)) {}
    std::string complete(const ChatRequest& req) override {
        hook_(req);
        return inner_.complete(req);
    }

private:
    ModelGateway& inner_;
    Hook hook_;
};

}  // namespace igsim::gateway
