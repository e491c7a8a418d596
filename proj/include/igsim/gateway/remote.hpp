#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <string>

#include "igsim/gateway/types.hpp"

namespace igsim::gateway {

struct RemoteConfig {
    std::string base_url;                  // scheme://host[:port][/prefix]; prefix defaults to /v1
    std::string api_key_env = "IGSIM_API_KEY";
    std::string model;
    double timeout_s = 60.0;
    int retries = 3;                       // total attempts
    double backoff_initial_s = 0.5;
    double rate_per_s = 0.0;               // 0 disables rate limiting
    double burst = 1.0;
};

/// Parses key=value lines; '#' starts a comment.
RemoteConfig parse_remote_config(const std::string& text);
RemoteConfig load_remote_config(const std::filesystem::path& path);

class TokenBucket {
public:
    TokenBucket(double rate_per_s, double burst);
    void acquire();

private:
    double rate_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

/// OpenAI-compatible chat-completion client.
class RemoteGateway : public ModelGateway {
public:
    explicit RemoteGateway(RemoteConfig cfg);
    std::string complete(const ChatRequest& req) override;

    /// Request body sent for `req`; exposed for inspection.
    std::string request_body(const ChatRequest& req) const;

private:
    RemoteConfig cfg_;
    std::string scheme_host_;
    std::string path_;
    std::string api_key_;
    TokenBucket bucket_;
    std::mutex id_mu_;
    unsigned long long counter_ = 0;
};

}  // namespace igsim::gateway
