#include "igsim/gateway/remote.hpp"

#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "igsim/common/io.hpp"
#include "igsim/common/rng.hpp"

namespace igsim::gateway {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

RemoteConfig parse_remote_config(const std::string& text) {
    RemoteConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("gateway config line " + std::to_string(lineno) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto val = trim(line.substr(eq + 1));
        try {
            if (key == "base_url") cfg.base_url = val;
            else if (key == "api_key_env") cfg.api_key_env = val;
            else if (key == "model") cfg.model = val;
            else if (key == "timeout_s") cfg.timeout_s = std::stod(val);
            else if (key == "retries") cfg.retries = std::stoi(val);
            else if (key == "backoff_initial_s") cfg.backoff_initial_s = std::stod(val);
            else if (key == "rate_per_s") cfg.rate_per_s = std::stod(val);
            else if (key == "burst") cfg.burst = std::stod(val);
            else throw ConfigError("gateway config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError("gateway config: bad value for '" + key + "'");
        }
    }
    if (cfg.base_url.empty()) throw ConfigError("gateway config: base_url is required");
    if (cfg.model.empty()) throw ConfigError("gateway config: model is required");
    if (cfg.retries < 1) throw ConfigError("gateway config: retries must be >= 1");
    if (cfg.timeout_s <= 0) throw ConfigError("gateway config: timeout_s must be > 0");
    return cfg;
}

RemoteConfig load_remote_config(const std::filesystem::path& path) { return parse_remote_config(read_file(path)); }

TokenBucket::TokenBucket(double rate_per_s, double burst)
    : rate_(rate_per_s), burst_(std::max(1.0, burst)), tokens_(burst_), last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
    if (rate_ <= 0) return;
    std::unique_lock lock(mu_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const double wait = (1.0 - tokens_) / rate_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        lock.lock();
    }
}

RemoteGateway::RemoteGateway(RemoteConfig cfg) : cfg_(std::move(cfg)), bucket_(cfg_.rate_per_s, cfg_.burst) {
    const auto sep = cfg_.base_url.find("://");
    if (sep == std::string::npos) throw ConfigError("gateway config: base_url needs a scheme");
    const auto slash = cfg_.base_url.find('/', sep + 3);
    scheme_host_ = cfg_.base_url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "/v1" : cfg_.base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
    if (const char* k = std::getenv(cfg_.api_key_env.c_str())) api_key_ = k;
}

std::string RemoteGateway::request_body(const ChatRequest& req) const {
    nlohmann::json body = {
        {"model", cfg_.model},
        {"messages", {{{"role", "system"}, {"content", req.system_text}}, {{"role", "user"}, {"content", req.user_text}}}},
        {"temperature", req.decoding.temperature},
        {"top_p", req.decoding.top_p},
        {"top_k", req.decoding.top_k},
        {"max_tokens", req.decoding.max_tokens},
        {"seed", req.decoding.seed},
    };
    return body.dump();
}

std::string RemoteGateway::complete(const ChatRequest& req) {
    validate(req);
    std::string request_id;
    {
        std::lock_guard lock(id_mu_);
        std::ostringstream os;
        os << "igsim-" << std::hex << mix_seed({req.decoding.seed, fnv1a64(req.user_text), ++counter_});
        request_id = os.str();
    }
    const auto body = request_body(req);
    httplib::Client cli(scheme_host_);
    const auto secs = static_cast<time_t>(cfg_.timeout_s);
    const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers = {{"X-Request-Id", request_id}};
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::string last_error;
    double backoff = cfg_.backoff_initial_s;
    for (int attempt = 1; attempt <= cfg_.retries; ++attempt) {
        bucket_.acquire();
        auto res = cli.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw GatewayError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), request_id);
        } else {
            try {
                auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const std::exception& e) {
                last_error = std::string("malformed response: ") + e.what();
            }
        }
        if (attempt < cfg_.retries) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2;
        }
    }
    throw GatewayError("gave up after " + std::to_string(cfg_.retries) + " attempts: " + last_error, request_id);
}

}  // namespace igsim::gateway
