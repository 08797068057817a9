#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tmpc/errors.hpp"
#include "tmpc/generators.hpp"
#include "tmpc/rewards.hpp"

namespace tmpc {
namespace {

using nlohmann::json;

struct Endpoint {
    std::string base; // scheme://host[:port]
    std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ContractViolation("endpoint must include a scheme: " + url);
    }
    const std::size_t path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) {
        return Endpoint{url, "/"};
    }
    return Endpoint{url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(httplib::Error err) {
    switch (err) {
        case httplib::Error::ConnectionTimeout:
        case httplib::Error::Read:
        case httplib::Error::Write:
        case httplib::Error::Connection:
            return true;
        default:
            return false;
    }
}

// POSTs `body` once, retrying a single time on timeout-class transport
// failures. The body is byte-identical across attempts.
httplib::Response post_json(const std::string& endpoint, const std::string& api_key_env,
                            std::chrono::milliseconds timeout,
                            std::chrono::milliseconds backoff, const std::string& body) {
    const Endpoint ep = parse_endpoint(endpoint);

    httplib::Headers headers;
    if (const char* key = std::getenv(api_key_env.c_str()); key != nullptr && key[0] != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    httplib::Error last_error = httplib::Error::Success;
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff * (1 << (attempt - 1)));
        }
        httplib::Client client(ep.base);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        auto result = client.Post(ep.path, headers, body, "application/json");
        if (result) {
            return result.value();
        }
        last_error = result.error();
        if (!retryable(last_error)) {
            break;
        }
    }
    throw BackendError("http: transport failure against " + endpoint + ": " +
                       httplib::to_string(last_error));
}

void check_status(const httplib::Response& response, const std::string& endpoint) {
    if (response.status == 401 || response.status == 403) {
        // Deliberately does not echo any credential material.
        throw CredentialError("http: authentication rejected by " + endpoint + " (status " +
                              std::to_string(response.status) + ")");
    }
    if (response.status < 200 || response.status >= 300) {
        throw BackendError("http: " + endpoint + " returned status " +
                           std::to_string(response.status));
    }
}

json parse_body(const httplib::Response& response, const std::string& endpoint) {
    try {
        return json::parse(response.body);
    } catch (const json::exception& e) {
        throw MalformedBodyError("http: unparseable body from " + endpoint + ": " + e.what());
    }
}

class InFlightGate {
public:
    explicit InFlightGate(int limit) : limit_(limit > 0 ? limit : 1) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int limit_;
    int active_ = 0;
};

} // namespace

std::string http_chat_call(const HttpBackendConfig& config, const GeneratorRequest& request) {
    json body{
        {"model", config.model_name},
        {"messages",
         json::array({json{{"role", "system"}, {"content", request.system_prompt}},
                      json{{"role", "user"}, {"content", request.user_prompt}}})},
        {"temperature", request.sampling.temperature},
        {"max_tokens", request.sampling.max_output_units},
    };
    if (request.seed.has_value()) {
        body["seed"] = *request.seed;
    }

    const httplib::Response response = post_json(config.endpoint, config.api_key_env,
                                                 config.timeout, config.retry_backoff,
                                                 body.dump());
    check_status(response, config.endpoint);
    const json doc = parse_body(response, config.endpoint);

    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw MalformedBodyError("http: response from " + config.endpoint +
                                 " has no choices");
    }
    const json& first = doc["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw MalformedBodyError("http: choice from " + config.endpoint +
                                 " has no message content");
    }
    std::string content = first["message"]["content"].get<std::string>();
    if (content.empty()) {
        throw EmptyResponseError("http: " + config.endpoint + " returned an empty completion");
    }
    return content;
}

struct HttpChatGenerator::Gate : InFlightGate {
    using InFlightGate::InFlightGate;
};

HttpChatGenerator::HttpChatGenerator(HttpBackendConfig config)
    : config_(std::move(config)), gate_(new Gate(config_.max_in_flight)) {}

HttpChatGenerator::~HttpChatGenerator() {
    delete gate_;
}

std::string HttpChatGenerator::generate(const GeneratorRequest& request) {
    gate_->acquire();
    try {
        std::string out = http_chat_call(config_, request);
        gate_->release();
        return out;
    } catch (...) {
        gate_->release();
        throw;
    }
}

double http_reward_call(const RewardHttpConfig& config, const ScoreRequest& request) {
    const json body{
        {"context", request.context},
        {"candidate", request.candidate},
        {"granularity", to_string(request.granularity)},
    };
    const httplib::Response response = post_json(config.endpoint, config.api_key_env,
                                                 config.timeout, config.retry_backoff,
                                                 body.dump());
    check_status(response, config.endpoint);
    const json doc = parse_body(response, config.endpoint);
    if (!doc.contains("score") || !doc["score"].is_number()) {
        throw MalformedBodyError("http: reward response from " + config.endpoint +
                                 " has no numeric score");
    }
    return doc["score"].get<double>();
}

} // namespace tmpc
