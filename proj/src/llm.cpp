#include <cstdlib>
#include <fstream>
#include <map>

#include "affectrag/infer.hpp"
#include "httplib.h"
#include "json.hpp"

namespace affectrag {

using nlohmann::json;

// --- majority-vote mock ------------------------------------------------------

std::vector<std::pair<int, std::string>> MajorityVoteLlm::parse_example_labels(
    const std::string& prompt) {
    std::vector<std::pair<int, std::string>> labels;
    static const std::string needle = "The label of this text: ";
    size_t pos = 0;
    while ((pos = prompt.find(needle, pos)) != std::string::npos) {
        size_t p = pos + needle.size();
        size_t digits_start = p;
        while (p < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[p]))) ++p;
        if (p == digits_start || p >= prompt.size() || prompt[p] != '.') {
            pos += needle.size();
            continue;
        }
        int label = std::stoi(prompt.substr(digits_start, p - digits_start));
        size_t name_start = p + 1;
        while (name_start < prompt.size() && prompt[name_start] == ' ') ++name_start;
        size_t name_end = prompt.find_first_of(".\n", name_start);
        std::string name = name_end == std::string::npos
                               ? prompt.substr(name_start)
                               : prompt.substr(name_start, name_end - name_start);
        labels.emplace_back(label, trim(name));
        pos = p;
    }
    return labels;
}

std::string MajorityVoteLlm::generate(const std::string& prompt) {
    auto labels = parse_example_labels(prompt);
    if (labels.empty()) return "";
    std::map<int, size_t> votes;
    std::map<int, std::string> names;
    for (const auto& [label, name] : labels) {
        ++votes[label];
        names.emplace(label, name);
    }
    int best = votes.begin()->first;
    size_t best_count = votes.begin()->second;
    for (const auto& [label, count] : votes) {
        if (count > best_count) {  // ties keep the lowest label (map is ordered)
            best = label;
            best_count = count;
        }
    }
    return std::to_string(best) + ". " + names[best];
}

// --- http client ---------------------------------------------------------------

struct HttpLlmClient::Impl {
    httplib::Client client;
    std::string path;
    Impl(const std::string& host_port, std::string p, int timeout_sec)
        : client(host_port), path(std::move(p)) {
        client.set_connection_timeout(timeout_sec);
        client.set_read_timeout(timeout_sec);
    }
};

HttpLlmClient::HttpLlmClient(HttpLlmOptions options)
    : options_(std::move(options)), bucket_(options_.requests_per_minute, 4) {
    std::string url = options_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw DataError("llm base url missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string host_port = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string base_path = path_start == std::string::npos ? "" : url.substr(path_start);
    impl_ = std::make_unique<Impl>(host_port, base_path + "/chat/completions", options_.timeout_sec);
    if (const char* token = std::getenv(options_.token_env.c_str()); token && *token) {
        impl_->client.set_bearer_token_auth(token);
    }
}

HttpLlmClient::~HttpLlmClient() = default;

std::string HttpLlmClient::generate(const std::string& prompt) {
    if (prompt.empty()) throw DataError("llm generate: empty prompt");
    bucket_.acquire();
    json messages = json::array();
    if (options_.system_prompt) {
        messages.push_back({{"role", "system"}, {"content", *options_.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", prompt}});
    json req{{"model", options_.model},
             {"messages", messages},
             {"temperature", options_.temperature},
             {"max_tokens", options_.max_output_tokens}};

    auto res = impl_->client.Post(impl_->path, req.dump(), "application/json");
    if (!res) {
        throw TransportError("llm endpoint unreachable at " + options_.base_url + ": " +
                             httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("llm endpoint returned status " + std::to_string(res->status));
    }
    if (res->status != 200) {
        // 4xx replies often mean the prompt blew the context budget; report
        // the measured length alongside.
        throw TransportError("llm endpoint returned status " + std::to_string(res->status) +
                                 " (prompt length " + std::to_string(prompt.size()) +
                                 " chars): " + res->body,
                             /*retryable=*/false);
    }
    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("unparseable llm reply: ") + e.what(), false);
    }
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("llm reply missing choices[0].message.content: " + res->body, false);
    }
}

// --- response cache --------------------------------------------------------------

ResponseCache::ResponseCache(const std::filesystem::path& file) : path_(file) {
    if (path_.empty()) return;
    std::filesystem::create_directories(path_.parent_path().empty() ? "." : path_.parent_path());
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            continue;  // tolerate a torn final line from an interrupted run
        }
        entries_[{j.value("model", ""), j.value("prompt_hash", "")}] = j.value("text", "");
    }
}

std::optional<std::string> ResponseCache::get(const std::string& model,
                                              const std::string& prompt_hash) const {
    std::lock_guard<std::mutex> g(mu_);
    auto it = entries_.find({model, prompt_hash});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::put(const std::string& model, const std::string& prompt_hash,
                        const std::string& text) {
    std::lock_guard<std::mutex> g(mu_);
    auto [it, inserted] = entries_.emplace(std::make_pair(model, prompt_hash), text);
    if (!inserted) return;  // idempotent
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw DataError("cannot append to response cache: " + path_.string());
    out << json{{"model", model}, {"prompt_hash", prompt_hash}, {"text", text}}.dump() << "\n";
    out.flush();
}

std::string prompt_hash(const std::string& prompt) {
    return hex64(fnv1a64(prompt));
}

std::string generate(LlmClient& client, ResponseCache& cache, const std::string& prompt,
                     const RetryPolicy& retry) {
    if (prompt.empty()) throw DataError("generate: empty prompt");
    std::string hash = prompt_hash(prompt);
    if (auto cached = cache.get(client.model_name(), hash)) return *cached;
    std::string text;
    with_retries(retry, [&] { text = client.generate(prompt); });
    cache.put(client.model_name(), hash, text);
    return text;
}

}  // namespace affectrag
