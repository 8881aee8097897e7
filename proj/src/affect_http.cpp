#include "affectrag/affect_http.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace affectrag {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw DataError("provider url missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

struct HttpAffectProvider::Impl {
    httplib::Client client;
    std::string path;
    explicit Impl(const ParsedUrl& u, int timeout_sec) : client(u.host_port), path(u.path) {
        client.set_connection_timeout(timeout_sec);
        client.set_read_timeout(timeout_sec);
    }
};

HttpAffectProvider::HttpAffectProvider(HttpProviderOptions options) : options_(std::move(options)) {
    auto parsed = parse_url(options_.url);
    impl_ = std::make_unique<Impl>(parsed, options_.timeout_sec);
    if (const char* token = std::getenv(options_.token_env.c_str()); token && *token) {
        impl_->client.set_bearer_token_auth(token);
    }
}

HttpAffectProvider::~HttpAffectProvider() = default;

std::string HttpAffectProvider::config_id() const {
    return "http-" + options_.url + "-w" + std::to_string(options_.declared_width);
}

std::string HttpAffectProvider::post(const std::string& body) {
    std::string reply;
    with_retries(options_.retry, [&] {
        auto res = impl_->client.Post(impl_->path, body, "application/json");
        if (!res) {
            throw TransportError("provider unreachable at " + options_.url + ": " +
                                 httplib::to_string(res.error()));
        }
        if (res->status == 429 || res->status >= 500) {
            throw TransportError("provider returned status " + std::to_string(res->status));
        }
        if (res->status != 200) {
            throw TransportError("provider returned status " + std::to_string(res->status) +
                                     ": " + res->body,
                                 /*retryable=*/false);
        }
        reply = res->body;
    });
    return reply;
}

std::vector<float> HttpAffectProvider::embed(const std::string& text, const AffectDimension& dim) {
    dim.check();
    json req{{"text", build_affect_prompt(dim, text)}, {"task", dim.id()}, {"mode", "embedding"}};
    std::string reply = post(req.dump());
    json j;
    try {
        j = json::parse(reply);
    } catch (const json::exception& e) {
        throw TransportError(std::string("unparseable embedding reply: ") + e.what(), false);
    }
    if (!j.contains("vector") || !j["vector"].is_array()) {
        throw TransportError("embedding reply missing 'vector' array", false);
    }
    std::vector<float> v;
    v.reserve(j["vector"].size());
    for (const auto& x : j["vector"]) v.push_back(x.get<float>());
    if (v.size() != options_.declared_width) {
        throw DataError("provider returned width " + std::to_string(v.size()) + ", expected " +
                        std::to_string(options_.declared_width));
    }
    EmbeddingRecord rec{"", dim, v};
    rec.check();
    return v;
}

AffectValue HttpAffectProvider::annotate(const std::string& text, const AffectDimension& dim) {
    dim.check();
    json req{{"text", build_affect_prompt(dim, text)}, {"task", dim.id()}, {"mode", "annotation"}};
    std::string reply = post(req.dump());
    json j;
    try {
        j = json::parse(reply);
    } catch (const json::exception& e) {
        throw TransportError(std::string("unparseable annotation reply: ") + e.what(), false);
    }
    if (!j.contains("label") || !j["label"].is_string()) {
        throw TransportError("annotation reply missing 'label' string", false);
    }
    return parse_annotation_reply(dim, j["label"].get<std::string>());
}

}  // namespace affectrag
