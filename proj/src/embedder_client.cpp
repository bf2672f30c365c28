#include "clipstate/embedder_client.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <iostream>

namespace clipstate {

using nlohmann::json;

void EmbedderEndpoint::validate() const {
    if (base_url.empty()) throw ValidationError("embedder base_url is empty");
    if (retries < 0) throw ValidationError("embedder retries must be >= 0");
    if (timeout.count() <= 0) throw ValidationError("embedder timeout must be positive");
}

namespace {

httplib::Client make_client(const EmbedderEndpoint& ep) {
    httplib::Client cli(ep.base_url);
    if (!cli.is_valid()) throw ValidationError(fmt::format("invalid embedder URL '{}'", ep.base_url));
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    return cli;
}

json parse_body(const std::string& body, std::string_view what) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("embedder returned malformed {}: {}", what, e.what()));
    }
}

template <typename Call>
std::string with_retries(const EmbedderEndpoint& ep, std::string_view what, Call&& call) {
    std::string last_error;
    for (int attempt = 0; attempt <= ep.retries; ++attempt) {
        auto res = call();
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = fmt::format("HTTP {}", res->status);
            continue;
        }
        if (res->status != 200) {
            throw ValidationError(fmt::format("embedder {} rejected request: HTTP {}: {}", what, res->status, res->body));
        }
        return res->body;
    }
    throw TransportError(fmt::format("embedder {} at {} failed after {} attempt(s): {}", what, ep.base_url,
                                     ep.retries + 1, last_error));
}

}  // namespace

EmbedderClient::EmbedderClient(EmbedderEndpoint endpoint, WarningSink warn)
    : endpoint_(std::move(endpoint)), warn_(std::move(warn)) {
    endpoint_.validate();
    if (!warn_) warn_ = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
}

EmbedderHealth EmbedderClient::health() const {
    auto cli = make_client(endpoint_);
    const auto body = with_retries(endpoint_, "/healthz", [&] { return cli.Get("/healthz"); });
    const json doc = parse_body(body, "health response");
    EmbedderHealth h;
    if (!doc.is_object() || !doc.contains("status") || !doc["status"].is_string()) {
        throw ValidationError("embedder health response lacks a status");
    }
    h.status = doc["status"].get<std::string>();
    if (doc.contains("dim") && doc["dim"].is_number_integer() && doc["dim"].get<long long>() > 0) {
        h.dim = doc["dim"].get<std::size_t>();
    }
    if (doc.contains("model") && doc["model"].is_string()) h.model = doc["model"].get<std::string>();
    if (h.status != "ok") throw TransportError(fmt::format("embedder not ready: status '{}'", h.status));
    return h;
}

std::string EmbedderClient::post(const std::string& path, const std::string& body) const {
    auto cli = make_client(endpoint_);
    return with_retries(endpoint_, path, [&] { return cli.Post(path, body, "application/json"); });
}

std::vector<EmbeddingVector> EmbedderClient::parse_vectors(const std::string& body) const {
    const json doc = parse_body(body, "embedding response");
    if (!doc.is_object() || !doc.contains("dim") || !doc.contains("vectors") || !doc["vectors"].is_array() ||
        !doc["dim"].is_number_integer()) {
        throw ValidationError("embedder response must carry integer 'dim' and array 'vectors'");
    }
    const auto dim = doc["dim"].get<long long>();
    if (dim < 1) throw ValidationError("embedder reported non-positive dim");
    std::vector<EmbeddingVector> out;
    for (std::size_t k = 0; k < doc["vectors"].size(); ++k) {
        const json& v = doc["vectors"][k];
        if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
            throw ValidationError(fmt::format("embedder vector {} does not have length {}", k, dim));
        }
        std::vector<double> values;
        values.reserve(v.size());
        for (const auto& x : v) {
            if (!x.is_number()) throw ValidationError(fmt::format("embedder vector {} has a non-number", k));
            values.push_back(x.get<double>());
        }
        const double norm = euclidean_norm(values);
        if (std::abs(norm - 1.0) > 1e-4) {
            ++renormalized_;
            warn_(fmt::format("embedder vector {} has norm {:.6g}; normalizing locally", k, norm));
        }
        out.push_back(EmbeddingVector::normalized(std::move(values)));
    }
    return out;
}

std::vector<EmbeddingVector> EmbedderClient::embed_texts(const std::vector<std::string>& texts) const {
    const json req = {{"texts", texts}};
    auto vectors = parse_vectors(post("/v1/embed_text", req.dump()));
    if (vectors.size() != texts.size()) {
        throw ValidationError(fmt::format("embedder returned {} vectors for {} texts", vectors.size(), texts.size()));
    }
    return vectors;
}

EmbeddingVector EmbedderClient::embed_image(std::string_view image_bytes) const {
    const json req = {{"image_b64", httplib::detail::base64_encode(std::string(image_bytes))}};
    auto vectors = parse_vectors(post("/v1/embed_image", req.dump()));
    if (vectors.size() != 1) {
        throw ValidationError(fmt::format("embedder returned {} vectors for one image", vectors.size()));
    }
    return std::move(vectors.front());
}

namespace {

void check_dim(const EmbeddingVector& v, std::size_t expected_dim) {
    if (v.dim() != expected_dim) {
        throw ValidationError(fmt::format("embedder dim {} != local data dim {}", v.dim(), expected_dim));
    }
}

}  // namespace

std::vector<EmbeddingVector> embed_via_service(const EmbedderEndpoint& ep, const std::vector<std::string>& texts,
                                               std::size_t expected_dim) {
    EmbedderClient client(ep);
    client.health();
    auto vectors = client.embed_texts(texts);
    for (const auto& v : vectors) check_dim(v, expected_dim);
    return vectors;
}

EmbeddingVector embed_image_via_service(const EmbedderEndpoint& ep, std::string_view image_bytes,
                                        std::size_t expected_dim) {
    EmbedderClient client(ep);
    client.health();
    auto v = client.embed_image(image_bytes);
    check_dim(v, expected_dim);
    return v;
}

}  // namespace clipstate
