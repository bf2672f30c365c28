#pragma once

#include "clipstate/embedding.hpp"

#include <chrono>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace clipstate {

struct EmbedderEndpoint {
    std::string base_url;
    std::chrono::milliseconds timeout{30'000};
    int retries = 2;

    void validate() const;
};

struct EmbedderHealth {
    std::string status;
    std::size_t dim = 0;
    std::string model;
};

/// HTTP client for the embedding sidecar.
///
///   GET  /healthz        -> {"status":"ok","dim":d,"model":name}
///   POST /v1/embed_text  {"texts":[...]}      -> {"dim":d,"vectors":[[...],...]}
///   POST /v1/embed_image {"image_b64":"..."}  -> {"dim":d,"vectors":[[...]]}
///
/// Connection failures, timeouts and 5xx responses are retried up to
/// `retries` times and then surface as TransportError. 4xx responses and
/// malformed payloads are ValidationError.
class EmbedderClient {
public:
    using WarningSink = std::function<void(const std::string&)>;

    explicit EmbedderClient(EmbedderEndpoint endpoint, WarningSink warn = {});

    EmbedderHealth health() const;
    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) const;
    EmbeddingVector embed_image(std::string_view image_bytes) const;

    /// Non-unit vectors received since construction (normalized locally).
    std::size_t renormalized_count() const noexcept { return renormalized_; }

private:
    std::string post(const std::string& path, const std::string& body) const;
    std::vector<EmbeddingVector> parse_vectors(const std::string& body) const;

    EmbedderEndpoint endpoint_;
    WarningSink warn_;
    mutable std::size_t renormalized_ = 0;
};

/// Embeds through the service and verifies the dimension matches `expected_dim`.
std::vector<EmbeddingVector> embed_via_service(const EmbedderEndpoint& ep, const std::vector<std::string>& texts,
                                               std::size_t expected_dim);
EmbeddingVector embed_image_via_service(const EmbedderEndpoint& ep, std::string_view image_bytes,
                                        std::size_t expected_dim);

}  // namespace clipstate
