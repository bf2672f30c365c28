// Exercises the embedding-service client against an in-process fake
// sidecar speaking the same wire protocol.

#include "clipstate/embedder_client.hpp"
#include "clipstate/errors.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

using namespace clipstate;
using nlohmann::json;

namespace {

/// Deterministic text -> vector map standing in for an encoder.
std::vector<double> fake_embed(const std::string& s, std::size_t dim, double scale) {
    std::vector<double> v(dim);
    std::size_t h = std::hash<std::string>{}(s);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        h = h * 6364136223846793005ULL + 1442695040888963407ULL;
        v[i] = static_cast<double>(h >> 11) / 9007199254740992.0 - 0.5;
        norm += v[i] * v[i];
    }
    for (auto& x : v) x = x / std::sqrt(norm) * scale;
    return v;
}

class FakeSidecar {
public:
    explicit FakeSidecar(std::size_t dim = 8) : dim_(dim) {
        server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(json{{"status", "ok"}, {"dim", dim_}, {"model", "fake"}}.dump(), "application/json");
        });
        server_.Post("/v1/embed_text", [this](const httplib::Request& req, httplib::Response& res) {
            if (failures_left_ > 0) {
                --failures_left_;
                res.status = 503;
                return;
            }
            const auto body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.contains("texts")) {
                res.status = 400;
                res.set_content(R"({"error":"texts required"})", "application/json");
                return;
            }
            json vectors = json::array();
            for (const auto& t : body["texts"]) vectors.push_back(fake_embed(t.get<std::string>(), dim_, scale_));
            res.set_content(json{{"dim", dim_}, {"vectors", vectors}}.dump(), "application/json");
        });
        server_.Post("/v1/embed_image", [this](const httplib::Request& req, httplib::Response& res) {
            const auto body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.contains("image_b64")) {
                res.status = 400;
                return;
            }
            last_image_b64_ = body["image_b64"].get<std::string>();
            res.set_content(json{{"dim", dim_}, {"vectors", {fake_embed(last_image_b64_, dim_, 1.0)}}}.dump(),
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeSidecar() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    void fail_next(int n) { failures_left_ = n; }
    void set_scale(double s) { scale_ = s; }
    const std::string& last_image_b64() const { return last_image_b64_; }

private:
    std::size_t dim_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> failures_left_{0};
    std::atomic<double> scale_{1.0};
    std::string last_image_b64_;
};

EmbedderEndpoint endpoint(const std::string& url, int retries = 2) {
    EmbedderEndpoint ep;
    ep.base_url = url;
    ep.timeout = std::chrono::milliseconds(2000);
    ep.retries = retries;
    return ep;
}

}  // namespace

TEST_CASE("health handshake reports dim and model") {
    FakeSidecar sidecar(8);
    const EmbedderClient client(endpoint(sidecar.url()));
    const auto h = client.health();
    CHECK(h.status == "ok");
    CHECK(h.dim == 8);
    CHECK(h.model == "fake");
}

TEST_CASE("text embeddings are unit vectors and repeatable") {
    FakeSidecar sidecar(8);
    const EmbedderClient client(endpoint(sidecar.url()));
    const auto v = client.embed_texts({"an open door", "an open door", "a closed door"});
    REQUIRE(v.size() == 3);
    CHECK(v[0] == v[1]);
    CHECK(cosine_similarity(v[0], v[0]) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(v[0] == v[2]);
    CHECK(client.renormalized_count() == 0);
}

TEST_CASE("non-unit vectors are normalized locally with a warning") {
    FakeSidecar sidecar(8);
    sidecar.set_scale(3.0);
    std::vector<std::string> warnings;
    const EmbedderClient client(endpoint(sidecar.url()), [&](const std::string& w) { warnings.push_back(w); });
    const auto v = client.embed_texts({"x"});
    CHECK(std::abs(euclidean_norm(v[0].values()) - 1.0) < 1e-12);
    CHECK(warnings.size() == 1);
    CHECK(client.renormalized_count() == 1);
}

TEST_CASE("transient failures are retried") {
    FakeSidecar sidecar(8);
    sidecar.fail_next(2);
    CHECK(EmbedderClient(endpoint(sidecar.url(), 2)).embed_texts({"x"}).size() == 1);
    sidecar.fail_next(2);
    CHECK_THROWS_AS(EmbedderClient(endpoint(sidecar.url(), 1)).embed_texts({"x"}), TransportError);
}

TEST_CASE("unreachable service is a transport error") {
    std::string url;
    {
        FakeSidecar gone(4);
        url = gone.url();
    }
    CHECK_THROWS_AS(EmbedderClient(endpoint(url, 0)).health(), TransportError);
}

TEST_CASE("image bytes travel base64 encoded") {
    FakeSidecar sidecar(8);
    const EmbedderClient client(endpoint(sidecar.url()));
    const std::string bytes("\x89PNG\r\n\x1a\n", 8);
    const auto v = client.embed_image(bytes);
    CHECK(v.dim() == 8);
    CHECK(sidecar.last_image_b64() == "iVBORw0KGgo=");
}

TEST_CASE("dimension mismatch against local data is a validation error") {
    FakeSidecar sidecar(8);
    CHECK(embed_via_service(endpoint(sidecar.url()), {"a"}, 8).size() == 1);
    CHECK_THROWS_AS(embed_via_service(endpoint(sidecar.url()), {"a"}, 16), ValidationError);
}

TEST_CASE("endpoint validation") {
    CHECK_THROWS_AS(EmbedderClient(endpoint("")), ValidationError);
    CHECK_THROWS_AS(EmbedderClient(endpoint("http://localhost:1", -1)), ValidationError);
}
