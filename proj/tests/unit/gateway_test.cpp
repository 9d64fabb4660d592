// Copyright 2026 The attrib Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "attrib/gateway.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "attrib/attribution.hpp"
#include "attrib/error.hpp"
#include "attrib/hashing.hpp"
#include "attrib/spectral.hpp"
#include "attrib/synth.hpp"
#include "test_util.hpp"

namespace attrib {
namespace {

using nlohmann::json;
using testing::RandomImage;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no attrib::Error thrown";
  return ErrorCode::kUsage;
}

// Loopback server whose handler can be swapped per test. Records every
// request body and API key it receives.
class MockGateway {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  MockGateway() {
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
      Handler h;
      {
        std::lock_guard<std::mutex> lock(mu_);
        bodies_.push_back(req.body);
        paths_.push_back(req.path);
        api_keys_.push_back(req.get_header_value("X-Api-Key"));
        h = handler_;
      }
      h(req, res);
    };
    server_.Post("/v1/generate", dispatch);
    server_.Post("/v1/caption", dispatch);
    server_.Post("/v1/embed", dispatch);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockGateway() {
    server_.stop();
    thread_.join();
  }

  void Handle(Handler h) {
    std::lock_guard<std::mutex> lock(mu_);
    handler_ = std::move(h);
  }
  void Reply(int status, std::string body) {
    Handle([status, body](const httplib::Request&, httplib::Response& res) {
      res.status = status;
      res.set_content(body, "application/json");
    });
  }

  GatewayConfig Config() const {
    GatewayConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
    cfg.timeout_ms = 2000;
    cfg.backoff_ms = 1;
    return cfg;
  }
  std::vector<std::string> bodies() const {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }
  std::vector<std::string> api_keys() const {
    std::lock_guard<std::mutex> lock(mu_);
    return api_keys_;
  }
  std::size_t requests() const { return bodies().size(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  Handler handler_;
  std::vector<std::string> bodies_, paths_, api_keys_;
};

std::string Png64(const Image& img) { return base64_encode(encode_png(img)); }

TEST(GatewayTest, GenerateDecodesImages) {
  MockGateway gw;
  const Image a = RandomImage(16, 16, 3, 1), b = RandomImage(16, 16, 3, 2);
  gw.Reply(200, json{{"images", {Png64(a), Png64(b)}}}.dump());
  auto cfg = gw.Config();
  cfg.api_key = "sekret";
  const GatewayClient client(cfg);
  const auto images = client.remote_generate("m1", "a red fox", 2, 42);
  ASSERT_EQ(images.size(), 2u);
  EXPECT_EQ(images[0], a);
  EXPECT_EQ(images[1], b);
  const auto req = json::parse(gw.bodies().at(0));
  EXPECT_EQ(req["model_id"], "m1");
  EXPECT_EQ(req["prompt"], "a red fox");
  EXPECT_EQ(req["n"], 2);
  EXPECT_EQ(req["seed"], 42);
  EXPECT_EQ(gw.api_keys().at(0), "sekret");

  client.remote_generate("m1", "a red fox", 2, std::nullopt);
  EXPECT_FALSE(json::parse(gw.bodies().at(1)).contains("seed"));
}

TEST(GatewayTest, RetriesServerErrorsWithSameBody) {
  MockGateway gw;
  std::atomic<int> calls{0};
  const Image img = RandomImage(8, 8, 3, 3);
  gw.Handle([&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 500;
      res.set_content(R"({"error":"overloaded","message":"try later"})", "application/json");
      return;
    }
    res.set_content(json{{"images", {Png64(img)}}}.dump(), "application/json");
  });
  const GatewayClient client(gw.Config());
  EXPECT_EQ(client.remote_generate("m2", "p", 1, 7).at(0), img);
  const auto bodies = gw.bodies();
  ASSERT_EQ(bodies.size(), 3u);
  EXPECT_EQ(bodies[0], bodies[1]);
  EXPECT_EQ(bodies[1], bodies[2]);
}

TEST(GatewayTest, PersistentServerErrorIsRemote) {
  MockGateway gw;
  gw.Reply(503, R"({"error":"down","message":"maintenance"})");
  const GatewayClient client(gw.Config());
  EXPECT_EQ(CodeOf([&] { client.remote_generate("m", "p", 1, 0); }), ErrorCode::kRemote);
  EXPECT_EQ(gw.requests(), 3u);
}

TEST(GatewayTest, ClientErrorIsNotRetried) {
  MockGateway gw;
  gw.Reply(400, R"({"error":"bad_request","message":"no such model"})");
  const GatewayClient client(gw.Config());
  try {
    client.remote_generate("m", "p", 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRemote);
    EXPECT_NE(std::string(e.what()).find("bad_request"), std::string::npos);
  }
  EXPECT_EQ(gw.requests(), 1u);
}

TEST(GatewayTest, GenerateProtocolErrors) {
  MockGateway gw;
  const GatewayClient client(gw.Config());
  gw.Reply(200, R"({"pictures": []})");
  EXPECT_EQ(CodeOf([&] { client.remote_generate("m", "p", 1, 0); }), ErrorCode::kProtocol);
  gw.Reply(200, "<html>oops</html>");
  EXPECT_EQ(CodeOf([&] { client.remote_generate("m", "p", 1, 0); }), ErrorCode::kProtocol);
  gw.Reply(200, R"({"images": ["%%%"]})");
  EXPECT_EQ(CodeOf([&] { client.remote_generate("m", "p", 1, 0); }), ErrorCode::kProtocol);
  gw.Reply(200, json{{"images", {base64_encode(std::vector<std::uint8_t>{1, 2, 3})}}}.dump());
  EXPECT_EQ(CodeOf([&] { client.remote_generate("m", "p", 1, 0); }), ErrorCode::kProtocol);
  gw.Reply(200, json{{"images", {Png64(RandomImage(4, 4, 3, 0))}}}.dump());
  EXPECT_EQ(CodeOf([&] { client.remote_generate("m", "p", 2, 0); }), ErrorCode::kCountMismatch);
}

TEST(GatewayTest, Caption) {
  MockGateway gw;
  const GatewayClient client(gw.Config());
  gw.Reply(200, R"({"prompt": "a city street with a lot of buildings"})");
  const Image img = RandomImage(12, 12, 3, 5);
  const Prompt p = client.remote_caption(img);
  EXPECT_EQ(p.text, "a city street with a lot of buildings");
  EXPECT_EQ(p.source, PromptOrigin::kGenerated);
  const auto sent = json::parse(gw.bodies().at(0))["image"].get<std::string>();
  EXPECT_EQ(decode_image(base64_decode(sent)), img);

  gw.Reply(200, R"({"prompt": ""})");
  EXPECT_EQ(CodeOf([&] { client.remote_caption(img); }), ErrorCode::kProtocol);
  EXPECT_EQ(CodeOf([&] { RemoteCaptionSource(client).invert(img); }), ErrorCode::kPromptUnavailable);
}

TEST(GatewayTest, TimeoutIsTransport) {
  MockGateway gw;
  gw.Handle([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"prompt":"late"})", "application/json");
  });
  auto cfg = gw.Config();
  cfg.timeout_ms = 100;
  cfg.retries = 0;
  EXPECT_EQ(CodeOf([&] { GatewayClient(cfg).remote_caption(RandomImage(4, 4, 3, 0)); }),
            ErrorCode::kTransport);
}

TEST(GatewayTest, UnreachableIsTransport) {
  GatewayConfig cfg;
  {
    MockGateway gw;
    cfg = gw.Config();
  }
  cfg.retries = 1;
  EXPECT_EQ(CodeOf([&] { GatewayClient(cfg).remote_embed(RandomImage(4, 4, 3, 0)); }),
            ErrorCode::kTransport);
}

TEST(GatewayTest, Embed) {
  MockGateway gw;
  const GatewayClient client(gw.Config());
  std::vector<double> unit(8, 0.0);
  unit[3] = 1.0;
  gw.Reply(200, json{{"vector", unit}, {"dim", 8}}.dump());
  const auto fv = client.remote_embed(RandomImage(4, 4, 3, 0));
  EXPECT_EQ(fv.dim(), 8u);
  EXPECT_EQ(fv.values, unit);
  EXPECT_EQ(fv.extractor_id, "embed");

  gw.Reply(200, json{{"vector", unit}, {"dim", 7}}.dump());
  EXPECT_EQ(CodeOf([&] { client.remote_embed(RandomImage(4, 4, 3, 0)); }), ErrorCode::kProtocol);
  gw.Reply(200, R"({"vector": [0.5, NaN, 0.1], "dim": 3})");
  EXPECT_EQ(CodeOf([&] { client.remote_embed(RandomImage(4, 4, 3, 0)); }), ErrorCode::kNonFinite);
  gw.Reply(200, R"({"vector": [-Infinity, 1.0], "dim": 2})");
  EXPECT_EQ(CodeOf([&] { client.remote_embed(RandomImage(4, 4, 3, 0)); }), ErrorCode::kNonFinite);
  gw.Reply(200, R"({"vector": ["NaN", 1.0], "dim": 2})");
  EXPECT_EQ(CodeOf([&] { client.remote_embed(RandomImage(4, 4, 3, 0)); }), ErrorCode::kProtocol);
}

TEST(GatewayTest, ConfigValidation) {
  GatewayConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.timeout_ms = 0;
  EXPECT_EQ(CodeOf([&] { GatewayClient{cfg}; }), ErrorCode::kInvalidParam);
}

// The remote backend drives a full attribution when the server mirrors the
// synthetic family.
TEST(GatewayTest, RemoteBackendClosedLoop) {
  MockGateway gw;
  const SyntheticBackend local(make_family(4, 2023));
  gw.Handle([&](const httplib::Request& req, httplib::Response& res) {
    const auto j = json::parse(req.body);
    const auto images = local.generate(j["model_id"], Prompt{j["prompt"]}, j["n"], j["seed"]);
    json out = {{"images", json::array()}};
    for (const auto& img : images) out["images"].push_back(Png64(img));
    res.set_content(out.dump(), "application/json");
  });
  const RemoteBackend remote{GatewayClient(gw.Config())};
  const Comparator cmp(SimilarityMethod::kSpectral, std::make_shared<SpectralExtractor>());
  const std::vector<ModelId> models{"m1", "m2", "m3", "m4"};
  const AttributionConfig cfg{4, RankScheme::kBest, 2023};
  const Prompt p{"a quiet harbour"};
  const Image test = synth_generate(local.spec("m3"), p, 12345);
  const auto over_wire = Attributor(models, remote, cmp, cfg).attribute(test, p);
  const auto in_process = Attributor(models, local, cmp, cfg).attribute(test, p);
  EXPECT_EQ(over_wire.best, "m3");
  EXPECT_EQ(over_wire.final_scores, in_process.final_scores);
}

TEST(GatewayTest, ConcurrentRequests) {
  MockGateway gw;
  gw.Reply(200, R"({"prompt": "same"})");
  const GatewayClient client(gw.Config());
  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 5; ++i) {
        if (client.remote_caption(RandomImage(4, 4, 3, i)).text == "same") ++ok;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ok.load(), 30);
}

}  // namespace
}  // namespace attrib
