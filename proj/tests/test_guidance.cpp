// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "ditto/guidance/oracle.hpp"
#include "ditto/guidance/prompt.hpp"
#include "ditto/guidance/remote.hpp"

namespace {

using namespace ditto;
using namespace ditto::guidance;
using nlohmann::json;

Tensor filled(int c, int h, int w, double v) { return Tensor(c, h, w, v); }

TEST(Oracle, ZeroResidualAtTarget) {
  SyntheticOracle oracle;
  const prerender::CameraPose pose{200.0, 10.0};
  const Tensor target = oracle.target_latent(pose, 16);
  const Tensor r = oracle.residual(target, filled(1, 16, 16, 1.0), "x", 0.5, 1, pose);
  for (double v : r.data()) EXPECT_EQ(v, 0.0);
}

TEST(Oracle, EmptyMaskGivesZeroResidual) {
  SyntheticOracle oracle;
  const Tensor r = oracle.residual(filled(4, 16, 16, 0.3), filled(1, 16, 16, 0.0), "x", 0.5, 1, prerender::CameraPose{});
  for (double v : r.data()) EXPECT_EQ(v, 0.0);
}

TEST(Oracle, ResidualIsMaskedDifference) {
  SyntheticOracle oracle;
  const prerender::CameraPose pose{};
  const Tensor target = oracle.target_latent(pose, 8);
  Tensor mask(1, 8, 8, 0.0);
  for (int x = 0; x < 8; ++x) mask(0, 2, x) = 1.0;
  const Tensor z = filled(4, 8, 8, 0.1);
  const Tensor r = oracle.residual(z, mask, "x", 0.3, 9, pose);
  for (int c = 0; c < 4; ++c)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) EXPECT_DOUBLE_EQ(r(c, y, x), y == 2 ? 0.1 - target(c, y, x) : 0.0);
}

TEST(Oracle, GradientDescentConvergesLinearly) {
  SyntheticOracle oracle;
  const prerender::CameraPose pose{120.0, 0.0};
  const Tensor target = oracle.target_latent(pose, 8);
  Tensor z = filled(4, 8, 8, 0.0);
  const Tensor mask = filled(1, 8, 8, 1.0);
  const double lr = 0.1;
  const double e0 = mean_abs_diff(z, target);
  for (int k = 1; k <= 40; ++k) {
    const Tensor r = oracle.residual(z, mask, "x", 0.5, k, pose);
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] -= lr * r.data()[i];
    EXPECT_NEAR(mean_abs_diff(z, target), e0 * std::pow(1 - lr, k), 1e-12);
  }
  // Halving time ln 2 / -ln(1 - lr) is about 0.7 / lr.
  EXPECT_NEAR(std::log(2.0) / -std::log(1 - lr), 0.7 / lr, 0.5);
}

TEST(Oracle, Deterministic) {
  SyntheticOracle a, b;
  const prerender::CameraPose pose{33.0, -12.0};
  const Tensor z = filled(4, 8, 8, 0.25);
  EXPECT_EQ(a.residual(z, filled(1, 8, 8, 1), "p", 0.4, 3, pose), b.residual(z, filled(1, 8, 8, 1), "p", 0.4, 3, pose));
  EXPECT_EQ(a.generate("p", 1, 64), b.generate("p", 2, 64));
}

TEST(Oracle, GenerateDepthAndCodec) {
  SyntheticOracle oracle;
  const Tensor img = oracle.generate("a ball", 0, 128);
  ASSERT_EQ(img.channels(), 3);
  ASSERT_EQ(img.height(), 128);
  EXPECT_EQ(img(0, 0, 0), 1.0);  // white background
  const Tensor depth = oracle.depth(img);
  ASSERT_EQ(depth.channels(), 1);
  EXPECT_NEAR(depth(0, 64, 64), 3.0 - 0.75, 0.02);
  EXPECT_EQ(depth(0, 0, 0), 0.0);
  EXPECT_TRUE(oracle.metric_depth());
  EXPECT_EQ(oracle.encode(filled(3, 32, 32, 1.0)), prerender::white_latent(4));
  const Tensor dec = oracle.decode(oracle.encode(img));
  EXPECT_EQ(dec.height(), 128);
}

TEST(Oracle, RequiresPoseForResidual) {
  SyntheticOracle oracle;
  EXPECT_THROW(oracle.residual(filled(4, 8, 8, 0), filled(1, 8, 8, 1), "p", 0.5, 0), Error);
  EXPECT_THROW(oracle.residual(filled(4, 8, 8, 0), filled(1, 4, 4, 1), "p", 0.5, 0, prerender::CameraPose{}), Error);
  EXPECT_THROW(oracle.residual(filled(4, 8, 8, 0), filled(1, 8, 8, 1), "p", 1.0, 0, prerender::CameraPose{}), Error);
}

TEST(Prompt, Composition) {
  EXPECT_EQ(compose_prompt("a hamburger", Direction::kNone, true),
            "A whole photo of a hamburger in the white background taken with 50mm lens");
  EXPECT_EQ(compose_prompt("a hamburger", Direction::kBack, false), "a hamburger, back view");
  EXPECT_EQ(compose_prompt("a hamburger", Direction::kNone, false), "a hamburger");
  EXPECT_THROW(compose_prompt("", Direction::kFront, false), Error);
}

TEST(Prompt, DirectionBuckets) {
  EXPECT_EQ(direction_bucket(90, 0, 90), Direction::kFront);
  EXPECT_EQ(direction_bucket(134, 0, 90), Direction::kFront);
  EXPECT_EQ(direction_bucket(135, 0, 90), Direction::kSide);
  EXPECT_EQ(direction_bucket(0, 20, 90), Direction::kSide);
  EXPECT_EQ(direction_bucket(270, 0, 90), Direction::kBack);
  EXPECT_EQ(direction_bucket(300, -10, 90), Direction::kBack);
  EXPECT_EQ(direction_bucket(90, 61, 90), Direction::kOverhead);
}

TEST(Wire, TensorRoundTrip) {
  Tensor t(2, 3, 4);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = 0.5 * i - 1.0;
  EXPECT_EQ(tensor_from_json(tensor_to_json(t), "t"), t);
  json bad = tensor_to_json(t);
  bad["dims"] = {2, 3, 5};
  EXPECT_THROW(tensor_from_json(bad, "t"), Error);
  bad["dims"] = {2, 3};
  EXPECT_THROW(tensor_from_json(bad, "t"), Error);
  bad = tensor_to_json(t);
  bad["data"] = "@@@@";
  EXPECT_THROW(tensor_from_json(bad, "t"), Error);
}

/// In-process stand-in for the sidecar, backed by the synthetic oracle.
class FakeSidecar {
 public:
  enum class Mode { kGood, kWrongShape, kServerError, kSlow, kBadJson };

  explicit FakeSidecar(Mode mode) : mode_(mode) {
    auto reply = [this](const httplib::Request& req, httplib::Response& res,
                        const std::function<json(const json&)>& handler) {
      ++hits_;
      if (mode_ == Mode::kSlow) std::this_thread::sleep_for(std::chrono::milliseconds(600));
      if (mode_ == Mode::kServerError) {
        res.status = 500;
        res.set_content(json{{"error", "model exploded"}}.dump(), "application/json");
        return;
      }
      if (mode_ == Mode::kBadJson) {
        res.set_content("{not json", "application/json");
        return;
      }
      const json in = req.body.empty() ? json::object() : json::parse(req.body);
      res.set_content(handler(in).dump(), "application/json");
    };
    server_.Get("/v1/health", [=](const httplib::Request& q, httplib::Response& s) {
      reply(q, s, [](const json&) { return json{{"models", {"fake-diffusion", "fake-depth", "fake-vae"}}}; });
    });
    server_.Post("/v1/encode", [=, this](const httplib::Request& q, httplib::Response& s) {
      reply(q, s, [this](const json& in) {
        Tensor z = oracle_.encode(tensor_from_json(in.at("image"), "image"));
        if (mode_ == Mode::kWrongShape) z = Tensor(4, z.height() + 1, z.width());
        return json{{"z", tensor_to_json(z)}, {"model", "fake-vae"}};
      });
    });
    server_.Post("/v1/decode", [=, this](const httplib::Request& q, httplib::Response& s) {
      reply(q, s, [this](const json& in) {
        return json{{"image", tensor_to_json(oracle_.decode(tensor_from_json(in.at("z"), "z")))}};
      });
    });
    server_.Post("/v1/depth", [=, this](const httplib::Request& q, httplib::Response& s) {
      reply(q, s, [this](const json& in) {
        return json{{"depth", tensor_to_json(oracle_.depth(tensor_from_json(in.at("image"), "image")))}};
      });
    });
    server_.Post("/v1/generate", [=, this](const httplib::Request& q, httplib::Response& s) {
      reply(q, s, [this](const json& in) {
        last_prompt_ = in.at("prompt").get<std::string>();
        return json{{"image", tensor_to_json(oracle_.generate(last_prompt_, 0, in.at("size").get<int>()))}};
      });
    });
    server_.Post("/v1/residual", [=, this](const httplib::Request& q, httplib::Response& s) {
      reply(q, s, [this](const json& in) {
        const Tensor z = tensor_from_json(in.at("z"), "z");
        const Tensor m = tensor_from_json(in.at("mask"), "mask");
        return json{{"residual", tensor_to_json(oracle_.residual(z, m, in.at("prompt"), in.at("tau"),
                                                                 in.at("seed"), prerender::CameraPose{}))}};
      });
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeSidecar() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int hits() const { return hits_; }
  std::string last_prompt() const { return last_prompt_; }

 private:
  Mode mode_;
  SyntheticOracle oracle_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::string last_prompt_;
};

RemoteClient client_for(const FakeSidecar& s, double timeout = 5.0) {
  return RemoteClient(RemoteOptions{s.endpoint(), timeout, 1.0, 1});
}

TEST(Remote, HealthAndEndpoints) {
  FakeSidecar sidecar(FakeSidecar::Mode::kGood);
  auto client = client_for(sidecar);
  EXPECT_EQ(client.health(), (std::vector<std::string>{"fake-diffusion", "fake-depth", "fake-vae"}));

  SyntheticOracle local;
  const Tensor img = local.generate("x", 0, 64);
  const Tensor z = client.encode(img);
  EXPECT_LT(mean_abs_diff(z, local.encode(img)), 1e-6);
  EXPECT_EQ(client.decode(z).height(), 64);
  EXPECT_EQ(client.depth(img).channels(), 1);
  const Tensor r = client.residual(Tensor(4, 8, 8, 0.2), Tensor(1, 8, 8, 1.0), "p", 0.5, 3);
  EXPECT_EQ(r.height(), 8);
  const Tensor gen = client.generate(compose_prompt("a ball", Direction::kNone, true), 1, 32);
  EXPECT_EQ(gen.height(), 32);
  EXPECT_EQ(sidecar.last_prompt(), "A whole photo of a ball in the white background taken with 50mm lens");
  EXPECT_EQ(client.mode(), "remote");
}

TEST(Remote, RejectsWrongShape) {
  FakeSidecar sidecar(FakeSidecar::Mode::kWrongShape);
  auto client = client_for(sidecar);
  try {
    client.encode(Tensor(3, 64, 64, 1.0));
    FAIL() << "expected a protocol error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
  }
}

TEST(Remote, ServerErrorCarriesMessage) {
  FakeSidecar sidecar(FakeSidecar::Mode::kServerError);
  auto client = client_for(sidecar);
  try {
    client.health();
    FAIL() << "expected a remote error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRemote);
    EXPECT_NE(std::string(e.what()).find("model exploded"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("500"), std::string::npos);
  }
  EXPECT_EQ(sidecar.hits(), 1);  // no retry on an HTTP error
}

TEST(Remote, BadJsonIsProtocolError) {
  FakeSidecar sidecar(FakeSidecar::Mode::kBadJson);
  auto client = client_for(sidecar);
  try {
    client.health();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
  }
}

TEST(Remote, TimeoutRetriesOnceThenFails) {
  FakeSidecar sidecar(FakeSidecar::Mode::kSlow);
  auto client = client_for(sidecar, 0.2);
  try {
    client.health();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTimeout);
  }
  EXPECT_EQ(sidecar.hits(), 2);
}

TEST(Remote, UnreachableIsConnectivityError) {
  // Reserve an ephemeral port, then close it so nothing listens there.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
  socklen_t len = sizeof(addr);
  ASSERT_EQ(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len), 0);
  const int port = ntohs(addr.sin_port);
  ::close(fd);
  RemoteClient client(RemoteOptions{"http://127.0.0.1:" + std::to_string(port), 1.0, 1.0, 1});
  try {
    client.health();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConnectivity);
  }
}

TEST(Remote, RejectsBadOptions) {
  EXPECT_THROW(RemoteClient(RemoteOptions{"", 1.0, 1.0, 1}), Error);
  EXPECT_THROW(RemoteClient(RemoteOptions{"http://127.0.0.1:1", -1.0, 1.0, 1}), Error);
}

}  // namespace
