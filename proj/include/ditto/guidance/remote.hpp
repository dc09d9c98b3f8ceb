// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ditto/core/io.hpp"
#include "ditto/guidance/interface.hpp"
#include "ditto/guidance/prompt.hpp"

namespace ditto::guidance {

/// Wire form of a tensor: {"dims": [C, H, W], "data": base64 little-endian float32}.
inline nlohmann::json tensor_to_json(const Tensor& t) {
  return {{"dims", {t.channels(), t.height(), t.width()}}, {"data", io::base64_encode(io::encode_f32(t.data()))}};
}

inline Tensor tensor_from_json(const nlohmann::json& j, const std::string& field) {
  require(j.is_object() && j.contains("dims") && j.contains("data"), ErrorKind::kProtocol,
          "field '" + field + "' is not a tensor object");
  const auto& d = j.at("dims");
  require(d.is_array() && d.size() == 3, ErrorKind::kProtocol, "field '" + field + "' needs 3 dims");
  const int c = d.at(0).get<int>(), h = d.at(1).get<int>(), w = d.at(2).get<int>();
  require(c > 0 && h > 0 && w > 0, ErrorKind::kProtocol, "field '" + field + "' has non-positive dims");
  std::vector<double> values;
  try {
    values = io::decode_f32(io::base64_decode(j.at("data").get<std::string>()));
  } catch (const Error& e) {
    fail(ErrorKind::kProtocol, "field '" + field + "': " + e.what());
  }
  require(values.size() == static_cast<std::size_t>(c) * h * w, ErrorKind::kProtocol,
          "field '" + field + "' payload length does not match its dims");
  Tensor t(c, h, w);
  std::copy(values.begin(), values.end(), t.data().begin());
  return t;
}

struct RemoteOptions {
  std::string endpoint;          // e.g. http://127.0.0.1:8000
  double timeout_seconds = 120;  // read/write timeout per request
  double connect_timeout_seconds = 10;
  int retries = 1;               // extra attempts after a timeout or dropped connection
};

/// Client for the guidance sidecar's HTTP/JSON protocol. Calls are serialized
/// over a single connection; every response is shape-checked before it is returned.
class RemoteClient final : public Guidance {
 public:
  explicit RemoteClient(RemoteOptions opt) : opt_(std::move(opt)) {
    require(!opt_.endpoint.empty(), ErrorKind::kInvalidArgument, "remote guidance needs an endpoint");
    require(opt_.timeout_seconds > 0 && opt_.retries >= 0, ErrorKind::kInvalidArgument, "bad timeout or retry count");
    client_ = std::make_unique<httplib::Client>(opt_.endpoint);
    require(client_->is_valid(), ErrorKind::kInvalidArgument, "cannot parse endpoint " + opt_.endpoint);
    set_timeout(*client_);
  }

  std::string mode() const override { return "remote"; }

  std::vector<std::string> health() override {
    const auto body = request("GET", "/v1/health", "");
    std::vector<std::string> models;
    try {
      for (const auto& m : body.at("models")) models.push_back(m.is_string() ? m.get<std::string>() : m.dump());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kProtocol, std::string("/v1/health: ") + e.what());
    }
    return models;
  }

  GuidanceResponse call(const GuidanceRequest& req) override {
    req.validate();
    const auto start = std::chrono::steady_clock::now();
    nlohmann::json body;
    std::string path, field;
    switch (req.kind) {
      case RequestKind::kResidual:
        path = "/v1/residual";
        field = "residual";
        body = {{"z", tensor_to_json(req.payload)},
                {"mask", tensor_to_json(req.mask)},
                {"prompt", req.prompt},
                {"tau", req.tau},
                {"seed", req.seed}};
        break;
      case RequestKind::kGenerate:
        path = "/v1/generate";
        field = "image";
        body = {{"prompt", req.prompt}, {"seed", req.seed}, {"size", req.size}, {"prompt_composed", true}};
        break;
      case RequestKind::kDepth:
        path = "/v1/depth";
        field = "depth";
        body = {{"image", tensor_to_json(req.payload)}};
        break;
      case RequestKind::kEncode:
        path = "/v1/encode";
        field = "z";
        body = {{"image", tensor_to_json(req.payload)}};
        break;
      case RequestKind::kDecode:
        path = "/v1/decode";
        field = "image";
        body = {{"z", tensor_to_json(req.payload)}};
        break;
    }
    const auto reply = request("POST", path, body.dump());
    GuidanceResponse res{req.kind, {}, reply.value("model", std::string("remote")), 0.0};
    require(reply.contains(field), ErrorKind::kProtocol, path + " response lacks '" + field + "'");
    res.payload = tensor_from_json(reply.at(field), field);
    validate_response(req, res);
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
  }

 private:
  void set_timeout(httplib::Client& c) const {
    auto split = [](double s) {
      const auto whole = static_cast<time_t>(s);
      return std::make_pair(whole, static_cast<time_t>((s - whole) * 1e6));
    };
    const auto [rs, ru] = split(opt_.timeout_seconds);
    const auto [cs, cu] = split(opt_.connect_timeout_seconds);
    c.set_read_timeout(rs, ru);
    c.set_write_timeout(rs, ru);
    c.set_connection_timeout(cs, cu);
  }

  nlohmann::json request(const std::string& method, const std::string& path, const std::string& body) {
    std::lock_guard lock(mu_);
    std::string last_error;
    ErrorKind last_kind = ErrorKind::kConnectivity;
    for (int attempt = 0; attempt <= opt_.retries; ++attempt) {
      auto result = method == "GET" ? client_->Get(path) : client_->Post(path, body, "application/json");
      if (!result) {
        const auto err = result.error();
        // A connection that never opens is a connectivity failure; a stalled exchange is a timeout.
        last_kind = err == httplib::Error::Read || err == httplib::Error::Write ? ErrorKind::kTimeout
                                                                                : ErrorKind::kConnectivity;
        last_error = httplib::to_string(err);
        continue;
      }
      if (result->status < 200 || result->status >= 300) {
        std::string message = result->body;
        try {
          const auto j = nlohmann::json::parse(result->body);
          if (j.contains("error")) message = j.at("error").is_string() ? j.at("error").get<std::string>() : j.dump();
          else if (j.contains("detail")) message = j.at("detail").dump();
        } catch (const nlohmann::json::exception&) {
        }
        fail(ErrorKind::kRemote, path + " returned HTTP " + std::to_string(result->status) + ": " + message);
      }
      try {
        return nlohmann::json::parse(result->body);
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::kProtocol, path + " returned invalid JSON: " + e.what());
      }
    }
    fail(last_kind, path + " failed after " + std::to_string(opt_.retries + 1) + " attempt(s): " + last_error);
  }

  RemoteOptions opt_;
  std::unique_ptr<httplib::Client> client_;
  std::mutex mu_;
};

}  // namespace ditto::guidance
