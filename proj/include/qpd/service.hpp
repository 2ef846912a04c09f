// Copyright 2026 The qpd Authors
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

// Request handling shared by the CLI and the HTTP JSON service.

#ifndef QPD_SERVICE_HPP_
#define QPD_SERVICE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qpd/cluster.hpp"
#include "qpd/io.hpp"

namespace qpd {

enum class BackendKind { circuit, box, wafer };

std::string_view to_string(BackendKind b);
BackendKind parse_backend(std::string_view name);  // throws ParseError

struct PlayRequest {
  StrategyProfile profile{Move::c, Move::c};
  GameVariant variant = GameVariant::entangled;
  BackendKind backend = BackendKind::circuit;
  std::optional<int> shots;
  std::uint64_t seed = 0;
};

struct PlayResponse {
  OutcomeDistribution distribution;
  Payoffs payoffs;
  std::optional<std::string> pattern;  // cluster backends only
  std::optional<double> postselection_probability;
  std::vector<int> outcomes;  // sampled outcome indices when shots were requested
};

inline constexpr int kMaxShots = 1'000'000;

// Box runs named-profile patterns, or the quadrant pattern when both players
// use theta = 0. Wafer runs (theta, 0) strategies only. Cluster backends need
// the entangled variant. Throws ParseError for unsupported combinations and
// RangeError for out-of-range numbers.
PlayResponse play(const PlayRequest& req, const ConventionConfig& conv,
                  const ClusterBackend& backend = ClusterBackend::standard());

PlayRequest play_request_from_json(const json& j);
json play_response_to_json(const PlayRequest& req, const PlayResponse& resp);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0;      // deviation measured by the check
  double tolerance = 0;
  std::string detail;
};

struct VerificationReport {
  bool passed = false;
  std::vector<VerifyCheck> checks;
  // The matched convention, or the best candidate when calibration failed.
  std::optional<ConventionConfig> convention;
  std::optional<CalibrationReport> calibration;
};

VerificationReport run_verification(const ClusterBackend& backend = ClusterBackend::standard());
json verification_to_json(const VerificationReport& r);

struct HttpResult {
  int status = 200;
  json body;
};

class GameService {
 public:
  // Calibrates against the circuit oracle; throws CalibrationFailure.
  static GameService calibrated(const ClusterBackend& backend = ClusterBackend::standard());
  // Loads a pinned convention (calibration file JSON, or its "selected"
  // object) and re-checks it; throws CalibrationFailure if it no longer matches.
  static GameService from_calibration(const json& file,
                                      const ClusterBackend& backend = ClusterBackend::standard());

  const ConventionConfig& convention() const { return conv_; }

  HttpResult play(const json& body) const;
  HttpResult surface(const std::map<std::string, std::string>& query) const;
  HttpResult noise(const json& body) const;
  HttpResult mixed(const json& body) const;
  HttpResult strategies() const;
  HttpResult health() const;

  // Routes by method and path; maps exceptions to 400 / 404 / 405 / 422 / 500.
  HttpResult handle(const std::string& method, const std::string& path,
                    const std::map<std::string, std::string>& query,
                    const std::string& body) const;

 private:
  GameService(ConventionConfig conv, ClusterBackend backend, double deviation)
      : conv_(conv), backend_(std::move(backend)), deviation_(deviation) {}

  ConventionConfig conv_;
  ClusterBackend backend_;
  double deviation_ = 0;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> static_dir;
};

// cpp-httplib server bound to a GameService. port 0 binds any free port.
class HttpServer {
 public:
  HttpServer(const GameService& service, ServeOptions opts);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; throws std::runtime_error on failure.
  int bind();
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qpd

#endif  // QPD_SERVICE_HPP_
