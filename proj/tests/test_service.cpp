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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "oracles.hpp"
#include "qpd/service.hpp"
// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen.
#include "httplib.h"

namespace {

using namespace qpd;

const GameService& service() {
  static const GameService svc = GameService::calibrated();
  return svc;
}

HttpResult post(const std::string& path, const json& body) {
  return service().handle("POST", path, {}, body.dump());
}

TEST(Codec, StrategyRoundTrip) {
  for (const Strategy& s : {Strategy(Move::c), Strategy(Move::m), Strategy::parametric(1.0, 0.5)}) {
    EXPECT_EQ(strategy_from_json(strategy_to_json(s)), s);
  }
  EXPECT_EQ(strategy_to_json(Move::q), json("q"));
  EXPECT_EQ(strategy_from_json(json{{"p", -1.0}}), Strategy::from_p(-1.0));
  EXPECT_EQ(strategy_from_json(json(0.5)), Strategy::from_p(0.5));
  EXPECT_EQ(parse_strategy("p=1"), Strategy::from_p(1));
  EXPECT_THROW(strategy_from_json(json("x")), ParseError);
  EXPECT_THROW(strategy_from_json(json{{"theta", "big"}}), ParseError);
  EXPECT_THROW(strategy_from_json(json{{"theta", 4.0}, {"phi", 0.0}}), RangeError);
  EXPECT_THROW(strategy_from_json(json{{"p", 2.0}}), RangeError);
}

TEST(Codec, ProfileForms) {
  const StrategyProfile dq{Move::d, Move::q};
  EXPECT_EQ(parse_profile("d,q"), dq);
  EXPECT_EQ(parse_profile("(d, q)"), dq);
  EXPECT_EQ(parse_profile("dq"), dq);
  EXPECT_EQ(profile_from_json(json::array({"d", "q"})), dq);
  EXPECT_EQ(profile_from_json(json{{"a", "d"}, {"b", "q"}}), dq);
  EXPECT_EQ(parse_profile("{\"theta\":1,\"phi\":0},c"),
            (StrategyProfile{Strategy::parametric(1, 0), Move::c}));
  EXPECT_THROW(parse_profile("dqc"), ParseError);
}

TEST(Codec, StateRoundTrip) {
  const State s = box_cluster();
  const State back = state_from_json(state_to_json(s));
  EXPECT_EQ((s.amplitudes() - back.amplitudes()).norm(), 0.0);
  EXPECT_THROW(state_from_json(json{{"num_qubits", 1}}), ParseError);
}

TEST(Codec, ConventionRoundTrip) {
  for (const auto& c : convention_candidates()) {
    EXPECT_EQ(convention_from_json(convention_to_json(c)), c);
  }
  EXPECT_THROW(convention_from_json(json{{"angle_sign", 1}}), ParseError);
}

TEST(Codec, NumbersKeepFifteenDigits) {
  EXPECT_EQ(format_number(1.0 / 3), "0.333333333333333");
  EXPECT_EQ(format_number(3.0), "3");
}

TEST(Play, CircuitDefection) {
  const HttpResult r = post("/api/play", {{"strategy_a", "d"}, {"strategy_b", "d"}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_NEAR(r.body["payoffs"]["a"].get<double>(), 3, 1e-9);
  EXPECT_TRUE(r.body["postselection_probability"].is_null());
}

TEST(Play, BoxMatchesCircuitAndReportsPostselection) {
  const HttpResult circuit = post("/api/play", {{"strategy_a", "d"}, {"strategy_b", "d"}});
  const HttpResult box =
      post("/api/play", {{"strategy_a", "d"}, {"strategy_b", "d"}, {"backend", "box"}});
  ASSERT_EQ(box.status, 200) << box.body.dump();
  EXPECT_NEAR(box.body["postselection_probability"].get<double>(), 0.25, 1e-9);
  for (const char* k : {"cc", "cd", "dc", "dd"}) {
    EXPECT_NEAR(box.body["distribution"][k].get<double>(),
                circuit.body["distribution"][k].get<double>(), 1e-9);
  }
  EXPECT_EQ(box.body["pattern"], "d_A d_B");
}

TEST(Play, ClassicalLimit) {
  const HttpResult r = post(
      "/api/play", {{"strategy_a", "c"}, {"strategy_b", "d"}, {"variant", "classical_limit"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body["payoffs"]["a"].get<double>(), 0, 1e-12);
  EXPECT_NEAR(r.body["payoffs"]["b"].get<double>(), 5, 1e-12);
}

TEST(Play, BoxQuadrantAndWaferFamilies) {
  const json quad = {{"strategy_a", {{"theta", 0.0}, {"phi", 0.3}}},
                     {"strategy_b", {{"theta", 0.0}, {"phi", 1.1}}},
                     {"backend", "box"}};
  const HttpResult q = post("/api/play", quad);
  ASSERT_EQ(q.status, 200) << q.body.dump();
  const auto want = payoffs(outcome_distribution(
      {Strategy::parametric(0, 0.3), Strategy::parametric(0, 1.1)}, GameVariant::entangled));
  EXPECT_NEAR(q.body["payoffs"]["a"].get<double>(), want.a, 1e-9);

  const json wafer = {{"strategy_a", {{"theta", 2.0}, {"phi", 0.0}}},
                      {"strategy_b", "d"},
                      {"backend", "wafer"}};
  const HttpResult w = post("/api/play", wafer);
  ASSERT_EQ(w.status, 200) << w.body.dump();
  EXPECT_NEAR(w.body["postselection_probability"].get<double>(), 1.0 / 16, 1e-9);
}

TEST(Play, ValidationErrors) {
  EXPECT_EQ(post("/api/play", {{"strategy_a", "q"}, {"strategy_b", "d"}, {"backend", "wafer"}})
                .status,
            400);
  EXPECT_EQ(post("/api/play", {{"strategy_a", {{"theta", 1.0}, {"phi", 0.2}}},
                               {"strategy_b", "d"},
                               {"backend", "box"}})
                .status,
            400);
  EXPECT_EQ(post("/api/play", {{"strategy_a", "d"},
                               {"strategy_b", "d"},
                               {"backend", "box"},
                               {"variant", "separable"}})
                .status,
            400);
  EXPECT_EQ(post("/api/play", {{"strategy_a", "z"}, {"strategy_b", "d"}}).status, 400);
  EXPECT_EQ(post("/api/play", {{"strategy_a", "d"}}).status, 400);
  EXPECT_EQ(post("/api/play", {{"strategy_a", "d"}, {"strategy_b", "d"}, {"backend", "x"}}).status,
            400);
  EXPECT_EQ(post("/api/play", {{"strategy_a", {{"theta", 9.0}}}, {"strategy_b", "d"}}).status, 422);
  EXPECT_EQ(post("/api/play", {{"strategy_a", {{"p", -3.0}}}, {"strategy_b", "d"}}).status, 422);
  EXPECT_EQ(post("/api/play", {{"strategy_a", "d"}, {"strategy_b", "d"}, {"shots", 0}}).status,
            422);
  const HttpResult bad = service().handle("POST", "/api/play", {}, "{not json");
  EXPECT_EQ(bad.status, 400);
  EXPECT_TRUE(bad.body.contains("error"));
}

TEST(Play, SeededShotsAreReproducible) {
  const json req = {{"strategy_a", {{"theta", 1.0}, {"phi", 0.4}}},
                    {"strategy_b", "q"},
                    {"shots", 50},
                    {"seed", 9}};
  const HttpResult a = post("/api/play", req);
  const HttpResult b = post("/api/play", req);
  ASSERT_EQ(a.status, 200);
  EXPECT_EQ(a.body["sampled_outcomes"], b.body["sampled_outcomes"]);
  EXPECT_EQ(a.body["sampled_outcomes"].size(), 50u);
}

TEST(Routing, UnknownPathAndWrongMethod) {
  EXPECT_EQ(service().handle("GET", "/api/nothing", {}, "").status, 404);
  EXPECT_EQ(service().handle("GET", "/api/play", {}, "").status, 405);
  EXPECT_EQ(service().handle("POST", "/api/health", {}, "{}").status, 405);
}

TEST(Surface, StepsAndVariant) {
  const HttpResult r = service().handle("GET", "/api/surface", {{"steps", "2"}}, "");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["rows"].size(), 4u);
  EXPECT_EQ(service().handle("GET", "/api/surface", {{"steps", "1"}}, "").status, 422);
  EXPECT_EQ(service().handle("GET", "/api/surface", {{"steps", "abc"}}, "").status, 400);
  EXPECT_EQ(service().handle("GET", "/api/surface", {{"variant", "nope"}}, "").status, 400);
}

TEST(Noise, ZeroSigmaGivesZeroGap) {
  const HttpResult r = post("/api/noise", {{"profile", {"d", "d"}}, {"sigma", 0.0}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_NEAR(r.body["gap_a"].get<double>(), 0, 1e-9);
  const HttpResult curve =
      post("/api/noise", {{"profile", "d,d"}, {"sigmas", {0.0, 0.3, 0.6}}, {"axes", "theta"}});
  ASSERT_EQ(curve.status, 200) << curve.body.dump();
  EXPECT_EQ(curve.body["points"].size(), 3u);
  EXPECT_EQ(post("/api/noise", {{"sigma", -1.0}}).status, 422);
  EXPECT_EQ(post("/api/noise", {{"sigma", 0.3}, {"samples", 2}}).status, 422);
  EXPECT_EQ(post("/api/noise", {{"sigma", 0.3}, {"method", "exact"}}).status, 400);
  EXPECT_EQ(post("/api/noise", {{"sigma", 0.3}, {"profile", "m,m"}}).status, 400);
}

TEST(Mixed, InsideSeparableRegion) {
  const HttpResult r = post("/api/mixed", {{"x", 0.35}, {"profile", {"d", "d"}}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_GT(r.body["payoff_a"].get<double>(), 1);
  EXPECT_LT(r.body["payoff_a"].get<double>(), 3);
  EXPECT_TRUE(r.body["ppt"].get<bool>());
  EXPECT_EQ(post("/api/mixed", {{"x", 0.7}}).status, 422);
  const HttpResult t = post("/api/mixed", {{"threshold", true}});
  EXPECT_NEAR(t.body["x_star"].get<double>(), oracle::mixed_threshold(), 1e-4);
}

TEST(Strategies, ListsNamedStrategiesAndRanges) {
  const HttpResult r = service().handle("GET", "/api/strategies", {}, "");
  ASSERT_EQ(r.status, 200);
  std::vector<std::string> names;
  for (const auto& s : r.body["named"]) names.push_back(s["name"]);
  EXPECT_EQ(names, (std::vector<std::string>{"c", "d", "q", "m"}));
  EXPECT_DOUBLE_EQ(r.body["parametric"]["theta"][1].get<double>(), kPi);
  EXPECT_DOUBLE_EQ(r.body["parametric"]["phi"][1].get<double>(), kPi / 2);
}

// Payoffs through the handler are bit-identical to the library call.
TEST(Fidelity, HandlerEqualsLibrary) {
  gen::Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const double t1 = rng.theta(), f1 = rng.phi(), t2 = rng.theta(), f2 = rng.phi();
    const HttpResult r = post("/api/play", {{"strategy_a", {{"theta", t1}, {"phi", f1}}},
                                            {"strategy_b", {{"theta", t2}, {"phi", f2}}}});
    const Payoffs want = payoffs(outcome_distribution(
        {Strategy::parametric(t1, f1), Strategy::parametric(t2, f2)}, GameVariant::entangled));
    // Through text and back, as a client would see it.
    const json parsed = json::parse(r.body.dump());
    EXPECT_EQ(parsed["payoffs"]["a"].get<double>(), want.a);
    EXPECT_EQ(parsed["payoffs"]["b"].get<double>(), want.b);
  }
}

TEST(Statelessness, InterleavingDoesNotChangeResponses) {
  const json play = {{"strategy_a", "q"}, {"strategy_b", "c"}, {"shots", 10}, {"seed", 1}};
  const std::string first = post("/api/play", play).body.dump();
  post("/api/noise", {{"sigma", 0.5}, {"method", "monte_carlo"}, {"samples", 100}});
  post("/api/mixed", {{"x", 0.2}});
  service().handle("GET", "/api/surface", {{"steps", "5"}}, "");
  EXPECT_EQ(post("/api/play", play).body.dump(), first);
}

TEST(Calibration, PinnedFileIsReverified) {
  const CalibrationReport cal = calibrate();
  const json file = calibration_to_json(cal);
  EXPECT_NO_THROW(GameService::from_calibration(file));
  EXPECT_NO_THROW(GameService::from_calibration(file["selected"]));
  ClusterBackend broken;
  broken.box = graph_state(GraphSpec{4, {{0, 1}, {1, 2}, {2, 3}}});
  EXPECT_THROW(GameService::from_calibration(file, broken), CalibrationFailure);
  EXPECT_THROW(GameService::calibrated(broken), CalibrationFailure);
}

TEST(Verification, ReportPassesAndNamesFailures) {
  const VerificationReport ok = run_verification();
  EXPECT_TRUE(ok.passed);
  int rows = 0;
  for (const auto& c : ok.checks) rows += c.name.rfind("pattern ", 0) == 0;
  EXPECT_EQ(rows, 10);

  ClusterBackend broken;
  broken.box = graph_state(GraphSpec{4, {{0, 1}, {1, 2}, {2, 3}}});
  const VerificationReport bad = run_verification(broken);
  EXPECT_FALSE(bad.passed);
  bool named_row = false;
  for (const auto& c : bad.checks) named_row |= !c.passed && c.name.rfind("pattern ", 0) == 0;
  EXPECT_TRUE(named_row);
}

class LiveServer : public ::testing::Test {
 protected:
  void SetUp() override {
    static_dir_ = std::filesystem::temp_directory_path() / "qpd_static_test";
    std::filesystem::create_directories(static_dir_);
    std::ofstream(static_dir_ / "index.html") << "<html>qpd</html>";
    ServeOptions opts;
    opts.port = 0;
    opts.static_dir = static_dir_.string();
    server_ = std::make_unique<HttpServer>(service(), opts);
    port_ = server_->bind();
    thread_ = std::thread([this] { server_->listen(); });
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
    std::filesystem::remove_all(static_dir_);
  }

  std::filesystem::path static_dir_;
  std::unique_ptr<HttpServer> server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(LiveServer, EndpointsOverHttp) {
  httplib::Client cli("127.0.0.1", port_);
  cli.set_connection_timeout(5);

  auto health = cli.Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["status"], "ok");

  const json req = {{"strategy_a", "d"}, {"strategy_b", "q"}, {"shots", 20}, {"seed", 4}};
  auto play = cli.Post("/api/play", req.dump(), "application/json");
  ASSERT_TRUE(play);
  EXPECT_EQ(play->status, 200);
  EXPECT_EQ(play->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(play->body, post("/api/play", req).body.dump());

  auto surface = cli.Get("/api/surface?steps=3&variant=separable");
  ASSERT_TRUE(surface);
  EXPECT_EQ(json::parse(surface->body)["rows"].size(), 9u);

  auto bad = cli.Post("/api/play", R"({"strategy_a":"d","strategy_b":"d","backend":"wafer","variant":"separable"})",
                      "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_TRUE(json::parse(bad->body).contains("error"));

  auto page = cli.Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(page->body, "<html>qpd</html>");
}

TEST(HttpServerSetup, MissingStaticDirectoryIsRejected) {
  ServeOptions opts;
  opts.port = 0;
  opts.static_dir = "/nonexistent/qpd/static";
  EXPECT_THROW(HttpServer(service(), opts), std::runtime_error);
}

}  // namespace
