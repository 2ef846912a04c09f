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

#include "qpd/service.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "httplib.h"
#include "qpd/noise.hpp"

namespace qpd {

std::string_view to_string(BackendKind b) {
  switch (b) {
    case BackendKind::circuit: return "circuit";
    case BackendKind::box: return "box";
    case BackendKind::wafer: return "wafer";
  }
  return "?";
}

BackendKind parse_backend(std::string_view name) {
  if (name == "circuit") return BackendKind::circuit;
  if (name == "box") return BackendKind::box;
  if (name == "wafer") return BackendKind::wafer;
  throw ParseError("unknown backend '" + std::string(name) + "'");
}

namespace {

constexpr double kAngleSlack = 1e-12;

GameVariant variant_or_throw(std::string_view name) {
  try {
    return parse_variant(name);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

MeasurementPattern box_pattern(const StrategyProfile& profile) {
  if (auto row = find_named_row(profile)) return named_pattern(row->name);
  const auto a = profile.a.resolve_angles();
  const auto b = profile.b.resolve_angles();
  if (a && b && std::abs(a->theta) <= kAngleSlack && std::abs(b->theta) <= kAngleSlack) {
    return quadrant_pattern(2 * a->phi, 2 * b->phi);
  }
  throw ParseError("box backend runs the named profiles and theta = 0 strategy pairs only");
}

MeasurementPattern wafer_pattern_for(const StrategyProfile& profile) {
  const auto a = profile.a.resolve_angles();
  const auto b = profile.b.resolve_angles();
  if (a && b && std::abs(a->phi) <= kAngleSlack && std::abs(b->phi) <= kAngleSlack) {
    return wafer_pattern(a->theta, b->theta);
  }
  throw ParseError("wafer backend runs (theta, 0) strategies only");
}

}  // namespace

PlayResponse play(const PlayRequest& req, const ConventionConfig& conv,
                  const ClusterBackend& backend) {
  if (req.shots && (*req.shots < 1 || *req.shots > kMaxShots)) {
    throw RangeError("shots must lie in [1, " + std::to_string(kMaxShots) + "]");
  }
  PlayResponse resp;
  if (req.backend == BackendKind::circuit) {
    resp.distribution = outcome_distribution(req.profile, req.variant);
  } else {
    if (req.variant != GameVariant::entangled) {
      throw ParseError(std::string(to_string(req.backend)) +
                       " backend runs the entangled game only");
    }
    const MeasurementPattern pattern = req.backend == BackendKind::box
                                           ? box_pattern(req.profile)
                                           : wafer_pattern_for(req.profile);
    const ClusterRunResult run = run_pattern(pattern, conv, backend);
    resp.distribution = run.distribution;
    resp.pattern = pattern.name;
    resp.postselection_probability = run.postselection_probability;
  }
  resp.payoffs = payoffs(resp.distribution);
  if (req.shots) resp.outcomes = sample_outcomes(resp.distribution, *req.shots, req.seed);
  return resp;
}

PlayRequest play_request_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("play request must be a JSON object");
  auto strategy = [&](const char* key, const char* alias) {
    if (j.contains(key)) return strategy_from_json(j.at(key));
    if (j.contains(alias)) return strategy_from_json(j.at(alias));
    throw ParseError(std::string("missing field '") + key + "'");
  };
  PlayRequest req;
  req.profile = {strategy("strategy_a", "a"), strategy("strategy_b", "b")};
  if (j.contains("variant")) {
    if (!j.at("variant").is_string()) throw ParseError("variant must be a string");
    req.variant = variant_or_throw(j.at("variant").get<std::string>());
  }
  if (j.contains("backend")) {
    if (!j.at("backend").is_string()) throw ParseError("backend must be a string");
    req.backend = parse_backend(j.at("backend").get<std::string>());
  }
  if (j.contains("shots") && !j.at("shots").is_null()) {
    const json& s = j.at("shots");
    if (!s.is_number_integer()) throw ParseError("shots must be an integer");
    const auto v = s.get<std::int64_t>();
    if (v < 1 || v > kMaxShots) {
      throw RangeError("shots must lie in [1, " + std::to_string(kMaxShots) + "]");
    }
    req.shots = static_cast<int>(v);
  }
  if (j.contains("seed") && !j.at("seed").is_null()) {
    const json& s = j.at("seed");
    if (!s.is_number_integer()) throw ParseError("seed must be an integer");
    if (s.is_number_unsigned()) {
      req.seed = s.get<std::uint64_t>();
    } else {
      const auto v = s.get<std::int64_t>();
      if (v < 0) throw RangeError("seed must be >= 0");
      req.seed = static_cast<std::uint64_t>(v);
    }
  }
  return req;
}

json play_response_to_json(const PlayRequest& req, const PlayResponse& resp) {
  json out = {{"strategy_a", strategy_to_json(req.profile.a)},
              {"strategy_b", strategy_to_json(req.profile.b)},
              {"variant", to_string(req.variant)},
              {"backend", to_string(req.backend)},
              {"distribution", distribution_to_json(resp.distribution)},
              {"payoffs", payoffs_to_json(resp.payoffs)}};
  if (resp.pattern) out["pattern"] = *resp.pattern;
  out["postselection_probability"] =
      resp.postselection_probability ? json(*resp.postselection_probability) : json(nullptr);
  if (req.shots) {
    json labels = json::array();
    for (int k : resp.outcomes) labels.push_back(outcome_label(k));
    out["shots"] = *req.shots;
    out["seed"] = req.seed;
    out["sampled_outcomes"] = labels;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification suite

namespace {

VerifyCheck make_check(std::string name, double value, double tolerance, std::string detail = {}) {
  return {std::move(name), value <= tolerance, value, tolerance, std::move(detail)};
}

std::vector<double> theta_grid(int n, double hi) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(hi * k / (n - 1));
  out.back() = hi;
  return out;
}

}  // namespace

VerificationReport run_verification(const ClusterBackend& backend) {
  VerificationReport report;
  auto& checks = report.checks;

  CalibrationReport cal;
  try {
    cal = calibrate(circuit_oracle, backend);
    std::ostringstream d;
    d << cal.matched << " of " << cal.candidates << " conventions match; selected "
      << cal.selected->describe();
    checks.push_back(make_check("calibration", cal.max_tv_deviation, kEquivalenceTolerance, d.str()));
  } catch (const CalibrationFailure& e) {
    cal = evaluate_convention(e.best(), circuit_oracle, backend);
    cal.matched = 0;
    cal.candidates = static_cast<int>(convention_candidates().size());
    VerifyCheck c = make_check("calibration", e.deviation(), kEquivalenceTolerance, e.what());
    c.passed = false;
    checks.push_back(c);
  }
  const ConventionConfig conv = *cal.selected;
  report.convention = conv;

  for (const auto& row : cal.patterns) {
    std::ostringstream d;
    d << "postselection probability " << format_number(row.postselection_probability);
    VerifyCheck c = make_check("pattern " + row.name, row.tv, kEquivalenceTolerance, d.str());
    c.passed = c.passed && std::abs(row.postselection_probability - 0.25) <= 1e-9;
    checks.push_back(c);
  }

  {
    const std::array<std::pair<StrategyProfile, Payoffs>, 4> expected{{
        {{Move::c, Move::c}, {3, 3}},
        {{Move::c, Move::d}, {0, 5}},
        {{Move::d, Move::c}, {5, 0}},
        {{Move::d, Move::d}, {1, 1}},
    }};
    double worst = 0;
    for (const auto& [profile, want] : expected) {
      const Payoffs got = payoffs(outcome_distribution(profile, GameVariant::classical_limit));
      worst = std::max({worst, std::abs(got.a - want.a), std::abs(got.b - want.b)});
    }
    checks.push_back(make_check("classical payoff table", worst, 1e-12));
  }
  {
    const Payoffs got = payoffs(outcome_distribution({Move::d, Move::d}, GameVariant::separable));
    checks.push_back(make_check("separable (d,d) payoffs (1,1)",
                                std::max(std::abs(got.a - 1), std::abs(got.b - 1)), 1e-9));
  }
  {
    double worst = 0;
    double worst_ps = 0;
    for (double ta : theta_grid(11, kPi)) {
      for (double tb : theta_grid(11, kPi)) {
        const ClusterRunResult run = run_pattern(wafer_pattern(ta, tb), conv, backend);
        const StrategyProfile profile{Strategy::parametric(ta, 0), Strategy::parametric(tb, 0)};
        worst = std::max(worst, total_variation(run.distribution, circuit_oracle(profile)));
        worst_ps = std::max(worst_ps, std::abs(run.postselection_probability - 1.0 / 16));
      }
    }
    VerifyCheck c = make_check("wafer 11x11 theta grid", worst, kEquivalenceTolerance,
                               "postselection probability 1/16");
    c.passed = c.passed && worst_ps <= 1e-9;
    checks.push_back(c);
  }
  {
    double worst = 0;
    for (double mu : theta_grid(11, kPi)) {
      for (double nu : theta_grid(11, kPi)) {
        const ClusterRunResult run = run_pattern(quadrant_pattern(mu, nu), conv, backend);
        const StrategyProfile profile{Strategy::parametric(0, quadrant_phi(mu)),
                                      Strategy::parametric(0, quadrant_phi(nu))};
        worst = std::max(worst, total_variation(run.distribution, circuit_oracle(profile)));
      }
    }
    checks.push_back(make_check("quadrant map phi = mu/2 on 11x11 grid", worst,
                                kEquivalenceTolerance));
  }

  report.calibration = cal;
  report.passed = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  return report;
}

json verification_to_json(const VerificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  json out = {{"passed", r.passed}, {"checks", checks}};
  out["convention"] = r.convention ? convention_to_json(*r.convention) : json(nullptr);
  if (r.calibration) out["calibration"] = calibration_to_json(*r.calibration);
  return out;
}

// ---------------------------------------------------------------------------
// GameService

GameService GameService::calibrated(const ClusterBackend& backend) {
  const CalibrationReport cal = calibrate(circuit_oracle, backend);
  return GameService(*cal.selected, backend, cal.max_tv_deviation);
}

GameService GameService::from_calibration(const json& file, const ClusterBackend& backend) {
  const json* conv_json = &file;
  if (file.is_object() && file.contains("selected")) {
    if (file.at("selected").is_null()) throw ParseError("calibration file has no selected convention");
    conv_json = &file.at("selected");
  }
  const ConventionConfig conv = convention_from_json(*conv_json);
  const CalibrationReport r = evaluate_convention(conv, circuit_oracle, backend);
  if (!r.matched) {
    throw CalibrationFailure("pinned convention " + conv.describe() +
                                 " no longer matches the circuit oracle",
                             conv, r.max_tv_deviation, "");
  }
  return GameService(conv, backend, r.max_tv_deviation);
}

HttpResult GameService::play(const json& body) const {
  const PlayRequest req = play_request_from_json(body);
  return {200, play_response_to_json(req, qpd::play(req, conv_, backend_))};
}

namespace {

int parse_int(const std::string& text, const char* what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    throw ParseError(std::string(what) + " must be an integer");
  }
  if (used != text.size()) throw ParseError(std::string(what) + " must be an integer");
  if (v < -1'000'000'000L || v > 1'000'000'000L) throw RangeError(std::string(what) + " is too large");
  return static_cast<int>(v);
}

double number_or_throw(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + " must be a number");
  return j.get<double>();
}

constexpr int kMaxSurfaceSteps = 201;
constexpr double kMaxSigma = 5.0;
constexpr int kMaxMonteCarloSamples = 200'000;
constexpr int kMaxQuadratureNodes = 64;
constexpr std::size_t kMaxSigmaPoints = 64;

json noisy_point_json(const NoisyResult& r, double ideal_a) {
  return {{"sigma", r.sigma},
          {"payoff_a", r.mean_payoff_a},
          {"payoff_b", r.mean_payoff_b},
          {"stderr_a", r.std_error_a},
          {"stderr_b", r.std_error_b},
          {"gap_a", ideal_a - r.mean_payoff_a},
          {"negativity", r.negativity_of_resource}};
}

}  // namespace

HttpResult GameService::surface(const std::map<std::string, std::string>& query) const {
  int steps = 41;
  GameVariant variant = GameVariant::entangled;
  if (auto it = query.find("steps"); it != query.end()) steps = parse_int(it->second, "steps");
  if (auto it = query.find("variant"); it != query.end()) variant = variant_or_throw(it->second);
  if (steps < 2 || steps > kMaxSurfaceSteps) {
    throw RangeError("steps must lie in [2, " + std::to_string(kMaxSurfaceSteps) + "]");
  }
  return {200, surface_to_json(payoff_surface(steps, variant), variant)};
}

HttpResult GameService::noise(const json& body) const {
  if (!body.is_object()) throw ParseError("noise request must be a JSON object");
  const StrategyProfile profile =
      body.contains("profile") ? profile_from_json(body.at("profile"))
                               : StrategyProfile{Move::d, Move::d};
  NoiseConfig cfg;
  if (body.contains("method")) {
    const std::string m = body.at("method").is_string() ? body.at("method").get<std::string>() : "";
    if (m == "quadrature") {
      cfg.method = NoiseMethod::quadrature;
    } else if (m == "monte_carlo") {
      cfg.method = NoiseMethod::monte_carlo;
    } else {
      throw ParseError("method must be \"quadrature\" or \"monte_carlo\"");
    }
  }
  cfg.num_samples = cfg.method == NoiseMethod::quadrature ? 32 : 2000;
  if (body.contains("samples")) {
    if (!body.at("samples").is_number_integer()) throw ParseError("samples must be an integer");
    const auto n = body.at("samples").get<std::int64_t>();
    const int lo = cfg.method == NoiseMethod::quadrature ? 8 : 1;
    const int hi = cfg.method == NoiseMethod::quadrature ? kMaxQuadratureNodes : kMaxMonteCarloSamples;
    if (n < lo || n > hi) {
      throw RangeError("samples must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    cfg.num_samples = static_cast<int>(n);
  }
  if (body.contains("seed")) {
    if (!body.at("seed").is_number_unsigned()) throw ParseError("seed must be a non-negative integer");
    cfg.seed = body.at("seed").get<std::uint64_t>();
  }
  if (body.contains("axes")) {
    const std::string axes = body.at("axes").is_string() ? body.at("axes").get<std::string>() : "";
    if (axes == "theta") {
      cfg.sigma_phi = 0.0;
    } else if (axes == "phi") {
      cfg.sigma_theta = 0.0;
    } else if (axes != "joint") {
      throw ParseError("axes must be \"joint\", \"theta\" or \"phi\"");
    }
  }
  auto check_sigma = [](double s) {
    if (!std::isfinite(s) || s < 0 || s > kMaxSigma) {
      throw RangeError("sigma must lie in [0, " + format_number(kMaxSigma) + "]");
    }
    return s;
  };
  std::vector<double> sigmas;
  const bool single = body.contains("sigma");
  if (single) {
    sigmas.push_back(check_sigma(number_or_throw(body.at("sigma"), "sigma")));
  } else if (body.contains("sigmas")) {
    const json& list = body.at("sigmas");
    if (!list.is_array() || list.empty()) throw ParseError("sigmas must be a non-empty array");
    if (list.size() > kMaxSigmaPoints) throw RangeError("too many sigma values");
    for (const auto& s : list) sigmas.push_back(check_sigma(number_or_throw(s, "sigma")));
  } else {
    throw ParseError("missing field 'sigma' or 'sigmas'");
  }

  const double ideal_a = payoffs(outcome_distribution(profile, GameVariant::entangled)).a;
  json points = json::array();
  for (double s : sigmas) {
    NoiseConfig c = cfg;
    c.sigma = s;
    points.push_back(noisy_point_json(noisy_payoffs(profile, c), ideal_a));
  }
  json out = {{"profile", {{"a", strategy_to_json(profile.a)}, {"b", strategy_to_json(profile.b)}}},
              {"ideal_payoff_a", ideal_a},
              {"method", cfg.method == NoiseMethod::quadrature ? "quadrature" : "monte_carlo"},
              {"samples", cfg.num_samples},
              {"seed", cfg.seed}};
  if (single) {
    for (auto& [k, v] : points[0].items()) out[k] = v;
  } else {
    out["points"] = points;
  }
  return {200, out};
}

HttpResult GameService::mixed(const json& body) const {
  if (!body.is_object()) throw ParseError("mixed request must be a JSON object");
  if (body.value("threshold", false)) {
    return {200, {{"x_star", separability_threshold()}}};
  }
  if (!body.contains("x")) throw ParseError("missing field 'x'");
  const double x = number_or_throw(body.at("x"), "x");
  if (!(x >= 0 && x <= 0.5)) throw RangeError("x must lie in [0, 0.5]");
  const StrategyProfile profile =
      body.contains("profile") ? profile_from_json(body.at("profile"))
                               : StrategyProfile{Move::d, Move::d};
  GameVariant variant = GameVariant::entangled;
  if (body.contains("variant")) {
    if (!body.at("variant").is_string()) throw ParseError("variant must be a string");
    variant = variant_or_throw(body.at("variant").get<std::string>());
  }
  const MixedInputResult r = mixed_input_game(x, profile, variant);
  return {200,
          {{"x", x},
           {"profile", {{"a", strategy_to_json(profile.a)}, {"b", strategy_to_json(profile.b)}}},
           {"variant", to_string(variant)},
           {"distribution", distribution_to_json(r.distribution)},
           {"payoffs", payoffs_to_json(r.payoffs)},
           {"payoff_a", r.payoffs.a},
           {"payoff_b", r.payoffs.b},
           {"ppt", is_ppt(r.resource)},
           {"negativity", negativity(r.resource)}}};
}

HttpResult GameService::strategies() const {
  json named = json::array();
  for (Move m : {Move::c, Move::d, Move::q, Move::m}) {
    json entry = {{"name", std::string(1, static_cast<char>(m))}};
    if (auto a = Strategy(m).resolve_angles()) {
      entry["theta"] = a->theta;
      entry["phi"] = a->phi;
    } else {
      entry["matrix"] = "(1 + i sigma_y)/sqrt(2)";
    }
    named.push_back(entry);
  }
  return {200,
          {{"named", named},
           {"parametric", {{"theta", {0.0, kPi}}, {"phi", {0.0, kPi / 2}}}},
           {"p", {{"range", {-1.0, 1.0}},
                  {"map", "p >= 0: U(p pi, 0); p < 0: U(0, -p pi / 2)"}}},
           {"variants", {"entangled", "separable", "classical_limit"}},
           {"backends", {"circuit", "box", "wafer"}}}};
}

HttpResult GameService::health() const {
  return {200,
          {{"status", "ok"},
           {"convention", convention_to_json(conv_)},
           {"calibration_max_tv_deviation", deviation_}}};
}

HttpResult GameService::handle(const std::string& method, const std::string& path,
                               const std::map<std::string, std::string>& query,
                               const std::string& body) const {
  auto error = [](int status, const std::string& msg) {
    return HttpResult{status, {{"error", msg}}};
  };
  struct Route {
    const char* path;
    const char* method;
  };
  static constexpr Route routes[] = {
      {"/api/health", "GET"}, {"/api/strategies", "GET"}, {"/api/surface", "GET"},
      {"/api/play", "POST"},  {"/api/noise", "POST"},     {"/api/mixed", "POST"},
  };
  const Route* route = nullptr;
  for (const auto& r : routes) {
    if (path == r.path) route = &r;
  }
  if (!route) return error(404, "no such endpoint: " + path);
  if (method != route->method) return error(405, "use " + std::string(route->method) + " " + path);

  try {
    if (path == "/api/health") return health();
    if (path == "/api/strategies") return strategies();
    if (path == "/api/surface") return surface(query);
    const json request = json::parse(body);
    if (path == "/api/play") return play(request);
    if (path == "/api/noise") return noise(request);
    return mixed(request);
  } catch (const json::parse_error& e) {
    return error(400, std::string("invalid JSON body: ") + e.what());
  } catch (const json::exception& e) {
    return error(400, e.what());
  } catch (const ImpossiblePostselection& e) {
    return error(422, e.what());
  } catch (const std::out_of_range& e) {
    return error(422, e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

// ---------------------------------------------------------------------------
// HttpServer

struct HttpServer::Impl {
  Impl(const GameService& svc, ServeOptions o) : service(svc), opts(std::move(o)) {}
  const GameService& service;
  ServeOptions opts;
  httplib::Server server;
  int port = -1;
};

HttpServer::HttpServer(const GameService& service, ServeOptions opts)
    : impl_(std::make_unique<Impl>(service, std::move(opts))) {
  auto dispatch = [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const HttpResult r = impl->service.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto& s = impl_->server;
  s.Get(R"(/api/.*)", dispatch);
  s.Post(R"(/api/.*)", dispatch);
  s.Put(R"(/api/.*)", dispatch);
  s.Delete(R"(/api/.*)", dispatch);
  if (impl_->opts.static_dir && !s.set_mount_point("/", *impl_->opts.static_dir)) {
    throw std::runtime_error("static directory '" + *impl_->opts.static_dir + "' does not exist");
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& s = impl_->server;
  if (impl_->opts.port == 0) {
    impl_->port = s.bind_to_any_port(impl_->opts.host);
  } else {
    impl_->port = s.bind_to_port(impl_->opts.host, impl_->opts.port) ? impl_->opts.port : -1;
  }
  if (impl_->port < 0) {
    throw std::runtime_error("cannot bind " + impl_->opts.host + ":" +
                             std::to_string(impl_->opts.port));
  }
  return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace qpd
