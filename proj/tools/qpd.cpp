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

// qpd: command-line front end for the quantum Prisoners' Dilemma simulator.

#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpd/cluster.hpp"
#include "qpd/game.hpp"
#include "qpd/io.hpp"
#include "qpd/noise.hpp"
#include "qpd/service.hpp"

namespace {

using namespace qpd;

// "LO:HI:STEP" -> LO, LO+STEP, ..., up to HI (inclusive within 1e-9 STEP).
std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    const std::string piece = text.substr(start, colon - start);
    std::size_t used = 0;
    try {
      parts.push_back(std::stod(piece, &used));
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != piece.size()) throw ParseError("bad range '" + text + "'");
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0]) {
    throw ParseError("range must be LO:HI:STEP with STEP > 0 and HI >= LO");
  }
  std::vector<double> out;
  for (long k = 0;; ++k) {
    const double v = parts[0] + static_cast<double>(k) * parts[2];
    if (v > parts[1] + 1e-9 * parts[2]) break;
    out.push_back(v);
  }
  return out;
}

// Writes to `path`, or stdout for "-".
template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  write(f);
  if (!f) throw std::runtime_error("error writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read '" + path + "'");
  return json::parse(f);
}

GameService make_service(const std::string& calibration_path) {
  if (calibration_path.empty()) return GameService::calibrated();
  return GameService::from_calibration(read_json_file(calibration_path));
}

// Box resource with one ring edge removed; used to exercise the failure path.
ClusterBackend corrupted_box_backend() {
  ClusterBackend b;
  b.box = graph_state(GraphSpec{4, {{0, 1}, {1, 2}, {2, 3}}});
  return b;
}

int cmd_verify(const std::string& out_path, bool corrupt, bool as_json) {
  const VerificationReport r =
      run_verification(corrupt ? corrupted_box_backend() : ClusterBackend::standard());
  if (as_json) {
    std::cout << verification_to_json(r).dump(2) << '\n';
  } else {
    for (const auto& c : r.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  deviation "
                << format_number(c.value) << " (tol " << format_number(c.tolerance) << ")";
      if (!c.detail.empty()) std::cout << "  " << c.detail;
      std::cout << '\n';
    }
    std::cout << (r.passed ? "verification passed" : "verification FAILED") << '\n';
  }
  if (!out_path.empty() && r.calibration) {
    json file = calibration_to_json(*r.calibration);
    file["verified"] = r.passed;
    with_output(out_path, [&](std::ostream& o) { o << file.dump(2) << '\n'; });
  }
  return r.passed ? 0 : 1;
}

int cmd_surface(int steps, const std::string& variant, const std::string& out) {
  const PayoffTable t = payoff_surface(steps, parse_variant(variant));
  with_output(out, [&](std::ostream& o) { write_surface_csv(o, t); });
  return 0;
}

int cmd_play(const std::string& a, const std::string& b, const std::string& variant,
             const std::string& backend, std::optional<int> shots, std::uint64_t seed,
             const std::string& calibration_path) {
  PlayRequest req;
  req.profile = {parse_strategy(a), parse_strategy(b)};
  req.variant = parse_variant(variant);
  req.backend = parse_backend(backend);
  req.shots = shots;
  req.seed = seed;
  PlayResponse resp;
  if (req.backend == BackendKind::circuit) {
    // The circuit path never touches the convention.
    resp = play(req, convention_candidates().front());
  } else {
    const GameService svc = make_service(calibration_path);
    resp = play(req, svc.convention());
  }
  std::cout << play_response_to_json(req, resp).dump(2) << '\n';
  return 0;
}

int cmd_nash(int steps, const std::string& variant, double p_lo) {
  const GameVariant v = parse_variant(variant);
  const PayoffTable t = payoff_surface(steps, v, p_lo, 1.0);
  const auto nash = find_nash(t);
  std::cout << "p_a,p_b,payoff_a,payoff_b\n";
  for (const auto& g : nash) {
    std::cout << format_number(t.a_params[g.i]) << ',' << format_number(t.b_params[g.j]) << ','
              << format_number(g.payoffs.a) << ',' << format_number(g.payoffs.b) << '\n';
  }
  return 0;
}

int cmd_noise(const std::string& profile, const std::string& sigmas, int samples,
              std::uint64_t seed, const std::string& method, const std::string& axes,
              int workers, const std::string& out) {
  NoiseConfig cfg;
  cfg.num_samples = samples;
  cfg.seed = seed;
  cfg.workers = workers;
  if (method == "quadrature") {
    cfg.method = NoiseMethod::quadrature;
  } else if (method == "monte_carlo") {
    cfg.method = NoiseMethod::monte_carlo;
  } else {
    throw ParseError("method must be quadrature or monte_carlo");
  }
  if (axes == "theta") {
    cfg.sigma_phi = 0.0;
  } else if (axes == "phi") {
    cfg.sigma_theta = 0.0;
  } else if (axes != "joint") {
    throw ParseError("axes must be joint, theta or phi");
  }
  const auto curve = payoff_gap_curve(parse_range(sigmas), parse_profile(profile), cfg);
  with_output(out, [&](std::ostream& o) { write_gap_csv(o, curve); });
  return 0;
}

int cmd_mixed(const std::string& xs, bool threshold, const std::string& profile,
              const std::string& variant, const std::string& out) {
  if (threshold) {
    std::cout << "x_star," << format_number(separability_threshold()) << '\n';
    return 0;
  }
  const StrategyProfile p = parse_profile(profile);
  const GameVariant v = parse_variant(variant);
  std::vector<MixedRow> rows;
  for (double x : parse_range(xs)) {
    const MixedInputResult r = mixed_input_game(x, p, v);
    rows.push_back({x, r.payoffs, is_ppt(r.resource)});
  }
  with_output(out, [&](std::ostream& o) { write_mixed_csv(o, rows); });
  return 0;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& static_dir,
              const std::string& calibration_path) {
  std::optional<GameService> svc;
  try {
    svc.emplace(make_service(calibration_path));
  } catch (const CalibrationFailure& e) {
    std::cerr << "refusing to start: " << e.what() << '\n';
    return 2;
  }
  ServeOptions opts;
  opts.host = host;
  opts.port = port;
  if (!static_dir.empty()) opts.static_dir = static_dir;
  HttpServer server(*svc, opts);
  const int bound = server.bind();
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ':' << bound << std::endl;
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Prisoners' Dilemma simulator"};
  app.require_subcommand(1);

  std::string calibration_out = "calibration.json";
  bool corrupt_box = false;
  bool verify_json = false;
  auto* verify = app.add_subcommand("verify", "run the backend equivalence suite");
  verify->add_option("--calibration-out", calibration_out,
                     "where to write the calibration JSON (empty to skip)");
  verify->add_flag("--corrupt-box", corrupt_box, "use a damaged box resource (fault injection)");
  verify->add_flag("--json", verify_json, "print the report as JSON");

  int steps = 41;
  std::string variant = "entangled";
  std::string out = "-";
  auto* surface = app.add_subcommand("surface", "payoff surface on the p-grid as CSV");
  surface->add_option("--steps", steps)->check(CLI::Range(2, 10001));
  surface->add_option("--variant", variant);
  surface->add_option("--out", out, "output path, - for stdout");

  std::string a = "d", b = "d", backend = "circuit", calibration;
  std::optional<int> shots;
  std::uint64_t seed = 0;
  auto* play = app.add_subcommand("play", "play one strategy profile");
  play->add_option("--a", a, "c|d|q|m, p=<value> or {\"theta\":..,\"phi\":..}");
  play->add_option("--b", b);
  play->add_option("--variant", variant);
  play->add_option("--backend", backend, "circuit|box|wafer");
  play->add_option("--shots", shots)->check(CLI::Range(1, kMaxShots));
  play->add_option("--seed", seed);
  play->add_option("--calibration", calibration, "pinned calibration JSON");

  double p_lo = -1.0;
  auto* nash = app.add_subcommand("nash", "pure Nash equilibria on the p-grid");
  nash->add_option("--steps", steps)->check(CLI::Range(3, 10001));
  nash->add_option("--variant", variant);
  nash->add_option("--p-lo", p_lo, "lower end of the p-grid");

  std::string profile = "d,d", sigmas = "0:1.2:0.3", method = "quadrature", axes = "joint";
  int samples = 32;
  int workers = 1;
  auto* noise = app.add_subcommand("noise", "payoff gap under strategy-angle noise as CSV");
  noise->add_option("--profile", profile);
  noise->add_option("--sigmas", sigmas, "LO:HI:STEP");
  noise->add_option("--samples", samples, "Monte Carlo draws or quadrature nodes");
  noise->add_option("--seed", seed);
  noise->add_option("--method", method, "quadrature|monte_carlo");
  noise->add_option("--axes", axes, "joint|theta|phi");
  noise->add_option("--workers", workers)->check(CLI::Range(1, 256));
  noise->add_option("--out", out);

  std::string xs;
  bool threshold = false;
  auto* mixed = app.add_subcommand("mixed", "mixed-input game as CSV, or the PPT threshold");
  auto* x_opt = mixed->add_option("--x", xs, "X or LO:HI:STEP");
  auto* t_opt = mixed->add_flag("--threshold", threshold, "print the separability threshold");
  x_opt->excludes(t_opt);
  mixed->add_option("--profile", profile);
  mixed->add_option("--variant", variant);
  mixed->add_option("--out", out);

  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "HTTP JSON service");
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--static", static_dir, "directory of static files to serve at /");
  serve->add_option("--calibration", calibration, "pinned calibration JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) return cmd_verify(calibration_out, corrupt_box, verify_json);
    if (*surface) return cmd_surface(steps, variant, out);
    if (*play) return cmd_play(a, b, variant, backend, shots, seed, calibration);
    if (*nash) return cmd_nash(steps, variant, p_lo);
    if (*noise) return cmd_noise(profile, sigmas, samples, seed, method, axes, workers, out);
    if (*mixed) {
      if (xs.empty() && !threshold) throw ParseError("give --x or --threshold");
      return cmd_mixed(xs, threshold, profile, variant, out);
    }
    if (*serve) return cmd_serve(host, port, static_dir, calibration);
  } catch (const CalibrationFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
