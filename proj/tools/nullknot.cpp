// nullknot: construct, check, evolve, trace, helicity, export.
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include "nullknot/bateman.hpp"
#include "nullknot/construct.hpp"
#include "nullknot/diagnostics.hpp"
#include "nullknot/fields.hpp"
#include "nullknot/fieldlines.hpp"
#include "nullknot/flow.hpp"
#include "nullknot/io.hpp"
#include "nullknot/probes.hpp"
#include "nullknot/spectral.hpp"

using nlohmann::json;
using namespace nullknot;

namespace {

std::pair<int, int> parse_mn(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("--family expects m,n (e.g. 1,1)");
  try {
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--family expects integers m,n");
  }
}

Vec3R parse_vec3(const std::string& s) {
  Vec3R v;
  const auto c1 = s.find(','), c2 = s.find(',', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw ConfigError("--seed expects x,y,z");
  try {
    v.x = std::stod(s.substr(0, c1));
    v.y = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    v.z = std::stod(s.substr(c2 + 1));
  } catch (const std::exception&) {
    throw ConfigError("--seed expects numbers x,y,z");
  }
  return v;
}

Selector parse_selector(const std::string& s) {
  if (s == "E") return Selector::E;
  if (s == "B") return Selector::B;
  if (s == "V") return Selector::V;
  if (s == "B/W" || s == "BoverW") return Selector::BoverW;
  if (s == "E/W" || s == "EoverW") return Selector::EoverW;
  throw ConfigError("--selector must be one of E, B, V, B/W, E/W");
}

struct FieldSource {
  std::string family;        // "m,n"
  std::string rational_map;  // "hopf"
  std::string snapshot;      // path

  void add_options(CLI::App* cmd, bool with_snapshot = true) {
    cmd->add_option("--family", family, "closed-form knotted family m,n");
    cmd->add_option("--rational-map", rational_map, "rational-map construction (hopf)");
    if (with_snapshot) cmd->add_option("--in", snapshot, "input snapshot path");
  }

  int count() const {
    return int(!family.empty()) + int(!rational_map.empty()) + int(!snapshot.empty());
  }

  void require_one() const {
    if (count() != 1)
      throw ConfigError("exactly one field source required (--family | --rational-map | --in)");
  }

  json describe() const {
    json j;
    if (!family.empty()) j["family"] = family;
    if (!rational_map.empty()) j["rational_map"] = rational_map;
    if (!snapshot.empty()) j["snapshot"] = snapshot;
    return j;
  }

  AnalyticField analytic() const {
    if (!family.empty()) {
      const auto [m, n] = parse_mn(family);
      return knotted_family({m, n});
    }
    if (!rational_map.empty()) {
      if (rational_map != "hopf") throw ConfigError("unknown rational map: " + rational_map);
      return assembled_field(hopf_map(), {});
    }
    throw ConfigError("this subcommand needs a closed-form source (--family or --rational-map)");
  }
};

void emit_report(const std::string& out_path, const json& report) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    nullknot::detail::atomic_write(out_path, text);
}

json base_report(const std::string& command, const json& config) {
  json j;
  j["command"] = command;
  j["config"] = config;
  j["timestamp"] = std::time(nullptr);  // excluded from report comparisons
  return j;
}

int run_construct(const FieldSource& src, double L, int N, double t, bool project,
                  const std::string& out) {
  src.require_one();
  if (out.empty()) throw ConfigError("construct: --out is required");
  GridField g;
  int degenerate = 0;
  if (!src.rational_map.empty()) {
    if (src.rational_map != "hopf") throw ConfigError("unknown rational map: " + src.rational_map);
    g = assemble_grid(hopf_map(), {}, {L, N, t}, &degenerate);
  } else {
    g = sample(src.analytic(), {L, N, t});
  }
  if (project) g = project_divergence_free(g);
  save_snapshot(out, g);

  json config = src.describe();
  config["L"] = L;
  config["N"] = N;
  config["t"] = t;
  config["project"] = project;
  config["out"] = out;
  json report = base_report("construct", config);
  report["results"]["degenerate_points"] = degenerate;
  report["results"]["grid_max_norm"] = grid_max_norm(g);
  emit_report("", report);
  return 0;
}

int run_check(const FieldSource& src, int points, std::uint64_t seed, double t,
              double half_width, bool transport, const std::string& out) {
  src.require_one();
  const AnalyticField field = src.analytic();

  json config = src.describe();
  config["points"] = points;
  config["seed"] = seed;
  config["t"] = t;
  config["half_width"] = half_width;
  config["transport"] = transport;
  json report = base_report("check", config);

  double max_null = 0, max_shear = 0, max_maxwell = 0;
  int degenerate = 0;
  for (const Vec3R& x : probe_points(seed, points, half_width)) {
    const Point4 p = at(t, x);
    const FieldJet1 jet = field.jet1(p);
    max_null = std::max(max_null, relative_null_residual(jet.F));
    max_shear = std::max(max_shear, relative_shear_residual(jet.F, jet.J));
    const Vec3C dF = time_derivative_fd(field, p, 1e-4);
    const Vec3C curl = curl_from_jacobian(jet.J);
    const Vec3C maxwell = dF + Complex(0, 1) * curl;
    const double scale = norm(jet.F) + kResidualFloor;
    max_maxwell = std::max(max_maxwell, norm(maxwell) / scale);
  }
  report["results"]["max_relative_null_residual"] = max_null;
  report["results"]["max_relative_shear_residual"] = max_shear;
  report["results"]["max_relative_maxwell_residual"] = max_maxwell;

  if (transport) {
    const int tcount = std::min(points, 50);
    const auto healthy = healthy_probe_points(field, t, seed, tcount, half_width, 1e-3);
    double euler = 0, continuity = 0, b_over_w = 0, e_over_w = 0, omega_over_w = 0,
           helicity = 0;
    for (const Vec3R& x : healthy) {
      const TransportResidualReport r = transport_residuals(field, at(t, x));
      euler = std::max(euler, norm(r.euler));
      continuity = std::max(continuity, std::abs(r.continuity));
      b_over_w = std::max(b_over_w, norm(r.transport_B));
      e_over_w = std::max(e_over_w, norm(r.transport_E));
      omega_over_w = std::max(omega_over_w, norm(r.transport_Omega));
      helicity = std::max(helicity, std::abs(r.helicity_density));
    }
    json worst;
    worst["euler"] = euler;
    worst["continuity"] = continuity;
    worst["b_over_w"] = b_over_w;
    worst["e_over_w"] = e_over_w;
    worst["omega_over_w"] = omega_over_w;
    worst["helicity"] = helicity;
    report["results"]["transport"] = worst;
    report["results"]["transport_points"] = tcount;
    (void)degenerate;
  }
  emit_report(out, report);
  return 0;
}

int run_evolve(const std::string& in, double dt, int steps, bool project, double div_tol,
               const std::string& out) {
  if (in.empty() || out.empty()) throw ConfigError("evolve: --in and --out are required");
  if (steps < 1) throw ConfigError("evolve: --steps must be >= 1");
  GridField g = load_snapshot(in);
  if (project) g = project_divergence_free(g);
  for (int i = 0; i < steps; ++i) g = propagate(g, dt, div_tol);
  save_snapshot(out, g);
  return 0;
}

int run_trace(const FieldSource& src, const std::string& selector, const Vec3R& seed, double t,
              double max_arc, const std::string& out) {
  src.require_one();
  if (out.empty()) throw ConfigError("trace: --out is required");
  const AnalyticField field = src.analytic();
  TracerConfig cfg;
  cfg.selector = parse_selector(selector);
  if (max_arc > 0) cfg.max_arc_length = max_arc;

  std::optional<BatemanPair> pair;
  if (!src.family.empty()) {
    const auto [m, n] = parse_mn(src.family);
    pair = knotted_family_pair({m, n});
  }
  const FieldLine line = trace(field, seed, t, cfg, pair ? &*pair : nullptr);
  write_line_csv(out, line);

  json config = src.describe();
  config["selector"] = selector;
  config["seed"] = {seed.x, seed.y, seed.z};
  config["t"] = t;
  config["out"] = out;
  json report = base_report("trace", config);
  report["results"]["vertices"] = line.vertices.size();
  report["results"]["length"] = line.length();
  report["results"]["closed"] = line.closed;
  report["results"]["return_distance"] = line.return_distance;
  report["results"]["stop_reason"] = line.stop_reason;
  emit_report("", report);
  return 0;
}

int run_helicity(const FieldSource& src, double L, int N, double t, const std::string& out) {
  src.require_one();
  GridField g;
  if (!src.snapshot.empty())
    g = load_snapshot(src.snapshot);
  else
    g = sample(src.analytic(), {L, N, t});
  const GridField e = project_divergence_free(electric_grid(g));
  const GridField b = project_divergence_free(magnetic_grid(g));
  const HelicityReport rep = helicities(e, b);

  json config = src.describe();
  config["L"] = g.spec.L;
  config["N"] = g.spec.N;
  config["t"] = g.spec.t;
  json report = base_report("helicity", config);
  report["results"]["H_m"] = rep.H_m;
  report["results"]["H_e"] = rep.H_e;
  report["results"]["H_Omega"] = rep.H_Omega;
  report["results"]["masked_fraction"] = rep.masked_fraction;
  report["results"]["note"] = rep.note;
  emit_report(out, report);
  return 0;
}

int run_export(const std::string& in, const std::string& out) {
  if (in.empty() || out.empty()) throw ConfigError("export: --in and --out are required");
  write_vtk(out, load_snapshot(in));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knotted null electromagnetic fields: construction, diagnostics, evolution"};
  app.require_subcommand(1);

  // construct
  auto* c_construct = app.add_subcommand("construct", "sample a field into a snapshot");
  FieldSource construct_src;
  construct_src.add_options(c_construct, /*with_snapshot=*/false);
  double c_L = 6.0, c_t = 0.0;
  int c_N = 64;
  bool c_project = false;
  std::string c_out;
  c_construct->add_option("--L", c_L, "box half-width");
  c_construct->add_option("--N", c_N, "points per axis (power of two)");
  c_construct->add_option("--t", c_t, "time stamp");
  c_construct->add_flag("--project", c_project, "project divergence-free before writing");
  c_construct->add_option("--out", c_out, "output snapshot")->required();

  // check
  auto* c_check = app.add_subcommand("check", "pointwise residual report");
  FieldSource check_src;
  check_src.add_options(c_check, /*with_snapshot=*/false);
  int k_points = 200;
  std::uint64_t k_seed = 42;
  double k_t = 0.0, k_half = 3.0;
  bool k_transport = true;
  std::string k_out;
  c_check->add_option("--points", k_points, "number of probe points");
  c_check->add_option("--seed", k_seed, "probe RNG seed");
  c_check->add_option("--t", k_t, "time");
  c_check->add_option("--half-width", k_half, "probe box half-width");
  c_check->add_flag("--transport,!--no-transport", k_transport, "include transport residuals");
  c_check->add_option("--out", k_out, "report path (default stdout)");

  // evolve
  auto* c_evolve = app.add_subcommand("evolve", "propagate a snapshot");
  std::string e_in, e_out;
  double e_dt = 0.1, e_div_tol = 1e-6;
  int e_steps = 1;
  bool e_project = false;
  c_evolve->add_option("--in", e_in, "input snapshot")->required();
  c_evolve->add_option("--dt", e_dt, "time step (exact, any size)");
  c_evolve->add_option("--steps", e_steps, "number of steps");
  c_evolve->add_flag("--project", e_project, "project divergence-free first");
  c_evolve->add_option("--divergence-tolerance", e_div_tol, "transversality gate");
  c_evolve->add_option("--out", e_out, "output snapshot")->required();

  // trace
  auto* c_trace = app.add_subcommand("trace", "trace a field line to CSV");
  FieldSource trace_src;
  trace_src.add_options(c_trace, /*with_snapshot=*/false);
  std::string t_selector = "B", t_seed = "0.5,0,0", t_out;
  double t_t = 0.0, t_max_arc = 0.0;
  c_trace->add_option("--selector", t_selector, "E | B | V | B/W | E/W");
  c_trace->add_option("--seed", t_seed, "seed point x,y,z");
  c_trace->add_option("--t", t_t, "time");
  c_trace->add_option("--max-arc", t_max_arc, "maximum arc length");
  c_trace->add_option("--out", t_out, "CSV path")->required();

  // helicity
  auto* c_hel = app.add_subcommand("helicity", "helicity integrals report");
  FieldSource hel_src;
  hel_src.add_options(c_hel);
  double h_L = 8.0, h_t = 0.0;
  int h_N = 64;
  std::string h_out;
  c_hel->add_option("--L", h_L, "box half-width (closed-form sources)");
  c_hel->add_option("--N", h_N, "points per axis");
  c_hel->add_option("--t", h_t, "time");
  c_hel->add_option("--out", h_out, "report path (default stdout)");

  // export
  auto* c_export = app.add_subcommand("export", "snapshot to VTK legacy ASCII");
  std::string x_in, x_out;
  c_export->add_option("--in", x_in, "input snapshot")->required();
  c_export->add_option("--out", x_out, "output VTK file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_construct->parsed())
      return run_construct(construct_src, c_L, c_N, c_t, c_project, c_out);
    if (c_check->parsed())
      return run_check(check_src, k_points, k_seed, k_t, k_half, k_transport, k_out);
    if (c_evolve->parsed()) return run_evolve(e_in, e_dt, e_steps, e_project, e_div_tol, e_out);
    if (c_trace->parsed())
      return run_trace(trace_src, t_selector, parse_vec3(t_seed), t_t, t_max_arc, t_out);
    if (c_hel->parsed()) return run_helicity(hel_src, h_L, h_N, h_t, h_out);
    if (c_export->parsed()) return run_export(x_in, x_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
