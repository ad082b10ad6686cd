// kuramoto: steady states, stability, dynamics and winding-map measures of
// Kuramoto oscillator networks.

#include <kuramoto/kuramoto.hpp>
#include <kuramoto/report.hpp>
#include <kuramoto/sweep.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace kuramoto;
using report::Json;

namespace {

enum ExitCode { ok = 0, validation = 1, numerical = 2, io = 3 };

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string output;
  std::string csv;
  Tolerances tol;
  std::uint64_t seed = 1;
  unsigned threads = default_thread_count();
  bool no_timestamp = false;
  std::size_t max_candidates = 10'000'000;
  std::size_t budget = 400000;
};

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

Json run_json(const RunConfig& c) {
  Json j{{"subcommand", c.subcommand},
         {"input", c.input},
         {"seed", c.seed},
         {"threads", c.threads},
         {"tolerances", report::tolerances_json(c.tol)}};
  if (!c.no_timestamp) j["generated_at"] = utc_now();
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

void emit(const RunConfig& c, Json body) {
  Json doc{{"run", run_json(c)}};
  for (auto& [k, v] : body.items()) doc[k] = std::move(v);
  write_text(c.output, doc.dump(2) + "\n");
}

void emit_csv(const RunConfig& c, const std::string& text) {
  if (!c.csv.empty()) write_text(c.csv, text);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw GraphError(GraphErrorKind::malformed, path, std::string("invalid JSON: ") + e.what());
  }
}

ModelContext context_of(const GraphDocument& doc, const Tolerances& tol) {
  auto basis = doc.cycle_basis ? *doc.cycle_basis : default_cycle_basis(doc.graph);
  return ModelContext(doc.graph, basis, doc.branches, doc.omega, tol);
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

// ---------------------------------------------------------------------------

int cmd_graph_check(const RunConfig& c) {
  auto doc = load_graph_document(c.input);
  const auto& g = doc.graph;
  auto basis = doc.cycle_basis ? *doc.cycle_basis : default_cycle_basis(g);
  auto lattice = cycle_basis_lattice_check(basis);
  Json divisors = Json::array();
  for (const auto& d : lattice.divisors) divisors.push_back(d.convert_to<long long>());
  auto smooth = smooth_two_valent(g);
  emit(c, Json{{"valid", true},
               {"vertices", g.num_vertices()},
               {"edges", g.num_edges()},
               {"cycle_rank", basis.size()},
               {"spanning_trees", spanning_tree_count(g)},
               {"smoothed_vertices", smooth.num_vertices()},
               {"smoothed_edges", smooth.num_edges()},
               {"predicted_faces", 2 * smooth.num_edges()},
               {"basis_from_file", doc.cycle_basis.has_value()},
               {"basis_spans_lattice", lattice.spans_lattice},
               {"elementary_divisors", divisors}});
  return ok;
}

int cmd_graph_smooth(const RunConfig& c) {
  auto g = smooth_two_valent(load_graph(c.input));
  write_text(c.output, Json::parse(graph_to_json(g).dump()).dump(2) + "\n");
  return ok;
}

int cmd_enumerate(const RunConfig& c) {
  auto doc = load_graph_document(c.input);
  auto ctx = context_of(doc, c.tol);
  EnumerationOptions opt;
  opt.threads = c.threads;
  opt.max_candidates = c.max_candidates;
  auto rep = enumerate_states(ctx, opt);
  auto body = report::enumeration_json(rep, !c.no_timestamp);
  std::string csv = "index,winding,boundary_flag,residual,stability\n";
  for (std::size_t i = 0; i < rep.states.size(); ++i) {
    auto v = classify_stability(ctx.graph(), rep.states[i]);
    body["states"][i]["stability"] = report::verdict_json(v);
    std::string w;
    for (auto k : rep.states[i].winding) w += (w.empty() ? "" : " ") + std::to_string(k);
    csv += csv_row({std::to_string(i), w, rep.states[i].boundary_flag ? "1" : "0", num(rep.states[i].residual),
                    to_string(v.label)});
  }
  body["graph"] = Json::parse(graph_to_json(doc.graph, &doc.branches, &doc.omega).dump());
  emit(c, body);
  emit_csv(c, csv);
  if (!rep.solver_failures.empty()) {
    std::cerr << rep.solver_failures.size() << " winding vector(s) could not be resolved\n";
    return numerical;
  }
  return ok;
}

int cmd_faces(const RunConfig& c) {
  auto doc = load_graph_document(c.input);
  auto ctx = context_of(doc, c.tol);
  auto faces = count_faces(ctx);
  auto predicted = predicted_faces(doc.graph);
  std::cout << "faces=" << faces << " predicted=" << predicted << "\n";
  if (!c.output.empty()) {
    Json doc_out{{"run", run_json(c)}, {"faces", faces}, {"predicted", predicted}, {"match", faces == predicted}};
    write_text(c.output, doc_out.dump(2) + "\n");
  }
  return ok;
}

int cmd_stability(const RunConfig& c, const std::string& states_path) {
  auto doc = load_graph_document(c.input);
  auto ctx = context_of(doc, c.tol);
  auto states = load_json(states_path);
  if (!states.contains("states") || !states["states"].is_array())
    throw GraphError(GraphErrorKind::malformed, states_path, "states report needs a 'states' array");
  const bool ring = doc.graph.is_ring() && ctx.omega_is_zero();
  Json out = Json::array();
  std::string csv = "index,label,max_nontrivial_eigenvalue,criterion,ring_certificate\n";
  std::size_t i = 0;
  for (const auto& js : states["states"]) {
    auto theta = js.at("theta").get<std::vector<double>>();
    if (theta.size() != doc.graph.num_vertices())
      throw GraphError(GraphErrorKind::malformed, states_path, "state theta length does not match the graph");
    double residual = fixed_point_residual(doc.graph, theta, doc.omega);
    auto v = classify_stability(doc.graph, theta);
    Json j{{"index", i}, {"residual", residual}};
    j["stability"] = report::verdict_json(v);
    std::string cert = "n/a";
    if (ring) {
      auto r = ring_instability_check(ctx, theta);
      j["ring_criterion"] = Json{{"unstable", r.unstable}, {"tie", r.tie}, {"alpha", r.alpha},
                                 {"total_angle", r.total_angle}, {"bound", r.bound}};
      cert = r.unstable ? "unstable" : "inconclusive";
    }
    if (residual > c.tol.residual) std::cerr << "state " << i << " has residual " << residual << "\n";
    out.push_back(j);
    csv += csv_row({std::to_string(i), to_string(v.label), num(v.max_nontrivial_eigenvalue), to_string(v.criterion_used), cert});
    ++i;
  }
  emit(c, Json{{"verdicts", out}});
  emit_csv(c, csv);
  return ok;
}

std::vector<double> resolve_theta0(const std::string& spec, int state_index, std::size_t n) {
  std::vector<double> theta;
  std::ifstream probe(spec);
  if (probe) {
    auto j = load_json(spec);
    if (j.contains("states")) {
      const auto& arr = j["states"];
      if (state_index < 0 || static_cast<std::size_t>(state_index) >= arr.size())
        throw std::invalid_argument("--state index out of range");
      theta = arr[static_cast<std::size_t>(state_index)].at("theta").get<std::vector<double>>();
    } else if (j.contains("theta")) {
      theta = j["theta"].get<std::vector<double>>();
    } else {
      theta = j.get<std::vector<double>>();
    }
  } else {
    theta = parse_list(spec);
  }
  if (theta.size() != n) throw std::invalid_argument("theta0 needs one entry per vertex");
  return theta;
}

int cmd_simulate(const RunConfig& c, const std::string& theta0, int state_index, double dt, double horizon,
                 double perturb_bound, std::size_t record_every) {
  auto doc = load_graph_document(c.input);
  auto start = resolve_theta0(theta0, state_index, doc.graph.num_vertices());
  auto reference = start;
  if (perturb_bound > 0) start = perturb(start, perturb_bound, c.seed);
  auto tr = simulate(doc.graph, start, doc.omega, dt, horizon, {record_every});
  const auto& last = tr.states.back();
  Json body{{"dt", dt},
            {"T", horizon},
            {"perturbation_bound", perturb_bound},
            {"initial_state", start},
            {"terminal_state", last},
            {"terminal_residual", tr.terminal_residual},
            {"distance_to_reference", gauge_aligned_distance(last, reference)},
            {"energy_initial", energy(doc.graph, start, doc.omega)},
            {"energy_terminal", energy(doc.graph, last, doc.omega)},
            {"recorded_points", tr.times.size()}};
  emit(c, body);
  if (!c.csv.empty()) {
    std::ostringstream s;
    report::trajectory_csv(s, tr, doc.graph.vertex_ids());
    write_text(c.csv, s.str());
  }
  return ok;
}

VolumeOptions volume_options(const RunConfig& c, const std::string& method) {
  VolumeOptions v;
  if (method == "quad")
    v.method = VolumeMethod::quadrature;
  else if (method == "mc")
    v.method = VolumeMethod::monte_carlo;
  else
    throw std::invalid_argument("--method must be quad or mc");
  v.budget = c.budget;
  v.seed = c.seed;
  v.threads = c.threads;
  return v;
}

int cmd_volume(const RunConfig& c, const std::string& method) {
  auto doc = load_graph_document(c.input);
  auto ctx = context_of(doc, c.tol);
  auto v = volume_W(ctx, volume_options(c, method));
  emit(c, Json{{"volume", report::volume_json(v)}});
  emit_csv(c, "value,abs_error,method,samples_or_cells\n" +
                  csv_row({num(v.value), num(v.abs_error), to_string(v.method), std::to_string(v.samples_or_cells)}));
  return ok;
}

int cmd_weyl(const RunConfig& c, const std::string& rates_text, const std::string& ms_text) {
  auto doc = load_graph_document(c.input);
  auto ctx = context_of(doc, c.tol);
  std::vector<double> rates = rates_text.empty() ? std::vector<double>(doc.graph.num_edges(), 1.0) : parse_list(rates_text);
  std::vector<int> ms;
  for (double m : parse_list(ms_text)) {
    if (m < 1 || m != std::floor(m)) throw std::invalid_argument("--Ms entries must be positive integers");
    ms.push_back(static_cast<int>(m));
  }
  WeylOptions opt;
  opt.volume = volume_options(c, "quad");
  opt.enumeration.threads = c.threads;
  opt.enumeration.max_candidates = c.max_candidates;
  auto rows = weyl_experiment(ctx, rates, ms, opt);
  Json out = Json::array();
  std::string csv = "M,lattice_count,ratio,target,target_error,solver_failures\n";
  std::size_t failures = 0;
  for (const auto& r : rows) {
    out.push_back(report::weyl_row_json(r));
    csv += csv_row({std::to_string(r.M), std::to_string(r.lattice_count), num(r.ratio), num(r.target), num(r.target_error),
                    std::to_string(r.solver_failures)});
    failures += r.solver_failures;
  }
  emit(c, Json{{"rates", rates}, {"rows", out}});
  emit_csv(c, csv);
  return failures ? numerical : ok;
}

int cmd_maximize(const RunConfig& c, std::size_t samples) {
  auto doc = load_graph_document(c.input);
  MaximizeOptions opt;
  opt.volume = volume_options(c, "quad");
  opt.samples = samples;
  opt.seed = c.seed;
  auto rep = maximize_volume_branches(doc.graph, opt, doc.omega);
  emit(c, Json{{"maximize", report::maximize_json(rep)}});
  std::string csv = "assignment,volume,abs_error\n";
  auto label = [](const BranchAssignment& br) {
    std::string s;
    for (const auto& b : br) s += b.is_reflected() ? 'R' : 'P';
    return s;
  };
  csv += csv_row({label(rep.optimal) + "*", num(rep.optimal_volume.value), num(rep.optimal_volume.abs_error)});
  for (const auto& a : rep.alternatives) csv += csv_row({label(a.branches), num(a.volume.value), num(a.volume.abs_error)});
  emit_csv(c, csv);
  return ok;
}

int cmd_sweep(const RunConfig& c) {
  auto doc = load_graph_document(c.input);
  EnumerationOptions opt;
  opt.threads = c.threads;
  opt.max_candidates = c.max_candidates;
  auto rep = sweep_branches(doc.graph, doc.omega, opt, c.tol);
  Json states = Json::array();
  for (const auto& s : rep.states)
    states.push_back(Json{{"theta", s.theta},
                          {"winding", s.winding},
                          {"boundary_flag", s.boundary_flag},
                          {"assignments", s.assignments},
                          {"stability", to_string(classify_stability(doc.graph, s.theta).label)}});
  Json failures = Json::array();
  for (const auto& [mask, f] : rep.solver_failures)
    failures.push_back(Json{{"assignment", mask}, {"winding", f.k}, {"diagnostic", f.diagnostic}});
  emit(c, Json{{"assignments", rep.assignments},
               {"empty_assignments", rep.empty_assignments},
               {"state_count", rep.states.size()},
               {"states", states},
               {"solver_failures", failures}});
  return rep.solver_failures.empty() ? ok : numerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady states, stability and winding-map measures of Kuramoto networks"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  app.add_option("-o,--output", cfg.output, "JSON report path (default: standard output)");
  app.add_option("--csv", cfg.csv, "CSV companion path");
  app.add_option("--seed", cfg.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads (default: KURAMOTO_THREADS or hardware)")->check(CLI::PositiveNumber);
  app.add_flag("--no-timestamp", cfg.no_timestamp, "omit timestamps and timings from reports");
  app.add_option("--residual-tol", cfg.tol.residual, "fixed-point residual tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--solver-tol", cfg.tol.solver, "solver tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--boundary-tol", cfg.tol.boundary, "boundary tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-candidates", cfg.max_candidates, "cap on winding candidates")->capture_default_str();
  app.add_option("--budget", cfg.budget, "integrand evaluations for volumes")->capture_default_str();

  auto* graph = app.add_subcommand("graph", "validate or smooth a graph file");
  graph->require_subcommand(1);
  auto* check = graph->add_subcommand("check", "validate a graph file and summarise it");
  check->add_option("file", cfg.input, "graph JSON")->required();
  auto* smooth = graph->add_subcommand("smooth", "remove 2-valent vertices");
  smooth->add_option("file", cfg.input, "graph JSON")->required();

  auto* enumerate = app.add_subcommand("enumerate", "all steady states for the file's branch assignment");
  enumerate->add_option("file", cfg.input, "graph JSON")->required();

  auto* faces = app.add_subcommand("faces", "count the facets of A");
  faces->add_option("file", cfg.input, "graph JSON")->required();

  std::string states_path;
  auto* stability = app.add_subcommand("stability", "classify the states of an enumerate report");
  stability->add_option("file", cfg.input, "graph JSON")->required();
  stability->add_option("--states", states_path, "enumerate report")->required();

  std::string theta0;
  int state_index = 0;
  double dt = 1e-2, horizon = 10.0, perturb_bound = 0.0;
  std::size_t record_every = 1;
  auto* sim = app.add_subcommand("simulate", "integrate the dynamics with fixed-step RK4");
  sim->add_option("file", cfg.input, "graph JSON")->required();
  sim->add_option("--theta0", theta0, "comma-separated angles, or a JSON file (array, {theta}, or enumerate report)")->required();
  sim->add_option("--state", state_index, "state index when --theta0 is an enumerate report")->capture_default_str();
  sim->add_option("--dt", dt, "step size")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("-T,--horizon", horizon, "final time")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--perturb", perturb_bound, "uniform perturbation bound")->capture_default_str()->check(CLI::NonNegativeNumber);
  sim->add_option("--record-every", record_every, "store every n-th step")->capture_default_str()->check(CLI::PositiveNumber);

  std::string method = "quad";
  auto* volume = app.add_subcommand("volume", "|W(A)| by quadrature or Monte Carlo");
  volume->add_option("file", cfg.input, "graph JSON")->required();
  volume->add_option("--method", method, "quad or mc")->capture_default_str()->check(CLI::IsMember({"quad", "mc"}));

  std::string rates, ms = "10,40,160";
  auto* weyl = app.add_subcommand("weyl", "lattice counts of subdivided graphs against |W_r(A)|");
  weyl->add_option("file", cfg.input, "base graph JSON")->required();
  weyl->add_option("--rates", rates, "comma-separated subdivision rates (default all 1)");
  weyl->add_option("--Ms", ms, "comma-separated increasing scales")->capture_default_str();

  std::size_t samples = 64;
  auto* maximize = app.add_subcommand("maximize", "compare volumes across branch assignments");
  maximize->add_option("file", cfg.input, "graph JSON")->required();
  maximize->add_option("--samples", samples, "random alternatives when |E| > 10")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep-branches", "enumerate under every principal/reflected assignment (|E| <= 12)");
  sweep->add_option("file", cfg.input, "graph JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? ok : validation;
  }

  try {
    if (check->parsed()) {
      cfg.subcommand = "graph check";
      return cmd_graph_check(cfg);
    }
    if (smooth->parsed()) {
      cfg.subcommand = "graph smooth";
      return cmd_graph_smooth(cfg);
    }
    for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
    if (enumerate->parsed()) return cmd_enumerate(cfg);
    if (faces->parsed()) return cmd_faces(cfg);
    if (stability->parsed()) return cmd_stability(cfg, states_path);
    if (sim->parsed()) return cmd_simulate(cfg, theta0, state_index, dt, horizon, perturb_bound, record_every);
    if (volume->parsed()) return cmd_volume(cfg, method);
    if (weyl->parsed()) return cmd_weyl(cfg, rates, ms);
    if (maximize->parsed()) return cmd_maximize(cfg, samples);
    if (sweep->parsed()) return cmd_sweep(cfg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io;
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return validation;
  } catch (const FaceCountError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return validation;
  } catch (const ConsistencyError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return numerical;
  } catch (const SimulationError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return numerical;
  } catch (const QuadratureError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return numerical;
  } catch (const EnumerationError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return validation;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return numerical;
  }
  return validation;
}
