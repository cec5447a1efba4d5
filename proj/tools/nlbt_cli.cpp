#include <nlbt/io.hpp>
#include <nlbt/models.hpp>
#include <nlbt/scenarios.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace nlbt;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, io_failure = 1, hypothesis = 2, parse = 3, resource = 4 };

struct ModelArgs {
  std::string name, file;
  int degree = 7;  // Taylor degree for pendulum models
  int n = 6;       // random model size
};

ControlAffineSystem zoo_model(const ModelArgs& a, std::uint64_t seed) {
  if (a.name == "2d-illustrative") return two_dim_illustrative();
  if (a.name == "pendulum") return pendulum(a.degree);
  if (a.name == "3d-illustrative") return three_dim_illustrative();
  if (a.name == "double-pendulum") return double_pendulum(a.degree);
  if (a.name == "beam") return beam_single_element();
  if (a.name == "random") return random_stable_poly(a.n, 3, seed);
  throw std::invalid_argument("unknown model '" + a.name + "'");
}

ControlAffineSystem load_model(const ModelArgs& a, std::uint64_t seed) {
  if (!a.file.empty()) return system_from_json(read_json_file(a.file));
  return zoo_model(a, seed);
}

void add_model_options(CLI::App* cmd, ModelArgs& a) {
  auto* name = cmd->add_option("--model", a.name, "zoo model: 2d-illustrative, pendulum, 3d-illustrative, "
                                                  "double-pendulum, beam, random");
  auto* file = cmd->add_option("--input", a.file, "kps-1 model file")->check(CLI::ExistingFile);
  name->excludes(file);
  cmd->add_option("--taylor-degree", a.degree, "Taylor degree for pendulum models")->check(CLI::Range(1, 7));
  cmd->add_option("--n", a.n, "state dimension of the random model")->check(CLI::Range(2, 100000));
}

// zero | sin:AMP:FREQ | noise:AMP[:HOLD]
Signal parse_signal(const std::string& text, std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto num = [&](std::size_t i) { return std::stod(parts.at(i)); };
  try {
    if (parts.size() == 1 && parts[0] == "zero") return Signal::zero();
    if (parts.size() == 3 && parts[0] == "sin") return Signal::sinusoid(num(1), num(2));
    if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "noise")
      return Signal::white_noise(num(1), seed, parts.size() == 3 ? num(2) : 0.01);
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("bad input signal '" + text + "'");
}

Vector parse_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

struct SimArgs {
  std::string scenario;
  std::vector<double> x0;
  std::string input;
  double t1 = -1;
  int samples = -1;
  double rel_tol = 1e-8, abs_tol = 1e-10;
};

void add_sim_options(CLI::App* cmd, SimArgs& a) {
  cmd->add_option("--scenario", a.scenario, "preset scenario: 2d-illustrative, 3d-illustrative, double-pendulum, pendulum");
  cmd->add_option("--x0", a.x0, "initial state in original coordinates");
  cmd->add_option("--signal", a.input, "zero | sin:AMP:FREQ | noise:AMP[:HOLD]");
  cmd->add_option("--t1", a.t1, "final time");
  cmd->add_option("--samples", a.samples, "output grid size")->check(CLI::Range(2, 100000000));
  cmd->add_option("--rtol", a.rel_tol, "relative tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--atol", a.abs_tol, "absolute tolerance")->check(CLI::PositiveNumber);
}

// A scenario with command-line overrides applied; the state dimension of x0 is checked later.
Scenario resolve_scenario(const SimArgs& a, std::uint64_t seed) {
  Scenario sc;
  if (!a.scenario.empty()) sc = scenario_by_name(a.scenario);
  else sc = Scenario{"custom", {}, {}, Vector(), Signal::zero(), 10, 1001};
  if (!a.x0.empty()) sc.x0 = parse_vector(a.x0);
  if (!a.input.empty()) sc.input = parse_signal(a.input, seed);
  if (a.t1 > 0) sc.t1 = a.t1;
  if (a.samples > 0) sc.n_samples = a.samples;
  return sc;
}

SimOptions sim_options(const SimArgs& a, const Scenario& sc) {
  SimOptions o = sc.sim_options();
  o.rel_tol = a.rel_tol;
  o.abs_tol = a.abs_tol;
  return o;
}

// A kps-1 file holds either a full model or a ROM (which carries its own x0 map).
struct Simulatable {
  Model model;
  std::optional<PolyVectorField> x0_map;
  Index full_order = 0;
};

Simulatable load_simulatable(const std::string& path) {
  const json j = read_json_file(path);
  Simulatable s;
  if (j.contains("x0_map")) {
    const ReducedOrderModel rom = rom_from_json(j);
    s.model = model_of(rom.sys);
    s.x0_map = rom.P;
    s.full_order = rom.P.base;
  } else {
    const ControlAffineSystem sys = system_from_json(j);
    s.model = model_of(sys);
    s.full_order = sys.n;
  }
  return s;
}

Trajectory run(const Simulatable& s, const Scenario& sc, const SimOptions& o) {
  if (sc.x0.size() != s.full_order)
    throw std::invalid_argument("x0 has " + std::to_string(sc.x0.size()) + " entries, model expects " +
                                std::to_string(s.full_order));
  const Vector x0 = s.x0_map ? eval_poly(*s.x0_map, sc.x0) : sc.x0;
  return integrate(s.model, x0, sc.input, 0, sc.t1, o);
}

void write_csv_file(const std::string& path, const Trajectory& tr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, tr);
}

void emit_error(const char* kind, const std::string& what) {
  std::cerr << json{{"error", kind}, {"reason", what}}.dump() << std::endl;
}

// Rough peak memory of the pipeline: the largest energy coefficient and transform block dominate.
double pipeline_bytes(Index n, int energy_degree) {
  return 8.0 * 6.0 * std::pow(double(n), energy_degree);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial nonlinear balanced truncation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  int threads = 1;
  app.add_option("--seed", seed, "seed for random models and noise inputs");
  app.add_option("--threads", threads, "Eigen worker threads")->check(CLI::Range(1, 256));

  ModelArgs model;
  std::string out;

  auto* exp = app.add_subcommand("export", "write a zoo model as a kps-1 file");
  add_model_options(exp, model);
  exp->add_option("-o,--output", out, "output file")->required();

  int d_transf = 3, d_rom = -1;
  auto* bal = app.add_subcommand("balance", "compute energies, balancing transform and balanced realization");
  add_model_options(bal, model);
  bal->add_option("--degree", d_transf, "balancing transform degree")->check(CLI::Range(1, 12));
  bal->add_option("--rom-degree", d_rom, "balanced realization degree (default: transform degree)");
  bal->add_option("-o,--output", out, "artifact file")->required();

  std::string artifact;
  int r = 0, rom_degree = -1;
  auto* red = app.add_subcommand("reduce", "truncate a balanced realization");
  red->add_option("--artifact", artifact, "balance artifact")->required()->check(CLI::ExistingFile);
  red->add_option("-r,--order", r, "number of retained states")->required();
  red->add_option("--rom-degree", rom_degree, "truncate the ROM polynomials to this degree");
  red->add_option("-o,--output", out, "ROM file")->required();

  std::string sim_file;
  SimArgs sim;
  auto* simc = app.add_subcommand("simulate", "simulate a model or ROM and write a CSV trajectory");
  simc->add_option("--model-file", sim_file, "kps-1 model or ROM file")->required()->check(CLI::ExistingFile);
  add_sim_options(simc, sim);
  simc->add_option("-o,--output", out, "CSV file")->required();

  std::string reference;
  std::vector<std::string> candidates;
  std::string out_dir;
  SimArgs cmp;
  auto* cmpc = app.add_subcommand("compare", "output errors of models against a reference on a shared grid");
  cmpc->add_option("--reference", reference, "kps-1 reference file, or 'exact' for the scenario's reference dynamics")
      ->required();
  cmpc->add_option("--models", candidates, "kps-1 model or ROM files")->required()->check(CLI::ExistingFile);
  add_sim_options(cmpc, cmp);
  bool discrete = false;
  cmpc->add_flag("--discrete", discrete, "Euclidean norm of sampled errors instead of the trapezoid integral");
  cmpc->add_option("--out-dir", out_dir, "directory for trajectory CSVs and summary.json")->required();

  std::vector<int> ns = {8, 16, 32};
  int energy_degree = 3, reps = 1;
  double mem_budget_mb = 4096;
  auto* bench = app.add_subcommand("bench", "per-stage pipeline timings on random models");
  bench->add_option("--n", ns, "state dimensions")->check(CLI::Range(2, 100000));
  bench->add_option("--energy-degree", energy_degree, "energy function degree (transform degree + 1)")
      ->check(CLI::Range(2, 8));
  bench->add_option("--reps", reps, "repetitions per size")->check(CLI::Range(1, 1000));
  bench->add_option("--mem-budget-mb", mem_budget_mb, "refuse sizes whose estimate exceeds this");
  bench->add_option("-o,--output", out, "CSV file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(threads);

  try {
    if (*exp || *bal) {
      if (model.name.empty() && model.file.empty()) throw CLI::RequiredError("--model or --input");
    }
    if (*exp) {
      write_json_file(out, system_to_json(load_model(model, seed)));
    } else if (*bal) {
      const ControlAffineSystem s = load_model(model, seed);
      PipelineOptions o;
      o.d_transf = d_transf;
      o.d_rom = d_rom;
      const PipelineResult res = run_pipeline(s, o);
      write_json_file(out, pipeline_to_json(s, res, d_transf, d_rom < 0 ? d_transf : d_rom));
      std::cout << json{{"hankel", vector_to_json(res.hankel)}, {"sigma_condition", res.sigma_condition}}.dump()
                << std::endl;
    } else if (*red) {
      BalancedRealization br = realization_from_json(read_json_file(artifact));
      if (rom_degree > 0) {
        if (rom_degree > br.sys.f.degree()) throw std::invalid_argument("--rom-degree exceeds the artifact's realization degree");
        br.sys.f.resize_degree(rom_degree);
        br.sys.h.resize_degree(rom_degree);
        for (auto& g : br.sys.g) g.resize_degree(std::min(g.degree(), rom_degree - 1));
      }
      write_json_file(out, rom_to_json(build_rom(br, r)));
    } else if (*simc) {
      const Scenario sc = resolve_scenario(sim, seed);
      const Trajectory tr = run(load_simulatable(sim_file), sc, sim_options(sim, sc));
      write_csv_file(out, tr);
      std::cout << json{{"samples", tr.samples()}, {"diverged", tr.diverged}}.dump() << std::endl;
    } else if (*cmpc) {
      const Scenario sc = resolve_scenario(cmp, seed);
      const SimOptions o = sim_options(cmp, sc);
      const ErrorNorm norm = discrete ? ErrorNorm::discrete : sc.norm;
      Trajectory ref;
      if (reference == "exact") {
        if (cmp.scenario.empty()) throw std::invalid_argument("--reference exact needs --scenario");
        if (sc.x0.size() != sc.reference.n) throw std::invalid_argument("x0 does not match the reference dimension");
        ref = integrate(sc.reference, sc.x0, sc.input, 0, sc.t1, o);
      } else {
        ref = run(load_simulatable(reference), sc, o);
      }
      fs::create_directories(out_dir);
      write_csv_file((fs::path(out_dir) / "reference.csv").string(), ref);
      json summary{{"scenario", sc.name},
                   {"norm", norm == ErrorNorm::discrete ? "discrete" : "trapezoid"},
                   {"reference_diverged", ref.diverged},
                   {"models", json::array()}};
      for (const auto& path : candidates) {
        const Trajectory tr = run(load_simulatable(path), sc, o);
        const std::string stem = fs::path(path).stem().string();
        write_csv_file((fs::path(out_dir) / (stem + ".csv")).string(), tr);
        if (tr.Y.cols() != ref.Y.cols()) throw std::invalid_argument(path + ": output dimension differs from the reference");
        json errs = json::array();
        if (tr.diverged || ref.diverged) {
          for (Index c = 0; c < ref.Y.cols(); ++c) errs.push_back(nullptr);
        } else {
          for (Index c = 0; c < ref.Y.cols(); ++c) errs.push_back(l2_error(ref, tr, c, norm));
        }
        summary["models"].push_back({{"file", path}, {"errors", errs}, {"diverged", tr.diverged}});
      }
      write_json_file((fs::path(out_dir) / "summary.json").string(), summary);
      std::cout << summary.dump() << std::endl;
    } else if (*bench) {
      for (int n : ns) {
        const double need = pipeline_bytes(n, energy_degree) / (1024.0 * 1024.0);
        if (need > mem_budget_mb)
          throw resource_error("n=" + std::to_string(n) + " needs about " + std::to_string(static_cast<long>(need)) +
                               " MB, budget " + std::to_string(static_cast<long>(mem_budget_mb)) + " MB");
      }
      std::ofstream file;
      if (!out.empty()) {
        file.open(out);
        if (!file) throw std::runtime_error("cannot write '" + out + "'");
      }
      std::ostream& os = out.empty() ? std::cout : file;
      os << "n,rep,energy,inod,balance,realization,total\n";
      for (int n : ns) {
        const ControlAffineSystem s = random_stable_poly(n, energy_degree - 1, seed);
        PipelineOptions o;
        o.d_transf = energy_degree - 1;
        std::vector<double> totals;
        for (int rep = 0; rep < reps; ++rep) {
          const StageTimes t = run_pipeline(s, o).times;
          const double total = t.energy + t.inod + t.balance + t.realization;
          totals.push_back(total);
          os << n << "," << rep << "," << t.energy << "," << t.inod << "," << t.balance << "," << t.realization << ","
             << total << "\n";
        }
        double mean = 0, var = 0;
        for (double v : totals) mean += v / reps;
        for (double v : totals) var += (v - mean) * (v - mean) / std::max(1, reps - 1);
        std::cerr << "n=" << n << " mean " << mean << " s, variance " << var << std::endl;
      }
    }
  } catch (const hypothesis_error& e) {
    emit_error("hypothesis", e.what());
    return hypothesis;
  } catch (const parse_error& e) {
    emit_error("parse", e.what());
    return parse;
  } catch (const resource_error& e) {
    emit_error("resource", e.what());
    return resource;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    emit_error("failure", e.what());
    return io_failure;
  }
  return ok;
}
