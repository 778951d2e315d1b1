// nlsgi: forward scattering, RH inversion, time evolution and verification
// suites for the combined NLS-GI equation.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nlsgi/suites.hpp"

using namespace nlsgi;
namespace fs = std::filesystem;

namespace {

struct Cli {
  std::string config;
  std::string out;
  bool dry_run = false;
  int threads = 0;
  std::string archive;
  std::string suite;
};

int resolve_threads(const Cli& cli, const RunConfig& cfg) {
  if (cli.threads > 0) return cli.threads;
  if (const char* env = std::getenv("NLSGI_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw InputError(std::string("NLSGI_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  return cfg.threads > 0 ? cfg.threads : 1;
}

std::string time_tag(double t) {
  std::ostringstream os;
  os << "t" << t;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PotentialField load_field(const RunConfig& cfg) {
  PotentialField f = sample_potential(parse_potential_spec(cfg.potential), spatial_grid(cfg), cfg.boundary_tol);
  for (const auto& w : f.warnings) std::cerr << "warning: " << w << '\n';
  return f;
}

Json norms_json(const NormReport& n) {
  return {{"L1", n.L1}, {"L2", n.L2}, {"L21", n.L21}, {"H1", n.H1}, {"H2", n.H2}, {"H11", n.H11}};
}

int cmd_scatter(const RunConfig& cfg, const fs::path& out, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const PotentialField f = load_field(cfg);
  const ScatteringData s = compute_scattering(f, spectral_grid(cfg), scattering_options(cfg, threads));
  Json meta = {{"potential", cfg.potential},
               {"config_hash", config_hash(cfg)},
               {"xgrid", {{"L", cfg.L}, {"N", cfg.N}}},
               {"stepper_order", cfg.stepper_order},
               {"soliton_free_bound", soliton_free_bound(f)},
               {"decay_ok", f.decay_ok},
               {"warnings", f.warnings}};
  write_scattering_json(out / "scattering.json", s, meta);
  write_scattering_csv(out / "scattering.csv", s);
  std::cerr << "scatter: unitarity_max_err = " << s.unitarity_max_err << ", min|a| = " << s.min_abs_a << " ("
            << seconds_since(t0) << " s)\n";
  check_gate(s, cfg.gate_tol);
  return 0;
}

int cmd_invert(const RunConfig& cfg, const fs::path& out, const fs::path& archive, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScatteringData s = read_scattering_json(archive);
  check_gate(s, cfg.gate_tol);
  const SpatialGrid xg = spatial_grid(cfg);
  PaddingPolicy pol = padding_policy(cfg);
  const ProjectorPlan plan(s.zgrid, pol);
  const DeltaSet d = delta_solve(s.rp, s.rm, plan);
  write_delta_csv(out / "deltas.csv", d, plan);
  const ReconstructionResult r = reconstruct_field(s, &d, xg, plan, reconstruction_options(cfg, threads));
  write_reconstruction_csv(out / "reconstruction.csv", r);
  long iters = 0;
  for (int i : r.iterations) iters += i;
  Json summary = {{"archive", archive.string()},
                  {"config_hash", config_hash(cfg)},
                  {"xgrid", {{"L", cfg.L}, {"N", cfg.N}}},
                  {"zgrid", {{"Z", s.zgrid.half_width}, {"M", s.zgrid.count}}},
                  {"padded_length", plan.padded_length()},
                  {"seam_gap", r.seam_gap},
                  {"seam_tol", cfg.seam_tol},
                  {"seam_ok", r.seam_gap <= cfg.seam_tol},
                  {"max_w_residual", r.w_residual.maxCoeff()},
                  {"max_rh_residual", r.max_rh_residual},
                  {"rh_tol", cfg.rh_tol},
                  {"rh_iterations_total", iters},
                  {"krylov_fallbacks", r.krylov_count},
                  {"delta_modulus_err", d.modulus_err},
                  {"delta_jump_residual", d.jump_residual},
                  {"norms", norms_json(r.norms)}};
  // compare with the configured potential when it lives on this grid
  try {
    const PotentialField ref = sample_potential(parse_potential_spec(cfg.potential), xg, cfg.boundary_tol);
    const double peak = ref.u.abs().maxCoeff();
    const double linf = (r.u_rec - ref.u).abs().maxCoeff();
    const double l2 = l2_norm(r.u_rec - ref.u, xg.spacing());
    const double l2ref = l2_norm(ref.u, xg.spacing());
    summary["roundtrip"] = {{"reference", cfg.potential},
                            {"linf_abs", linf},
                            {"linf_rel", peak > 0 ? linf / peak : linf},
                            {"l2_rel", l2ref > 0 ? l2 / l2ref : l2}};
  } catch (const InputError& e) {
    summary["roundtrip"] = nullptr;
    std::cerr << "note: no round-trip comparison (" << e.what() << ")\n";
  }
  write_json(out / "summary.json", summary);
  std::cerr << "invert: seam_gap = " << r.seam_gap << ", max w residual = " << r.w_residual.maxCoeff() << " ("
            << seconds_since(t0) << " s)\n";
  return 0;
}

int cmd_reference(const RunConfig& cfg, const fs::path& out) {
  const PotentialField f = load_field(cfg);
  const ReferenceState ref = reference_solve(f, cfg.evolution.t_final, cfg.evolution);
  Json snaps = Json::array();
  for (const auto& s : ref.snapshots) {
    const std::string name = "ref_" + time_tag(s.t) + ".csv";
    write_potential_csv(out / name, f.grid, s.u);
    snaps.push_back({{"t", s.t}, {"file", name}, {"mass", mass(s.u, f.grid.spacing())}});
  }
  write_json(out / "reference.json", {{"t", ref.t},
                                      {"dt", ref.dt},
                                      {"steps", ref.steps},
                                      {"mass0", ref.mass0},
                                      {"mass", ref.mass},
                                      {"mass_drift", ref.mass_drift},
                                      {"snapshots", snaps},
                                      {"config_hash", config_hash(cfg)}});
  return 0;
}

int cmd_evolve(const RunConfig& cfg, const fs::path& out, int threads) {
  const PotentialField f = load_field(cfg);
  const EvolutionConfig& ev = cfg.evolution;
  // the gate comes first: a potential with solitons can also wreck the reference run
  const ScatteringData s0 = compute_scattering(f, spectral_grid(cfg), scattering_options(cfg, threads));
  check_gate(s0, cfg.gate_tol);
  const ReferenceState ref = reference_solve(f, ev.t_final, ev);
  const ProjectorPlan plan(s0.zgrid, padding_policy(cfg));
  IstOptions io;
  io.reconstruction = reconstruction_options(cfg, threads);
  io.gate_tol = cfg.gate_tol;
  const double dx = f.grid.spacing();
  const double m0 = mass(f.u, dx);
  Json rows = Json::array();
  for (const auto& snap : ref.snapshots) {
    const IstResult ist = ist_solve(s0, snap.t, ev, f.grid, plan, io);
    write_potential_csv(out / ("ist_" + time_tag(snap.t) + ".csv"), f.grid, ist.field.u_rec);
    write_potential_csv(out / ("ref_" + time_tag(snap.t) + ".csv"), f.grid, snap.u);
    rows.push_back({{"t", snap.t},
                    {"linf_gap", (ist.field.u_rec - snap.u).abs().maxCoeff()},
                    {"l2_gap", l2_norm(ist.field.u_rec - snap.u, dx)},
                    {"mass_drift_ist", std::abs(mass(ist.field.u_rec, dx) - m0)},
                    {"mass_drift_ref", std::abs(mass(snap.u, dx) - m0)}});
  }
  Json cmp = rows.back();
  cmp["snapshots"] = rows;
  cmp["phase_coefficient"] = ev.phase_coefficient;
  cmp["phase_sign"] = ev.phase_sign;
  cmp["reference_dt"] = ref.dt;
  cmp["config_hash"] = config_hash(cfg);
  write_json(out / "comparison.json", cmp);
  std::cerr << "evolve: t = " << cmp["t"] << ", linf_gap = " << cmp["linf_gap"] << '\n';
  return 0;
}

int cmd_verify(const RunConfig& cfg, const fs::path& out, const std::string& suite, int threads) {
  const SuiteReport rep = run_suite(suite, cfg, threads);
  write_json(out / ("verify_" + suite + ".json"), rep.to_json());
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured << " bound=" << c.bound << '\n';
  std::cout << (rep.pass ? "suite passed" : "suite FAILED") << '\n';
  return rep.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse scattering engine for the combined NLS-GI equation"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Cli cli;
  app.add_option("--config", cli.config, "key = value configuration file");
  app.add_option("--out", cli.out, "output directory (overrides output_dir)");
  app.add_flag("--dry-run", cli.dry_run, "print the normalized configuration and exit");
  app.add_option("--threads", cli.threads, "worker threads (fallback: NLSGI_THREADS)")->check(CLI::PositiveNumber);
  app.add_subcommand("scatter", "direct scattering: write the scattering archive");
  auto* inv = app.add_subcommand("invert", "RH inversion of a scattering archive");
  inv->add_option("--archive", cli.archive, "scattering archive JSON (default <out>/scattering.json)");
  app.add_subcommand("evolve", "IST time evolution compared with the reference PDE solver");
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  ver->add_option("--suite", cli.suite, "identities|projectors|roundtrip|evolution|lipschitz|all");
  app.add_subcommand("reference", "reference pseudo-spectral PDE solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = cli.config.empty() ? RunConfig{} : parse_config(cli.config);
    if (!cli.out.empty()) cfg.output_dir = cli.out;
    if (!cli.archive.empty()) cfg.archive = cli.archive;
    if (!cli.suite.empty()) cfg.suite = cli.suite;
    const int threads = resolve_threads(cli, cfg);
    if (cli.dry_run) {
      std::cout << normalized(cfg) << "# effective threads = " << threads << '\n';
      return 0;
    }
    const fs::path out = cfg.output_dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw InputError("cannot create output directory " + out.string() + ": " + ec.message());
    if (cmd == "scatter") return cmd_scatter(cfg, out, threads);
    if (cmd == "invert") return cmd_invert(cfg, out, cfg.archive.empty() ? out / "scattering.json" : fs::path(cfg.archive), threads);
    if (cmd == "evolve") return cmd_evolve(cfg, out, threads);
    if (cmd == "reference") return cmd_reference(cfg, out);
    if (cmd == "verify") return cmd_verify(cfg, out, cfg.suite, threads);
  } catch (const SolitonGateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
