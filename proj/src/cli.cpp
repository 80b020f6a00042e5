#include "stpod/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stpod/errors.hpp"
#include "stpod/forging.hpp"
#include "stpod/interp.hpp"
#include "stpod/io.hpp"
#include "stpod/metrics.hpp"

namespace stpod::cli {

namespace fs = std::filesystem;

namespace {

void setup_logging() {
  static const bool once = [] {
    auto logger = spdlog::stderr_color_mt("stpod");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)once;
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("STPOD_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

io::Encoding encoding(bool text) { return text ? io::Encoding::Text : io::Encoding::Binary; }

void fem_run(const std::optional<std::string>& config, double m, const std::string& out, bool text) {
  fem::ForgingConfig cfg = config ? fem::load_forging_config(*config) : fem::ForgingConfig{};
  cfg.material.friction = m;
  const fem::ForgingResult r = fem::run_forging(cfg);
  const fs::path dir(out);
  io::write_snapshot(dir / "velocity.bin", r.velocity, encoding(text));
  io::write_snapshot(dir / "temperature.bin", r.temperature, encoding(text));
  SnapshotMatrix pos;
  pos.kind = FieldKind::Position;
  pos.parameter = r.velocity.parameter;
  pos.units = std::string(default_units(FieldKind::Position));
  pos.values = fem::stack_positions(r.positions);
  io::write_snapshot(dir / "positions.bin", pos, encoding(text));

  std::string log = "# step iterations friction_updates velocity_norm residual_norm energy max_temperature height\n";
  char buf[256];
  for (const auto& s : r.log) {
    std::snprintf(buf, sizeof buf, "%d %d %d %.6e %.6e %.12e %.6f %.6f\n", s.step, s.iterations,
                  s.shear_updates, s.velocity_norm, s.residual_norm, s.energy, s.max_temperature, s.height);
    log += buf;
  }
  io::write_file_atomic(dir / "run.log", log);
  std::cout << "wrote " << (dir / "velocity.bin").string() << ", temperature.bin, positions.bin, run.log\n";
}

void rom_build(const std::vector<std::string>& files, int mode, std::optional<double> ref,
               const std::string& out) {
  if (files.size() < 2) throw InvalidArgumentError("rom build: need at least two snapshot files");
  std::vector<SnapshotMatrix> snaps;
  for (const auto& f : files) {
    if (!fs::exists(f)) throw InvalidArgumentError("rom build: snapshot file not found: " + f);
    snaps.push_back(io::read_snapshot(f));
  }
  const RomDatabase db = build_database(snaps, mode, ref);
  io::write_database(out, db);
  std::cout << "wrote database " << out << " (" << db.params.size() << " nodes, mode " << db.mode
            << ", reference parameter " << db.params[db.ref_index] << ")\n";
}

void rom_interp(const std::string& db_dir, double lambda, const std::string& out, bool text,
                const std::string& scheme) {
  InterpolationOptions opts;
  if (scheme == "lagrange") {
    opts.scheme = WeightScheme::Lagrange;
  } else if (scheme == "linear") {
    opts.scheme = WeightScheme::PiecewiseLinear;
  } else {
    throw InvalidArgumentError("rom interp: unknown weight scheme '" + scheme + "'");
  }
  const RomDatabase db = io::read_database(db_dir);
  const SnapshotMatrix s = st_interpolate(db, lambda, opts);
  io::write_snapshot(out, s, encoding(text));
}

void rom_error(const std::string& pred, const std::string& truth, const std::string& report,
               const std::optional<std::string>& json) {
  const SnapshotMatrix p = io::read_snapshot(pred);
  const SnapshotMatrix t = io::read_snapshot(truth);
  if (p.values.rows() != t.values.rows() || p.values.cols() != t.values.cols()) {
    throw DimensionError("rom error: " + pred + " is " + std::to_string(p.values.rows()) + "x" +
                         std::to_string(p.values.cols()) + " but " + truth + " is " +
                         std::to_string(t.values.rows()) + "x" + std::to_string(t.values.cols()));
  }
  if (p.kind != t.kind) spdlog::warn("rom error: comparing {} against {}", to_string(p.kind), to_string(t.kind));
  const ErrorReport r = error_report(p, t);
  const std::string table = format_report(r);
  io::write_file_atomic(report, table);
  if (json) io::write_file_atomic(*json, report_json(r) + "\n");
  std::cout << table;
}

void rom_spectrum(const std::string& file) {
  const SnapshotMatrix s = io::read_snapshot(file);
  const std::vector<double> e = energy_spectrum(s);
  std::cout << "k energy\n";
  for (std::size_t k = 0; k < e.size(); ++k) std::printf("%zu %.15f\n", k + 1, e[k]);
}

}  // namespace

int run(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Space-time POD interpolation on Stiefel manifolds and forging snapshots"};
  app.require_subcommand(1);

  auto* fem = app.add_subcommand("fem", "High-fidelity forging simulation");
  fem->require_subcommand(1);
  auto* fem_run_cmd = fem->add_subcommand("run", "Run the forging benchmark for one friction factor");
  std::optional<std::string> config;
  double m = 0.0;
  std::string fem_out;
  bool text = false;
  fem_run_cmd->add_option("--config", config, "Key-value configuration file");
  fem_run_cmd->add_option("--m", m, "Shear friction factor")->required();
  fem_run_cmd->add_option("--out", fem_out, "Output directory")->required();
  fem_run_cmd->add_flag("--text", text, "Write text snapshots instead of binary");

  auto* rom = app.add_subcommand("rom", "Reduced-order model operations");
  rom->require_subcommand(1);

  auto* build = rom->add_subcommand("build", "Oriented SVD and truncation of training snapshots");
  std::vector<std::string> snapshots;
  int mode = 0;
  std::optional<double> ref;
  std::string db_out;
  build->add_option("--snapshots", snapshots, "Training snapshot files")->required();
  build->add_option("--mode", mode, "Number of POD modes p")->required();
  build->add_option("--ref", ref, "Reference parameter (default: nearest the median)");
  build->add_option("--out", db_out, "Database directory")->required();

  auto* interp = rom->add_subcommand("interp", "Space-time interpolation at a new parameter");
  std::string db_dir;
  double lambda = 0.0;
  std::string interp_out;
  std::string scheme = "lagrange";
  bool interp_text = false;
  interp->add_option("--db", db_dir, "Database directory")->required();
  interp->add_option("--lambda", lambda, "Target parameter")->required();
  interp->add_option("--out", interp_out, "Output snapshot file")->required();
  interp->add_option("--scheme", scheme, "Weights: lagrange or linear");
  interp->add_flag("--text", interp_text, "Write a text snapshot");

  auto* error = rom->add_subcommand("error", "Error norms of a prediction against a reference");
  std::string pred, truth, report;
  std::optional<std::string> json;
  error->add_option("--pred", pred, "Predicted snapshot file")->required();
  error->add_option("--truth", truth, "Reference snapshot file")->required();
  error->add_option("--report", report, "Plain-text report file")->required();
  error->add_option("--json", json, "Machine-readable record file");

  auto* spectrum = rom->add_subcommand("spectrum", "Cumulative POD energy of a snapshot matrix");
  std::string spec_file;
  spectrum->add_option("--snapshot", spec_file, "Snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fem_run_cmd->parsed()) {
      fem_run(config, m, fem_out, text);
    } else if (build->parsed()) {
      rom_build(snapshots, mode, ref, db_out);
    } else if (interp->parsed()) {
      rom_interp(db_dir, lambda, interp_out, interp_text, scheme);
    } else if (error->parsed()) {
      rom_error(pred, truth, report, json);
    } else if (spectrum->parsed()) {
      rom_spectrum(spec_file);
    }
  } catch (const std::exception& e) {
    std::cerr << "stpod: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace stpod::cli
