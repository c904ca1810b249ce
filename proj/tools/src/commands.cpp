#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "dictct/errors.hpp"
#include "dictct/eval.hpp"
#include "dictct/hash.hpp"
#include "dictct/phantom.hpp"

namespace dictct::app {

namespace {

using io::format_double;

void ensure_output_dir(const ExperimentConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());
}

void echo_config(io::KeyValues& meta, const ExperimentConfig& config) {
  for (const auto& [key, value] : config.effective.entries()) meta.set("config." + key, value);
}

/// Writes the data file, then a sidecar holding `meta`, the data hash and the
/// effective configuration.
void write_artifact(const fs::path& path, const Eigen::MatrixXd& data, io::KeyValues meta,
                    const ExperimentConfig& config) {
  io::write_dense(path, data);
  meta.set("data_hash", io::file_hash(path));
  echo_config(meta, config);
  io::write_meta(path, meta);
}

struct Artifact {
  Eigen::MatrixXd data;
  io::KeyValues meta;
  std::string hash;
};

Artifact load_artifact(const fs::path& path, std::string_view format) {
  Artifact a;
  a.meta = io::read_meta(path);
  if (a.meta.require("format") != format) {
    throw ConsistencyError(path.string() + ": expected a " + std::string(format) + " file, metadata says " +
                           a.meta.require("format"));
  }
  a.hash = io::file_hash(path);
  if (a.hash != a.meta.require("data_hash")) {
    throw ConsistencyError(path.string() + ": content hash does not match its metadata");
  }
  a.data = io::read_dense(path);
  return a;
}

void set_residuals(io::KeyValues& kv, const KktResiduals& r) {
  kv.set("residual_dictionary_consensus", r.dictionary_consensus);
  kv.set("residual_code_consensus", r.code_consensus);
  kv.set("residual_code_multiplier", r.code_multiplier);
  kv.set("residual_dictionary_multiplier", r.dictionary_multiplier);
}

io::KeyValues dictionary_meta(const Dictionary& d, const std::string& training_file_hash) {
  io::KeyValues meta;
  meta.set("format", "dictionary");
  meta.set("p", static_cast<std::int64_t>(d.atoms.rows()));
  meta.set("s", static_cast<std::int64_t>(d.atoms.cols()));
  meta.set("patch_rows", static_cast<std::int64_t>(d.shape.height));
  meta.set("patch_cols", static_cast<std::int64_t>(d.shape.width));
  meta.set("constraint", std::string(to_string(d.constraint)));
  meta.set("lambda", d.lambda);
  meta.set("rho", d.rho);
  meta.set("epsilon", d.epsilon);
  meta.set("iterations", static_cast<std::int64_t>(d.provenance.iterations));
  meta.set("converged", d.provenance.converged);
  set_residuals(meta, d.provenance.residuals);
  meta.set("objective", d.provenance.objective);
  meta.set("code_max", d.provenance.code_max);
  meta.set("code_support", static_cast<std::int64_t>(d.provenance.code_support));
  meta.set("training_patches", static_cast<std::int64_t>(d.provenance.training_patches));
  meta.set("training_hash", d.provenance.training_hash);
  meta.set("training_image_hash", training_file_hash);
  return meta;
}

PatchMatrix training_patches(const ExperimentConfig& config, PatchShape shape) {
  if (config.training_image.empty()) throw ConfigError("training_image is required");
  const GrayImage image = io::read_pgm(config.training_image);
  std::optional<Index> limit;
  if (config.patch_limit > 0) limit = config.patch_limit;
  return extract_patches(image, shape, config.patch_stride, limit, config.patch_seed);
}

GrayImage read_exact(const ExperimentConfig& config) {
  if (config.exact_image.empty()) throw ConfigError("exact_image is required");
  return io::read_pgm(config.exact_image);
}

ScanGeometry config_geometry(const ExperimentConfig& config, const GrayImage& exact) {
  return make_geometry(exact.rows(), exact.cols(), config.projections, config.angle_start, config.angle_end);
}

struct LoadedSinogram {
  Artifact artifact;
  ScanGeometry geometry;
};

LoadedSinogram load_sinogram(const ExperimentConfig& config) {
  LoadedSinogram s{load_artifact(config.sinogram_path(), "sinogram"), {}};
  const auto& meta = s.artifact.meta;
  const auto n = static_cast<Index>(meta.require_int("image_size"));
  s.geometry = make_geometry(n, n, static_cast<Index>(meta.require_int("projections")),
                             meta.require_double("angle_start"), meta.require_double("angle_end"));
  if (geometry_hash(s.geometry) != meta.require("geometry_hash")) {
    throw ConsistencyError(config.sinogram_path().string() + ": geometry hash mismatch");
  }
  if (s.artifact.data.cols() != 1 || s.artifact.data.rows() != s.geometry.num_rays()) {
    throw ConsistencyError(config.sinogram_path().string() + ": data length does not match its geometry");
  }
  return s;
}

struct LoadedDictionary {
  Artifact artifact;
  PatchShape shape;
};

LoadedDictionary load_dictionary(const fs::path& path) {
  LoadedDictionary d{load_artifact(path, "dictionary"), {}};
  d.shape = {static_cast<Index>(d.artifact.meta.require_int("patch_rows")),
             static_cast<Index>(d.artifact.meta.require_int("patch_cols"))};
  if (d.shape.height * d.shape.width != d.artifact.data.rows()) {
    throw ConsistencyError(path.string() + ": patch shape does not match the number of rows");
  }
  return d;
}

void write_block_csv(const fs::path& path, const Eigen::VectorXd& errors, const PatchGeometry& geometry) {
  std::ostringstream out;
  out << "block,block_row,block_col,error\n";
  for (Index j = 0; j < errors.size(); ++j) {
    out << j << ',' << j % geometry.block_rows() << ',' << j / geometry.block_rows() << ','
        << format_double(errors[j]) << '\n';
  }
  io::write_text(path, out.str());
}

double resolve_mu(const ExperimentConfig& config, Index blocks, double mu_over_q) {
  return config.mu ? *config.mu : mu_over_q * static_cast<double>(blocks);
}

void set_solver_report(io::KeyValues& kv, const SolverReport& r) {
  kv.set("iterations", static_cast<std::int64_t>(r.iterations));
  kv.set("converged", r.converged);
  kv.set("objective", r.objective);
  kv.set("data_fidelity", r.data_fidelity);
  kv.set("psi", r.psi);
  kv.set("l1", r.l1);
  kv.set("support", static_cast<std::int64_t>(r.support));
  kv.set("fixed_point_residual", r.fixed_point_residual);
  kv.set("restarts", static_cast<std::int64_t>(r.restarts));
}

ReconResult run_dictionary_solver(const ExperimentConfig& config, const ReconProblem& problem, double gamma) {
  switch (config.mode) {
    case SolverMode::Main: return solve_main(problem, config.solver);
    case SolverMode::Nnls: return solve_nnls(problem, config.solver);
    case SolverMode::L1Ball: return solve_l1ball(problem, gamma, config.solver);
    case SolverMode::Art: break;
  }
  throw ConfigError("mode art does not use a dictionary solver");
}

}  // namespace

std::string geometry_hash(const ScanGeometry& geometry) {
  Fnv1a h;
  h.update(std::string_view("geometry/1"));
  const double header[] = {static_cast<double>(geometry.image_size), static_cast<double>(geometry.rays_per_projection),
                           geometry.ray_spacing};
  h.update(std::span<const double>(header));
  h.update(std::span<const double>(geometry.angles_deg));
  return h.hex();
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return kExitConfig;
  if (dynamic_cast<const GeometryError*>(&error) || dynamic_cast<const DimensionError*>(&error) ||
      dynamic_cast<const InsufficientDataError*>(&error)) {
    return kExitGeometry;
  }
  if (dynamic_cast<const DivergedError*>(&error)) return kExitConvergence;
  if (dynamic_cast<const IoError*>(&error)) return kExitIo;
  if (dynamic_cast<const ConsistencyError*>(&error)) return kExitConsistency;
  return 1;
}

void cmd_phantom(const ExperimentConfig& config, std::ostream& log) {
  ensure_output_dir(config);
  const GrayImage img = textured_phantom(config.phantom_rows, config.phantom_cols, config.phantom_seed,
                                         config.phantom_grains);
  const fs::path path = config.output("phantom.pgm");
  io::write_pgm(path, img);
  log << "wrote " << path.string() << " (" << img.rows() << "x" << img.cols() << ")\n";
}

void cmd_learn(const ExperimentConfig& config, std::ostream& log) {
  const PatchShape shape{config.patch_rows, config.patch_cols};
  const PatchMatrix patches = training_patches(config, shape);
  log << "learning " << shape.height * shape.width << "x" << config.atoms << " dictionary from "
      << patches.data.cols() << " patches\n";
  const Dictionary d = learn(patches, config.atoms, config.learn);
  ensure_output_dir(config);
  const fs::path path = config.output("dictionary.dmat");
  write_artifact(path, d.atoms, dictionary_meta(d, io::file_hash(config.training_image)), config);

  const auto& pr = d.provenance;
  if (!pr.converged) {
    log << "warning: KKT tolerance not reached in " << pr.iterations << " iterations; kept the best iterate\n";
  }
  log << "iterations " << pr.iterations << "\n"
      << "kkt residuals " << format_double(pr.residuals.dictionary_consensus) << " "
      << format_double(pr.residuals.code_consensus) << " " << format_double(pr.residuals.code_multiplier) << " "
      << format_double(pr.residuals.dictionary_multiplier) << "\n"
      << "objective " << format_double(pr.objective) << "\n"
      << "code support " << pr.code_support << " of " << d.atoms.cols() * pr.training_patches
      << (pr.code_support == 0 ? " (empty)" : "") << "\n"
      << "wrote " << path.string() << "\n";
}

void cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
  const GrayImage exact = read_exact(config);
  const ScanGeometry geometry = config_geometry(config, exact);
  const SparseMatrix A = assemble_matrix(geometry);
  const Sinogram sino = simulate(A, exact, config.rel_noise, config.noise_seed);
  ensure_output_dir(config);

  io::KeyValues meta;
  meta.set("format", "sinogram");
  meta.set("image_size", static_cast<std::int64_t>(geometry.image_size));
  meta.set("projections", static_cast<std::int64_t>(geometry.num_projections()));
  meta.set("angle_start", config.angle_start);
  meta.set("angle_end", config.angle_end);
  meta.set("rays_per_projection", static_cast<std::int64_t>(geometry.rays_per_projection));
  meta.set("ray_spacing", geometry.ray_spacing);
  meta.set("measurements", static_cast<std::int64_t>(geometry.num_rays()));
  meta.set("rel_noise", sino.rel_noise);
  meta.set("achieved_noise", sino.achieved_noise);
  meta.set("noise_seed", static_cast<std::int64_t>(sino.seed));
  meta.set("geometry_hash", geometry_hash(geometry));
  meta.set("exact_hash", io::file_hash(config.exact_image));
  const fs::path path = config.output("sinogram.dmat");
  write_artifact(path, sino.data, meta, config);
  log << "m = " << geometry.num_rays() << ", n = " << geometry.num_pixels() << ", achieved noise "
      << format_double(sino.achieved_noise) << "\nwrote " << path.string() << "\n";

  if (config.export_system_matrix) {
    const fs::path apath = config.output("system_matrix.smat");
    io::write_sparse(apath, A);
    io::KeyValues ameta;
    ameta.set("format", "system_matrix");
    ameta.set("geometry_hash", geometry_hash(geometry));
    ameta.set("data_hash", io::file_hash(apath));
    io::write_meta(apath, ameta);
    log << "wrote " << apath.string() << "\n";
  }
}

void cmd_reconstruct(const ExperimentConfig& config, std::ostream& log) {
  const LoadedSinogram sino = load_sinogram(config);
  const Index n = sino.geometry.image_size;
  std::optional<GrayImage> exact;
  if (!config.exact_image.empty()) {
    if (io::file_hash(config.exact_image) != sino.artifact.meta.require("exact_hash")) {
      throw ConsistencyError(config.exact_image.string() + " is not the image the sinogram was simulated from");
    }
    exact = io::read_pgm(config.exact_image);
  }
  std::optional<LoadedDictionary> dict;
  if (config.mode != SolverMode::Art || fs::exists(config.dictionary_path())) {
    dict = load_dictionary(config.dictionary_path());
  }

  auto A = std::make_shared<const SparseMatrix>(assemble_matrix(sino.geometry));
  const Eigen::VectorXd b = sino.artifact.data.col(0);

  io::KeyValues report;
  report.set("mode", std::string(to_string(config.mode)));
  report.set("sinogram_hash", sino.artifact.hash);
  if (dict) report.set("dictionary_hash", dict->artifact.hash);

  GrayImage image;
  double seconds = 0.0;
  std::optional<PatchGeometry> blocks;
  if (dict) blocks = PatchGeometry(n, n, dict->shape);

  if (config.mode == SolverMode::Art) {
    const auto t0 = std::chrono::steady_clock::now();
    image = solve_art(*A, b, GrayImage(n, n), config.art_sweeps, config.art_relax);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.set("sweeps", static_cast<std::int64_t>(config.art_sweeps));
    report.set("relax", config.art_relax);
  } else {
    const ReconProblem base(A, b, dict->artifact.data, *blocks);
    const double mu = resolve_mu(config, base.blocks(), config.mu_over_q);
    const ReconProblem problem = base.with_weights(mu, config.delta);
    const ReconResult res = run_dictionary_solver(config, problem, config.gamma);
    image = res.image;
    seconds = res.report.wall_seconds;
    report.set("mu", mu);
    report.set("mu_over_q", mu / static_cast<double>(problem.blocks()));
    report.set("mu_max", mu_max(problem));
    report.set("delta", config.delta);
    if (config.mode == SolverMode::L1Ball) report.set("gamma", config.gamma);
    set_solver_report(report, res.report);
    if (!res.report.converged) log << "warning: solver stopped at the iteration cap\n";
  }

  if (exact) {
    const double re = reconstruction_error(image, *exact);
    report.set("re", re);
    log << "RE " << format_double(re) << "\n";
    if (blocks) {
      const Eigen::VectorXd errs = block_approximation_errors(dict->artifact.data, *exact, *blocks);
      report.set("mae", errs.mean());
      log << "MAE " << format_double(errs.mean()) << "\n";
      write_block_csv(config.output("blocks.csv"), errs, *blocks);
    }
  }

  ensure_output_dir(config);
  const fs::path path = config.output("reconstruction.dmat");
  io::KeyValues meta = report;
  meta.set("format", "reconstruction");
  write_artifact(path, image.pixels(), meta, config);
  io::write_pgm(config.output("reconstruction.pgm"), image);
  echo_config(report, config);
  io::write_text(config.output("report.txt"), report.to_string());
  log << "solve time " << format_double(std::round(seconds * 1000.0) / 1000.0) << " s\nwrote " << path.string()
      << "\n";
}

void cmd_evaluate(const ExperimentConfig& config, std::ostream& log) {
  const Artifact recon = load_artifact(config.reconstruction_path(), "reconstruction");
  const GrayImage exact = read_exact(config);
  if (recon.data.rows() != exact.rows() || recon.data.cols() != exact.cols()) {
    throw ConsistencyError("reconstruction and exact image differ in size");
  }
  const GrayImage image(recon.data);
  io::KeyValues report;
  report.set("reconstruction_hash", recon.hash);
  report.set("exact_hash", io::file_hash(config.exact_image));
  const double re = reconstruction_error(image, exact);
  report.set("re", re);
  log << "RE " << format_double(re) << "\n";
  ensure_output_dir(config);
  const fs::path dpath = config.dictionary_path();
  if (fs::exists(dpath)) {
    const LoadedDictionary dict = load_dictionary(dpath);
    const PatchGeometry blocks(exact.rows(), exact.cols(), dict.shape);
    const Eigen::VectorXd errs = block_approximation_errors(dict.artifact.data, exact, blocks);
    report.set("dictionary_hash", dict.artifact.hash);
    report.set("mae", errs.mean());
    log << "MAE " << format_double(errs.mean()) << "\n";
    write_block_csv(config.output("blocks.csv"), errs, blocks);
  }
  echo_config(report, config);
  io::write_text(config.output("evaluation.txt"), report.to_string());
}

namespace {

struct SweepCell {
  Index patch = 0;
  Index atoms = 0;
  double lambda = 0.0;
  double mu_over_q = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  std::size_t dictionary = 0;  // index into the learned dictionaries
};

struct SweepRow {
  double re = std::numeric_limits<double>::quiet_NaN();
  double mae = std::numeric_limits<double>::quiet_NaN();
  double psi = std::numeric_limits<double>::quiet_NaN();
  double l1 = std::numeric_limits<double>::quiet_NaN();
  Index support = -1;
  bool converged = false;
  std::string failure;
};

/// Runs task(i) for i in [0, count) on up to `threads` workers.
template <class Task>
void parallel_for(std::size_t count, Index threads, Task task) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

template <class T>
std::vector<T> or_single(const std::vector<T>& grid, T value) {
  return grid.empty() ? std::vector<T>{value} : grid;
}

}  // namespace

void cmd_sweep(const ExperimentConfig& config, std::ostream& log) {
  if (config.mode == SolverMode::Art) throw ConfigError("sweep needs a dictionary solver mode");
  if (config.patch_rows != config.patch_cols && !config.sweep_patch.empty()) {
    throw ConfigError("sweep_patch sweeps square patches only");
  }
  if (config.training_image.empty()) throw ConfigError("training_image is required");
  const GrayImage exact = read_exact(config);
  const GrayImage training = io::read_pgm(config.training_image);

  const auto patches = or_single(config.sweep_patch, config.patch_rows);
  const auto atoms = or_single(config.sweep_atoms, config.atoms);
  const auto lambdas = or_single(config.sweep_lambda, config.learn.lambda);
  const auto mus = or_single(config.sweep_mu_over_q, config.mu_over_q);
  const auto deltas = or_single(config.sweep_delta, config.delta);
  const auto gammas = or_single(config.sweep_gamma, config.gamma);

  // dictionaries first: one per (patch, atoms, lambda)
  std::vector<std::tuple<Index, Index, double>> dict_keys;
  for (Index P : patches) {
    for (Index s : atoms) {
      for (double lam : lambdas) dict_keys.emplace_back(P, s, lam);
    }
  }
  std::vector<SweepCell> cells;
  for (std::size_t k = 0; k < dict_keys.size(); ++k) {
    const auto [P, s, lam] = dict_keys[k];
    for (double mq : mus) {
      for (double dl : deltas) {
        for (double gm : gammas) cells.push_back({P, s, lam, mq, dl, gm, k});
      }
    }
  }
  log << "sweep: " << dict_keys.size() << " dictionaries, " << cells.size() << " cells\n";

  const ScanGeometry geometry = config_geometry(config, exact);
  auto A = std::make_shared<const SparseMatrix>(assemble_matrix(geometry));
  const Sinogram sino = simulate(*A, exact, config.rel_noise, config.noise_seed);

  std::vector<std::optional<Dictionary>> dicts(dict_keys.size());
  std::vector<double> maes(dict_keys.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> dict_failures(dict_keys.size());
  parallel_for(dict_keys.size(), config.threads, [&](std::size_t k) {
    const auto [P, s, lam] = dict_keys[k];
    try {
      std::optional<Index> limit;
      if (config.patch_limit > 0) limit = config.patch_limit;
      const PatchMatrix Y = extract_patches(training, {P, P}, config.patch_stride, limit, config.patch_seed);
      LearnConfig lc = config.learn;
      lc.lambda = lam;
      dicts[k] = learn(Y, s, lc);
      maes[k] = mean_approximation_error(dicts[k]->atoms, exact, PatchGeometry(exact.rows(), exact.cols(), {P, P}));
    } catch (const Error& e) {
      dict_failures[k] = e.what();
    }
  });

  std::vector<SweepRow> rows(cells.size());
  parallel_for(cells.size(), config.threads, [&](std::size_t i) {
    const SweepCell& cell = cells[i];
    SweepRow& row = rows[i];
    if (!dicts[cell.dictionary]) {
      row.failure = dict_failures[cell.dictionary];
      return;
    }
    row.mae = maes[cell.dictionary];
    try {
      const ReconProblem base(A, sino.data, dicts[cell.dictionary]->atoms,
                              PatchGeometry(exact.rows(), exact.cols(), {cell.patch, cell.patch}));
      const ReconProblem problem = base.with_weights(resolve_mu(config, base.blocks(), cell.mu_over_q), cell.delta);
      const ReconResult res = run_dictionary_solver(config, problem, cell.gamma);
      row.re = reconstruction_error(res.image, exact);
      row.psi = res.report.psi;
      row.l1 = res.report.l1;
      row.support = res.report.support;
      row.converged = res.report.converged;
    } catch (const Error& e) {
      row.failure = e.what();
    }
  });

  std::ostringstream csv, dat;
  csv << "patch,atoms,lambda,mu_over_q,delta,gamma,re,mae,psi,l1,support,converged\n";
  dat << "# patch atoms lambda mu_over_q delta gamma re mae psi l1 support\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& c = cells[i];
    const SweepRow& r = rows[i];
    if (!r.failure.empty()) log << "cell " << i << " failed: " << r.failure << "\n";
    const std::string fields[] = {std::to_string(c.patch), std::to_string(c.atoms), format_double(c.lambda),
                                  format_double(c.mu_over_q), format_double(c.delta), format_double(c.gamma),
                                  format_double(r.re), format_double(r.mae), format_double(r.psi),
                                  format_double(r.l1), std::to_string(r.support)};
    for (std::size_t f = 0; f < std::size(fields); ++f) {
      csv << fields[f] << ',';
      dat << (f ? " " : "") << fields[f];
    }
    csv << (r.converged ? "true" : "false") << '\n';
    dat << '\n';
    // blank line between scan lines of the innermost grid axis, as gnuplot expects
    const std::size_t inner = gammas.size() > 1 ? gammas.size()
                              : deltas.size() > 1 ? deltas.size()
                              : mus.size() > 1 ? mus.size()
                                               : 1;
    if (inner > 1 && (i + 1) % inner == 0 && i + 1 < cells.size()) dat << '\n';
  }
  ensure_output_dir(config);
  io::write_text(config.output("sweep.csv"), csv.str());
  io::write_text(config.output("sweep.dat"), dat.str());
  log << "wrote " << config.output("sweep.csv").string() << "\n";
}

}  // namespace dictct::app
