#include "config.hpp"

#include <cstdlib>
#include <set>

#include "dictct/errors.hpp"

namespace dictct::app {

std::string_view to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::Main: return "main";
    case SolverMode::Nnls: return "nnls";
    case SolverMode::L1Ball: return "l1ball";
    case SolverMode::Art: return "art";
  }
  return "main";
}

SolverMode parse_mode(std::string_view text) {
  if (text == "main") return SolverMode::Main;
  if (text == "nnls") return SolverMode::Nnls;
  if (text == "l1ball") return SolverMode::L1Ball;
  if (text == "art") return SolverMode::Art;
  throw ConfigError("mode must be one of main, nnls, l1ball, art; got '" + std::string(text) + "'");
}

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = {
      {"training_image", "", "PGM image patches are learned from"},
      {"exact_image", "", "PGM ground truth for simulation and evaluation"},
      {"output_dir", "out", "directory for every artifact"},
      {"dictionary", "", "dictionary file (default <output_dir>/dictionary.dmat)"},
      {"sinogram", "", "sinogram file (default <output_dir>/sinogram.dmat)"},
      {"reconstruction", "", "reconstruction file to evaluate (default <output_dir>/reconstruction.dmat)"},
      {"patch_rows", "8", "patch height P"},
      {"patch_cols", "8", "patch width Q"},
      {"atoms", "200", "dictionary size s"},
      {"patch_stride", "1", "step between training windows"},
      {"patch_limit", "10000", "random subset of training windows, 0 for all"},
      {"patch_seed", "0", "seed for patch subsampling and atom initialisation"},
      {"constraint", "ball2", "dictionary set: box or ball2"},
      {"lambda", "3.16", "sparsity weight in (0, p]"},
      {"rho", "1", "ADMM penalty"},
      {"epsilon", "1e-4", "KKT stopping tolerance"},
      {"learn_max_iterations", "2000", "ADMM iteration cap"},
      {"projections", "20", "number of projection angles N_p"},
      {"angle_start", "0", "first angle in degrees"},
      {"angle_end", "180", "end of the angle range in degrees (exclusive)"},
      {"rel_noise", "0.01", "relative noise level ||e|| / ||A x||"},
      {"noise_seed", "0", "noise seed"},
      {"export_system_matrix", "false", "also write system_matrix.smat"},
      {"mode", "main", "solver: main, nnls, l1ball or art"},
      {"mu_over_q", "0.022", "l1 weight per block"},
      {"mu", "", "absolute l1 weight; overrides mu_over_q"},
      {"delta", "0", "block boundary weight"},
      {"gamma", "0", "l1-ball radius (l1ball mode)"},
      {"art_sweeps", "10", "ART sweeps"},
      {"art_relax", "1", "ART relaxation in (0, 2)"},
      {"tolerance", "1e-6", "solver relative tolerance"},
      {"max_iterations", "5000", "solver iteration cap"},
      {"phantom_rows", "128", "phantom height"},
      {"phantom_cols", "128", "phantom width"},
      {"phantom_seed", "0", "phantom seed"},
      {"phantom_grains", "4", "phantom grains per 1000 pixels"},
      {"sweep_lambda", "", "comma-separated lambda grid"},
      {"sweep_mu_over_q", "", "comma-separated mu/q grid"},
      {"sweep_delta", "", "comma-separated delta grid"},
      {"sweep_gamma", "", "comma-separated gamma grid"},
      {"sweep_atoms", "", "comma-separated dictionary sizes"},
      {"sweep_patch", "", "comma-separated square patch sizes"},
      {"threads", "1", "concurrent sweep cells"},
  };
  return schema;
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (ch != ' ' && ch != '\t') {
      item.push_back(ch);
    }
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const io::KeyValues& kv) : kv_(kv) {}

  std::string str(const char* key) const { return kv_.require(key); }
  double real(const char* key) const { return io::parse_double(str(key), key); }
  Index integer(const char* key, Index min) const {
    const auto v = io::parse_int(str(key), key);
    if (v < min) throw ConfigError(std::string(key) + " must be >= " + std::to_string(min));
    return static_cast<Index>(v);
  }
  std::uint64_t seed(const char* key) const { return static_cast<std::uint64_t>(integer(key, 0)); }
  bool flag(const char* key) const {
    const std::string v = str(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(std::string(key) + ": expected true or false, got '" + v + "'");
  }
  std::vector<double> reals(const char* key) const {
    std::vector<double> out;
    for (const auto& item : split_list(str(key))) out.push_back(io::parse_double(item, key));
    return out;
  }
  std::vector<Index> integers(const char* key) const {
    std::vector<Index> out;
    for (const auto& item : split_list(str(key))) {
      const auto v = io::parse_int(item, key);
      if (v < 1) throw ConfigError(std::string(key) + " entries must be >= 1");
      out.push_back(static_cast<Index>(v));
    }
    return out;
  }

 private:
  const io::KeyValues& kv_;
};

void require_positive(double v, const char* key) {
  if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be > 0");
}
void require_nonnegative(double v, const char* key) {
  if (!(v >= 0.0)) throw ConfigError(std::string(key) + " must be >= 0");
}

void merge(io::KeyValues& into, const io::KeyValues& from, const std::set<std::string>& known,
           const std::string& origin) {
  for (const auto& [key, value] : from.entries()) {
    if (!known.count(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
    into.set(key, value);
  }
}

}  // namespace

ExperimentConfig load_config(const std::optional<fs::path>& file, const std::map<std::string, std::string>& overrides) {
  std::set<std::string> known;
  io::KeyValues merged;
  for (const auto& spec : config_schema()) {
    known.insert(spec.name);
    merged.set(spec.name, spec.default_value);
  }
  if (file) {
    std::string text;
    try {
      text = io::read_text(*file);
    } catch (const IoError&) {
      throw ConfigError("cannot read config file " + file->string());
    }
    merge(merged, io::KeyValues::parse(text, file->string()), known, file->string());
  }
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    merged.set("output_dir", std::string(env));
  }
  io::KeyValues cli;
  for (const auto& [key, value] : overrides) cli.set(key, value);
  merge(merged, cli, known, "command line");
  return parse_config(merged);
}

ExperimentConfig parse_config(const io::KeyValues& merged) {
  const Reader r(merged);
  ExperimentConfig c;
  c.training_image = r.str("training_image");
  c.exact_image = r.str("exact_image");
  c.output_dir = r.str("output_dir");
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  c.dictionary = r.str("dictionary");
  c.sinogram = r.str("sinogram");
  c.reconstruction = r.str("reconstruction");

  c.patch_rows = r.integer("patch_rows", 1);
  c.patch_cols = r.integer("patch_cols", 1);
  c.atoms = r.integer("atoms", 1);
  c.patch_stride = r.integer("patch_stride", 1);
  c.patch_limit = r.integer("patch_limit", 0);
  c.patch_seed = r.seed("patch_seed");
  c.learn.constraint = parse_constraint(r.str("constraint"));
  c.learn.lambda = r.real("lambda");
  c.learn.rho = r.real("rho");
  c.learn.epsilon = r.real("epsilon");
  c.learn.max_iterations = r.integer("learn_max_iterations", 1);
  c.learn.seed = c.patch_seed;
  require_positive(c.learn.lambda, "lambda");
  require_positive(c.learn.rho, "rho");
  require_positive(c.learn.epsilon, "epsilon");

  c.projections = r.integer("projections", 1);
  c.angle_start = r.real("angle_start");
  c.angle_end = r.real("angle_end");
  c.rel_noise = r.real("rel_noise");
  require_nonnegative(c.rel_noise, "rel_noise");
  c.noise_seed = r.seed("noise_seed");
  c.export_system_matrix = r.flag("export_system_matrix");

  c.mode = parse_mode(r.str("mode"));
  c.mu_over_q = r.real("mu_over_q");
  require_nonnegative(c.mu_over_q, "mu_over_q");
  if (const std::string mu = r.str("mu"); !mu.empty()) {
    c.mu = io::parse_double(mu, "mu");
    require_nonnegative(*c.mu, "mu");
  }
  c.delta = r.real("delta");
  require_nonnegative(c.delta, "delta");
  c.gamma = r.real("gamma");
  require_nonnegative(c.gamma, "gamma");
  c.art_sweeps = r.integer("art_sweeps", 1);
  c.art_relax = r.real("art_relax");
  if (!(c.art_relax > 0.0 && c.art_relax < 2.0)) throw ConfigError("art_relax must be in (0, 2)");
  c.solver.tolerance = r.real("tolerance");
  require_positive(c.solver.tolerance, "tolerance");
  c.solver.max_iterations = r.integer("max_iterations", 1);

  c.phantom_rows = r.integer("phantom_rows", 1);
  c.phantom_cols = r.integer("phantom_cols", 1);
  c.phantom_seed = r.seed("phantom_seed");
  c.phantom_grains = r.real("phantom_grains");
  require_nonnegative(c.phantom_grains, "phantom_grains");

  c.sweep_lambda = r.reals("sweep_lambda");
  c.sweep_mu_over_q = r.reals("sweep_mu_over_q");
  c.sweep_delta = r.reals("sweep_delta");
  c.sweep_gamma = r.reals("sweep_gamma");
  c.sweep_atoms = r.integers("sweep_atoms");
  c.sweep_patch = r.integers("sweep_patch");
  for (double v : c.sweep_lambda) require_positive(v, "sweep_lambda");
  for (double v : c.sweep_mu_over_q) require_nonnegative(v, "sweep_mu_over_q");
  for (double v : c.sweep_delta) require_nonnegative(v, "sweep_delta");
  for (double v : c.sweep_gamma) require_nonnegative(v, "sweep_gamma");
  c.threads = r.integer("threads", 1);

  for (const auto& spec : config_schema()) c.effective.set(spec.name, merged.require(spec.name));
  return c;
}

}  // namespace dictct::app
