#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "cardioinfer/csv.hpp"
#include "cardioinfer/experiment.hpp"
#include "cardioinfer/plots.hpp"

namespace fs = std::filesystem;

namespace cardioinfer {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kTruthTag = 0x747275;  // ground-truth draw
constexpr std::uint64_t kObsTag = 0x6f6273;    // observation noise

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

/// Collects artifacts for one run directory and finishes with the
/// manifest (config hash, seed, per-artifact content hash). An empty
/// directory disables writing so library callers pay nothing.
class RunWriter {
 public:
  explicit RunWriter(std::string dir) : dir_(std::move(dir)) {}

  bool active() const { return !dir_.empty(); }

  void write(const std::string& name, const std::string& content) {
    write_raw(name, content);
    if (active()) artifacts_[name] = fnv1a64_hex(content);
  }

  /// Written but left out of the manifest (wall-clock timing and the
  /// manifest itself vary run to run).
  void write_unrecorded(const std::string& name, const std::string& content) {
    write_raw(name, content);
  }

  void write_manifest(const RunConfig& cfg) {
    if (!active()) return;
    ordered_json m;
    m["config_hash"] = fnv1a64_hex(cfg.canonical_json());
    m["seed"] = cfg.seed;
    ordered_json a = ordered_json::object();
    for (const auto& [name, hash] : artifacts_) a[name] = hash;
    m["artifacts"] = a;
    write_unrecorded("manifest.json", m.dump(2) + "\n");
  }

 private:
  void write_raw(const std::string& name, const std::string& content) {
    if (!active()) return;
    fs::create_directories(dir_);
    const fs::path path = fs::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  }

  std::string dir_;
  std::map<std::string, std::string> artifacts_;  // sorted by name
};

Eigen::VectorXd sample_prior_raw(const PriorSpec& prior, Rng* rng) {
  const int p = static_cast<int>(prior.mean.size());
  Eigen::VectorXd raw(p);
  for (int d = 0; d < p; ++d) {
    double v = prior.mean[d] + prior.std[d] * rng->gaussian();
    for (int tries = 0; (v < 0.0 || v > 1.0) && tries < 100; ++tries) {
      v = prior.mean[d] + prior.std[d] * rng->gaussian();
    }
    raw[d] = std::clamp(v, 0.0, 1.0);
  }
  return raw;
}

void add_observation_noise(EcgTrace* trace, double std, std::uint64_t seed) {
  Rng rng(seed);
  for (int l = 0; l < trace->leads.rows(); ++l) {
    for (int t = 0; t < trace->leads.cols(); ++t) {
      trace->leads(l, t) += std * rng.gaussian();
    }
  }
}

/// Everything the verbs share: mesh, embedding, parameter space, lead
/// geometry and the simulated (optionally noisy) observation.
struct RunContext {
  HeartMesh mesh;
  ManifoldEmbedding emb;
  ParameterSpace space;
  LeadConfig lead;
  PriorSpec prior;
  Eigen::VectorXd raw_star;
  Eigen::VectorXd theta_star;
  EcgTrace observed;
  double noise_std = 0.0;
};

RunContext make_context(const RunConfig& cfg, bool with_observation) {
  RunContext ctx;
  ctx.mesh = make_mesh(cfg);
  ctx.lead = make_lead_config(cfg);
  ctx.emb = ManifoldEmbedding::build(ctx.mesh, cfg.isomap_k);
  ctx.space = ParameterSpace::for_embedding(ctx.emb, cfg.n_stimuli);
  ctx.space.endo_reference = cfg.endo_reference;
  ctx.space.aniso_reference = cfg.aniso_reference;
  ctx.space.validate();
  ctx.prior = PriorSpec::unit_box(ctx.space.dim());
  if (!with_observation) return ctx;

  Rng rng(derive_seed(cfg.seed, kTruthTag));
  ctx.raw_star = sample_prior_raw(ctx.prior, &rng);
  ctx.theta_star = ordered_transform(ctx.raw_star, ctx.space);
  ctx.observed =
      simulate(ctx.theta_star, ctx.mesh, ctx.emb, ctx.space, ctx.lead);
  if (cfg.observation_noise_std > 0.0) {
    add_observation_noise(&ctx.observed, cfg.observation_noise_std,
                          derive_seed(cfg.seed, kObsTag));
  }
  ctx.noise_std = cfg.noise_std > 0.0
                      ? cfg.noise_std
                      : 0.05 * ecg_peak_to_peak(ctx.observed);
  if (!(ctx.noise_std > 0.0)) ctx.noise_std = 1e-9;
  return ctx;
}

RawSimulator make_raw_simulator(const RunContext& ctx) {
  return [&ctx](const Eigen::VectorXd& raw) {
    return simulate(ordered_transform(raw, ctx.space), ctx.mesh, ctx.emb,
                    ctx.space, ctx.lead);
  };
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

std::string posterior_csv(const VarianceStageResult& stage2,
                          const PriorSpec& prior,
                          const Eigen::VectorXd& theta_fit) {
  CsvTable t;
  t.header = {"dim", "mu", "sigma", "prior_mean", "prior_std", "theta"};
  for (int d = 0; d < stage2.posterior.mu.size(); ++d) {
    t.rows.push_back({static_cast<double>(d), stage2.posterior.mu[d],
                      stage2.posterior.sigma[d], prior.mean[d], prior.std[d],
                      theta_fit[d]});
  }
  return format_csv(t);
}

std::string posterior_txt(const VarianceStageResult& stage2,
                          const Eigen::VectorXd& theta_fit, double noise_std,
                          double final_mse) {
  std::ostringstream out;
  out << "noise_std " << format_double("%.9g", noise_std) << "\n";
  out << "elbo " << format_double("%.9g", -stage2.trace.best_value) << "\n";
  out << "final_mse " << format_double("%.9g", final_mse) << "\n";
  for (int d = 0; d < stage2.posterior.mu.size(); ++d) {
    out << "dim " << d << "  mu " << format_double("%.6f", stage2.posterior.mu[d])
        << "  sigma " << format_double("%.6f", stage2.posterior.sigma[d])
        << "  theta " << format_double("%.6g", theta_fit[d]) << "\n";
  }
  return out.str();
}

}  // namespace

RecoveryReport run_recovery(const RunConfig& cfg) {
  if (!cfg.has_seed) throw ConfigError("run seed is required");
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx = make_context(cfg, /*with_observation=*/true);
  const RawSimulator sim = make_raw_simulator(ctx);

  const MeanStageResult stage1 = fit_mean_stage(ctx.observed, sim, ctx.space,
                                                cfg.stage1);
  const VarianceStageResult stage2 =
      fit_variance_stage(stage1.mu, ctx.observed, ctx.prior, sim, ctx.space,
                         cfg.stage2, cfg.n_mc, ctx.noise_std);

  const Eigen::VectorXd theta_fit = ordered_transform(stage1.mu, ctx.space);
  const EcgTrace fitted =
      simulate(theta_fit, ctx.mesh, ctx.emb, ctx.space, ctx.lead);
  const Eigen::VectorXd raw_base =
      Eigen::VectorXd::Constant(ctx.space.dim(), 0.5);
  const Eigen::VectorXd theta_base = ordered_transform(raw_base, ctx.space);
  const EcgTrace baseline =
      simulate(theta_base, ctx.mesh, ctx.emb, ctx.space, ctx.lead);

  RecoveryReport rep;
  rep.prior_mean_mse = ecg_mse(ctx.observed, baseline);
  rep.final_mse = ecg_mse(ctx.observed, fitted);
  rep.theta_star = ctx.theta_star;
  rep.theta_fit = theta_fit;
  rep.abs_error = (theta_fit - ctx.theta_star).cwiseAbs();
  rep.mu_raw = stage1.mu;
  rep.posterior = stage2.posterior;
  rep.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  RunWriter writer(cfg.out_dir);
  if (writer.active()) {
    writer.write("embedding.csv", embedding_csv(ctx.emb));
    writer.write("observed_ecg.csv", ecg_csv(ctx.observed));
    writer.write("baseline_ecg.csv", ecg_csv(baseline));
    writer.write("fitted_ecg.csv", ecg_csv(fitted));
    writer.write("stage1_trace.csv", stage1.trace.csv());
    writer.write("stage2_trace.csv", stage2.trace.csv());
    writer.write("posterior.csv",
                 posterior_csv(stage2, ctx.prior, theta_fit));
    writer.write("posterior.txt", posterior_txt(stage2, theta_fit,
                                                ctx.noise_std, rep.final_mse));

    ordered_json rj;
    rj["seed"] = cfg.seed;
    rj["noise_std"] = ctx.noise_std;
    rj["prior_mean_mse"] = rep.prior_mean_mse;
    rj["final_mse"] = rep.final_mse;
    rj["mse_ratio"] = rep.prior_mean_mse > 0.0
                          ? rep.final_mse / rep.prior_mean_mse
                          : 0.0;
    rj["theta_star"] = to_std(rep.theta_star);
    rj["theta_fit"] = to_std(rep.theta_fit);
    rj["abs_error"] = to_std(rep.abs_error);
    rj["posterior_sigma"] = to_std(rep.posterior.sigma);
    writer.write("report.json", rj.dump(2) + "\n");

    writer.write_manifest(cfg);
    writer.write_unrecorded(
        "timing.txt",
        "wall_clock_s " + format_double("%.3f", rep.wall_clock_s) + "\n");
  }
  return rep;
}

namespace {

/// Constrained Cartesian point for the comparison arm: the five velocity
/// dimensions mirror ordered_transform, each stimulus contributes its
/// (x, y, z) with the x sequence stick-ordered over the endocardial
/// bounding box so the site labeling is identifiable.
Eigen::VectorXd cartesian_transform(const Eigen::VectorXd& raw,
                                    const ParameterSpace& space,
                                    const Eigen::Vector3d& box_lo,
                                    const Eigen::Vector3d& box_hi) {
  const int m = space.n_stimuli;
  Eigen::VectorXd theta(5 + 3 * m);
  for (int d = 0; d < 2; ++d) {
    const auto [lo, hi] = space.bounds(d);
    theta[d] = lo + raw[d] * (hi - lo);
  }
  const auto [alo, ahi] = space.bounds(2);
  double upper = ahi;
  for (int d = 2; d < 5; ++d) {
    theta[d] = alo + raw[d] * (upper - alo);
    upper = theta[d];
  }
  double q = 0.0;
  for (int s = 0; s < m; ++s) {
    q += (1.0 - q) * raw[5 + 3 * s];
    theta[5 + 3 * s] = box_lo[0] + q * (box_hi[0] - box_lo[0]);
    for (int axis = 1; axis < 3; ++axis) {
      theta[5 + 3 * s + axis] =
          box_lo[axis] +
          raw[5 + 3 * s + axis] * (box_hi[axis] - box_lo[axis]);
    }
  }
  return theta;
}

}  // namespace

ComparisonResult run_manifold_comparison(const RunConfig& cfg) {
  if (!cfg.has_seed) throw ConfigError("run seed is required");
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx = make_context(cfg, /*with_observation=*/true);
  const RawSimulator sim = make_raw_simulator(ctx);

  ComparisonResult result;
  result.manifold = fit_mean_stage(ctx.observed, sim, ctx.space,
                                   cfg.stage1).trace;

  const std::vector<int> endo_ids = ctx.mesh.endocardial_vertices();
  std::vector<Eigen::Vector3d> endo_pts;
  endo_pts.reserve(endo_ids.size());
  Eigen::Vector3d box_lo = ctx.mesh.vertices[endo_ids[0]];
  Eigen::Vector3d box_hi = box_lo;
  for (int v : endo_ids) {
    endo_pts.push_back(ctx.mesh.vertices[v]);
    box_lo = box_lo.cwiseMin(ctx.mesh.vertices[v]);
    box_hi = box_hi.cwiseMax(ctx.mesh.vertices[v]);
  }
  const KdTree<3> endo_index(endo_pts);

  const auto cart = [&](const Eigen::VectorXd& raw) {
    return cartesian_transform(raw, ctx.space, box_lo, box_hi);
  };
  const auto objective = [&](const Eigen::VectorXd& raw) {
    const Eigen::VectorXd theta = cart(raw);
    Conductivities c;
    c.endo = theta.head<2>();
    c.aniso = theta.segment<3>(2);
    std::vector<int> stimuli(ctx.space.n_stimuli);
    for (int s = 0; s < ctx.space.n_stimuli; ++s) {
      const Eigen::Vector3d site = theta.segment<3>(5 + 3 * s);
      stimuli[s] = endo_ids[endo_index.nearest(site)];
    }
    const ConductionGraph graph = build_conduction_graph(ctx.mesh, c);
    const ActivationMap act = activation_times(graph, stimuli);
    return ecg_mse(ctx.observed, synthesize_ecg(ctx.mesh, act, ctx.lead));
  };

  const int pc = 5 + 3 * ctx.space.n_stimuli;
  Eigen::MatrixX2d unit(pc, 2);
  unit.col(0).setZero();
  unit.col(1).setOnes();
  BoConfig cart_cfg = cfg.stage1;  // same budget, same seed
  result.cartesian = bo_minimize_box(objective, unit, cart_cfg);
  for (BoRecord& rec : result.cartesian.iterations) rec.theta = cart(rec.raw);
  result.cartesian.best_theta = cart(result.cartesian.best_raw);

  RunWriter writer(cfg.out_dir);
  if (writer.active()) {
    writer.write("embedding.csv", embedding_csv(ctx.emb));
    writer.write("trace_manifold.csv", result.manifold.csv());
    writer.write("trace_cartesian.csv", result.cartesian.csv());

    ordered_json rj;
    rj["seed"] = cfg.seed;
    rj["budget"] = cfg.stage1.budget;
    rj["manifold_best_mse"] = result.manifold.best_value;
    rj["cartesian_best_mse"] = result.cartesian.best_value;
    writer.write("report.json", rj.dump(2) + "\n");

    writer.write_manifest(cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    writer.write_unrecorded(
        "timing.txt", "wall_clock_s " + format_double("%.3f", wall) + "\n");
  }
  return result;
}

void write_embedding(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
  RunContext ctx = make_context(cfg, /*with_observation=*/false);
  RunWriter writer(cfg.out_dir);
  writer.write("embedding.csv", embedding_csv(ctx.emb));
  const ReconstructionStats stats = reconstruction_error(ctx.emb, ctx.mesh);
  std::ostringstream txt;
  txt << "vertices " << ctx.emb.size() << "\n"
      << "mean_reconstruction_error_mm "
      << format_double("%.9g", stats.mean_error_mm) << "\n"
      << "identity_fraction " << format_double("%.9g", stats.identity_fraction)
      << "\n";
  writer.write("embedding_stats.txt", txt.str());
  writer.write_manifest(cfg);
}

void write_simulation(const RunConfig& cfg,
                      const std::optional<Eigen::VectorXd>& theta) {
  if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
  RunContext ctx = make_context(cfg, /*with_observation=*/false);
  Eigen::VectorXd point;
  if (theta.has_value()) {
    if (theta->size() != ctx.space.dim()) {
      throw ConfigError("theta has " + std::to_string(theta->size()) +
                        " components, expected " +
                        std::to_string(ctx.space.dim()));
    }
    point = *theta;
  } else {
    point = ordered_transform(
        Eigen::VectorXd::Constant(ctx.space.dim(), 0.5), ctx.space);
  }
  const EcgTrace trace =
      simulate(point, ctx.mesh, ctx.emb, ctx.space, ctx.lead);
  RunWriter writer(cfg.out_dir);
  writer.write("simulated_ecg.csv", ecg_csv(trace));
  writer.write_manifest(cfg);
}

namespace {

std::string slurp_plot_input(const fs::path& dir, const std::string& name) {
  const fs::path path = dir / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("plot input '" + name + "' is missing in '" +
                      dir.string() + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  if (text.str().empty()) {
    throw ConfigError("plot input '" + name + "' is empty");
  }
  return text.str();
}

TraceSeries load_trace_series(const fs::path& dir, const std::string& name,
                              const std::string& label) {
  const CsvTable table = parse_csv(slurp_plot_input(dir, name));
  if (table.n_rows() == 0) {
    throw ConfigError("plot input '" + name + "' has no data rows");
  }
  TraceSeries series;
  series.label = label;
  const int col = table.column("best_so_far");
  series.best_so_far.reserve(table.rows.size());
  for (const auto& row : table.rows) series.best_so_far.push_back(row[col]);
  return series;
}

}  // namespace

void emit_plots(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const bool comparison = fs::exists(dir / "trace_manifold.csv");

  std::vector<TraceSeries> series;
  if (comparison) {
    series.push_back(load_trace_series(dir, "trace_manifold.csv", "manifold"));
    series.push_back(
        load_trace_series(dir, "trace_cartesian.csv", "cartesian"));
  } else {
    series.push_back(load_trace_series(dir, "stage1_trace.csv", "stage 1"));
  }

  const CsvTable emb = parse_csv(slurp_plot_input(dir, "embedding.csv"));
  if (emb.n_rows() == 0) {
    throw ConfigError("plot input 'embedding.csv' has no data rows");
  }
  std::vector<double> z1, z2;
  const int c1 = emb.column("z1");
  const int c2 = emb.column("z2");
  for (const auto& row : emb.rows) {
    z1.push_back(row[c1]);
    z2.push_back(row[c2]);
  }

  const auto write_svg = [&](const std::string& name,
                             const std::string& content) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  };

  write_svg("cost_curve.svg", cost_curve_svg(series));
  write_svg("embedding.svg", embedding_scatter_svg(z1, z2));
  if (!comparison) {
    const EcgTrace observed =
        ecg_from_csv(slurp_plot_input(dir, "observed_ecg.csv"));
    const EcgTrace baseline =
        ecg_from_csv(slurp_plot_input(dir, "baseline_ecg.csv"));
    const EcgTrace fitted =
        ecg_from_csv(slurp_plot_input(dir, "fitted_ecg.csv"));
    write_svg("ecg_overlay.svg", ecg_overlay_svg(observed, baseline, fitted));
  }
}

}  // namespace cardioinfer
