// Command-line pipeline for hemispheroidal parameterization and harmonic
// decomposition of simply connected open meshes.
//
// Subcommands: run, param, decompose, reconstruct, metrics, optimize-c,
// optimize-weights. Each accepts --config FILE with key=value lines; command
// line flags override file values. See README for artifact formats.

#include "hemiparam/hemiparam.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hemiparam;

namespace {

struct RunConfig {
  std::string input;
  std::string method = "area";
  double alpha = 1.0 / 3.0, beta = 1.0 / 3.0, gamma = 1.0 / 3.0;
  double c_value = 0;  // 0 = derive from the registered bounding box
  double eps_eta = kPi / 160.0;
  int n_max = 40;
  int samples = 20000;
  std::string out_dir = ".";
  unsigned long long seed = 0;
  int jobs = 1;
  bool weld = false;
  bool absolute_distance = false;

  json to_json() const {
    return json{{"input", input},       {"method", method},
                {"alpha", alpha},       {"beta", beta},
                {"gamma", gamma},       {"c_value", c_value},
                {"eps_eta", eps_eta},   {"n_max", n_max},
                {"samples", samples},   {"out_dir", out_dir},
                {"seed", seed},         {"jobs", jobs},
                {"weld", weld},         {"absolute_distance", absolute_distance}};
  }
};

class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::vector<std::string> g_warnings;

void install_warning_sink() {
  set_warning_handler([](const std::string& w) {
    g_warnings.push_back(w);
    std::cerr << "warning: " << w << "\n";
  });
}

struct Timings {
  std::vector<std::pair<std::string, double>> entries;
  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();

  void lap(const std::string& name) {
    auto now = std::chrono::steady_clock::now();
    entries.emplace_back(name, std::chrono::duration<double>(now - mark).count());
    mark = now;
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : entries) j[k] = v;
    return j;
  }
};

// Artifacts are written under .partial names and renamed once the whole run
// succeeds, so an aborted run leaves only .partial files behind.
class ArtifactSet {
 public:
  explicit ArtifactSet(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  fs::path partial(const std::string& name) {
    names_.push_back(name);
    return dir_ / (name + ".partial");
  }

  std::vector<std::string> finalize() {
    std::vector<std::string> out;
    for (const auto& n : names_) {
      fs::rename(dir_ / (n + ".partial"), dir_ / n);
      out.push_back((dir_ / n).string());
    }
    return out;
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open file for writing: " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw MeshError("write failure: " + path.string());
}

std::string input_stem(const std::string& input) {
  return fs::path(input).stem().string();
}

TriMesh load_input(const RunConfig& cfg) {
  TriMesh mesh = load_mesh(cfg.input);
  if (cfg.weld) {
    Vec3 lo = mesh.V.colwise().minCoeff(), hi = mesh.V.colwise().maxCoeff();
    double tol = 1e-8 * (hi - lo).norm();
    mesh = weld_duplicate_vertices(mesh, tol);
    validate_mesh(mesh);
  }
  return mesh;
}

struct ParamOutput {
  PlanarMap disk;
  SurfaceMap hemi;
};

ParamOutput run_method(const RunConfig& cfg, const TriMesh& reg, const Spheroid& s) {
  if (cfg.method == "tutte") {
    TutteResult r = hemispheroidal_tutte(reg, s);
    return {r.disk, r.hemi};
  }
  if (cfg.method == "conformal") {
    ConformalResult r = hemispheroidal_conformal(reg, s);
    return {r.disk_corrected, r.hemi};
  }
  if (cfg.method == "area") {
    AreaResult r = hemispheroidal_area_preserving_full(reg, s);
    return {r.disk, r.hemi};
  }
  if (cfg.method == "balanced") {
    BalanceWeights w{cfg.alpha, cfg.beta, cfg.gamma};
    w.validate();
    BalancedResult r = hemispheroidal_balanced(reg, s, w);
    return {r.disk, r.hemi};
  }
  throw std::invalid_argument("unknown method '" + cfg.method +
                              "'; valid methods: tutte, conformal, area, balanced");
}

Spheroid pick_spheroid(const RunConfig& cfg, const TriMesh& reg) {
  if (cfg.c_value > 0) return Spheroid::from_semiaxes(1.0, cfg.c_value);
  return size_hemispheroid(reg);
}

json metrics_json(const TriMesh& reg, const ParamOutput& param, double armse,
                  double fit_residual, double mean_orth) {
  DistortionReport da = angle_distortion(reg, param.hemi);
  DistortionReport dA = area_distortion(reg, param.hemi);
  return json{{"angle_distortion", da.to_json()},
              {"area_distortion", dA.to_json()},
              {"a_rmse", armse},
              {"fit_rms_residual", fit_residual},
              {"mean_orthogonality_n10", mean_orth}};
}

void write_metrics_csv(const fs::path& path, const TriMesh& reg, const ParamOutput& param) {
  DistortionReport da = angle_distortion(reg, param.hemi);
  DistortionReport dA = area_distortion(reg, param.hemi);
  std::ofstream out(path);
  out << "metric,bin_lo,bin_hi,count\n";
  auto dump = [&](const char* name, const DistortionReport& r) {
    for (size_t b = 0; b + 1 < r.histogram.edges.size(); ++b)
      out << name << ',' << detail::fmt_coord(r.histogram.edges[b]) << ','
          << detail::fmt_coord(r.histogram.edges[b + 1]) << ',' << r.histogram.counts[b]
          << '\n';
  };
  dump("angle_distortion_deg", da);
  dump("area_distortion_log", dA);
  out << "summary,angle_mean_abs,angle_std_abs," << detail::fmt_coord(da.mean_abs) << '\n';
  out << "summary,area_mean_abs,area_std_abs," << detail::fmt_coord(dA.mean_abs) << '\n';
}

int cmd_run(const RunConfig& cfg) {
  Timings timings;
  std::string stem = input_stem(cfg.input) + "_" + cfg.method;
  ArtifactSet artifacts{fs::path(cfg.out_dir)};

  TriMesh mesh = stage("load", [&] { return load_input(cfg); });
  timings.lap("load");

  auto [reg, xf] = stage("register", [&] { return register_mesh(mesh); });
  Spheroid s = stage("size", [&] { return pick_spheroid(cfg, reg); });
  save_mesh(reg, artifacts.partial(stem + "_registered.obj").string(), MeshFormat::obj);
  timings.lap("register");

  ParamOutput param = stage("param", [&] { return run_method(cfg, reg, s); });
  save_mesh(TriMesh{param.hemi, reg.F}, artifacts.partial(stem + "_param.obj").string(),
            MeshFormat::obj);
  timings.lap("param");

  HarmonicCoeffs coeffs = stage("decompose", [&] {
    return decompose(param.hemi, reg.V, s, cfg.n_max, cfg.eps_eta, xf);
  });
  save_coeffs(coeffs, artifacts.partial(stem + "_coeffs.json").string());
  timings.lap("decompose");

  TriMesh recon = stage("reconstruct", [&] {
    auto [coords, grid] = sample_uniform_hemispheroid(s, cfg.samples);
    Points3 pts = reconstruct_original_pose(coeffs, coords, cfg.n_max);
    return TriMesh{pts, grid.F};
  });
  save_mesh(recon, artifacts.partial(stem + "_recon.obj").string(), MeshFormat::obj);
  timings.lap("reconstruct");

  json mjson = stage("metrics", [&] {
    double armse = a_rmse(mesh, recon, !cfg.absolute_distance);
    auto coords = to_eta_phi(param.hemi, s, cfg.eps_eta);
    double morth = mean_orthogonality(coords, std::min(cfg.n_max, 10), s.kind);
    return metrics_json(reg, param, armse, coeffs.fit_rms_residual, morth);
  });
  write_json_file(artifacts.partial(stem + "_metrics.json"), mjson);
  write_metrics_csv(artifacts.partial(stem + "_metrics.csv"), reg, param);
  timings.lap("metrics");

  json manifest{{"tool", "hemiparam"},
                {"version", kVersion},
                {"config", cfg.to_json()},
                {"spheroid", s.to_json()},
                {"registration", xf.to_json()},
                {"timings", timings.to_json()},
                {"warnings", g_warnings}};
  write_json_file(artifacts.partial(stem + "_manifest.json"), manifest);

  for (const auto& path : artifacts.finalize()) std::cout << "wrote " << path << "\n";
  std::cout << "a_rmse " << mjson["a_rmse"].get<double>() << "\n";
  return 0;
}

int cmd_param(const RunConfig& cfg) {
  Timings timings;
  std::string stem = input_stem(cfg.input) + "_" + cfg.method;
  ArtifactSet artifacts{fs::path(cfg.out_dir)};
  TriMesh mesh = stage("load", [&] { return load_input(cfg); });
  auto [reg, xf] = stage("register", [&] { return register_mesh(mesh); });
  Spheroid s = stage("size", [&] { return pick_spheroid(cfg, reg); });
  ParamOutput param = stage("param", [&] { return run_method(cfg, reg, s); });
  timings.lap("param");

  save_mesh(reg, artifacts.partial(stem + "_registered.obj").string(), MeshFormat::obj);
  save_mesh(TriMesh{param.hemi, reg.F}, artifacts.partial(stem + "_param.obj").string(),
            MeshFormat::obj);
  write_json_file(artifacts.partial(stem + "_registration.json"),
                  json{{"spheroid", s.to_json()},
                       {"registration", xf.to_json()},
                       {"eps_eta", cfg.eps_eta}});
  json manifest{{"tool", "hemiparam"}, {"version", kVersion}, {"config", cfg.to_json()},
                {"timings", timings.to_json()}, {"warnings", g_warnings}};
  write_json_file(artifacts.partial(stem + "_manifest.json"), manifest);
  for (const auto& path : artifacts.finalize()) std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_decompose(const RunConfig& cfg, const std::string& param_path,
                  const std::string& registration_path, const std::string& out_path) {
  TriMesh registered = stage("load", [&] { return load_mesh(cfg.input); });
  TriMesh param = stage("load", [&] { return load_mesh(param_path); });
  if (param.num_vertices() != registered.num_vertices())
    throw StageError("decompose", "registered and parameterized meshes disagree on vertex count");
  Spheroid s;
  RigidTransform xf;
  double eps_eta = cfg.eps_eta;
  {
    std::ifstream in(registration_path);
    if (!in) throw StageError("decompose", "cannot open registration file " + registration_path);
    json j;
    in >> j;
    s = Spheroid::from_json(j.at("spheroid"));
    xf = RigidTransform::from_json(j.at("registration"));
    eps_eta = j.value("eps_eta", cfg.eps_eta);
  }
  HarmonicCoeffs coeffs = stage("decompose", [&] {
    return decompose(param.V, registered.V, s, cfg.n_max, eps_eta, xf);
  });
  save_coeffs(coeffs, out_path);
  std::cout << "wrote " << out_path << " (fit residual " << coeffs.fit_rms_residual << ")\n";
  return 0;
}

int cmd_reconstruct(const std::string& coeffs_path, int samples, int n_upto,
                    bool registered_pose, const std::string& out_path) {
  HarmonicCoeffs coeffs = load_coeffs(coeffs_path);
  if (n_upto < 0) n_upto = coeffs.n_max;
  auto [coords, grid] = sample_uniform_hemispheroid(coeffs.spheroid, samples);
  Points3 pts = registered_pose ? reconstruct(coeffs, coords, n_upto)
                                : reconstruct_original_pose(coeffs, coords, n_upto);
  save_mesh(TriMesh{pts, grid.F}, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_metrics(const RunConfig& cfg, const std::string& image_path,
                const std::string& compare_path, const std::string& out_path) {
  TriMesh mesh = stage("load", [&] { return load_mesh(cfg.input); });
  json out;
  if (!image_path.empty()) {
    TriMesh image = stage("load", [&] { return load_mesh(image_path); });
    if (image.num_vertices() != mesh.num_vertices())
      throw StageError("metrics", "image mesh must share the input's connectivity");
    out["angle_distortion"] = angle_distortion(mesh, image.V).to_json();
    out["area_distortion"] = area_distortion(mesh, image.V).to_json();
  }
  if (!compare_path.empty()) {
    TriMesh other = stage("load", [&] { return load_mesh(compare_path); });
    out["a_rmse"] = a_rmse(mesh, other, !cfg.absolute_distance);
  }
  if (out.empty()) throw StageError("metrics", "nothing to do: pass --image and/or --compare");
  if (!out_path.empty()) write_json_file(out_path, out);
  std::cout << out.dump(1) << "\n";
  return 0;
}

int cmd_optimize_c(const RunConfig& cfg, double c_min, double c_max, int n_probe,
                   bool with_armse, const std::string& curve_path) {
  TriMesh mesh = stage("load", [&] { return load_input(cfg); });
  auto [reg, xf] = stage("register", [&] { return register_mesh(mesh); });
  RadiusCurveOptions opts;
  opts.n_max_probe = n_probe;
  opts.with_armse = with_armse;
  auto [c_star, curve] = stage("optimize-c", [&] {
    return optimize_radius_c(reg, {c_min, c_max}, opts);
  });
  if (!curve_path.empty()) {
    std::ofstream out(curve_path);
    out << "c,mean_orthogonality,a_rmse,valid\n";
    for (const auto& sample : curve)
      out << detail::fmt_coord(sample.c) << ',' << detail::fmt_coord(sample.mean_orth) << ','
          << detail::fmt_coord(sample.armse) << ',' << (sample.valid ? 1 : 0) << '\n';
    std::cout << "wrote " << curve_path << "\n";
  }
  std::cout << "c_star " << c_star << "\n";
  return 0;
}

int cmd_optimize_weights(const RunConfig& cfg, int n_probe, int budget,
                         const std::string& out_path) {
  TriMesh mesh = stage("load", [&] { return load_input(cfg); });
  auto [reg, xf] = stage("register", [&] { return register_mesh(mesh); });
  Spheroid s = stage("size", [&] { return pick_spheroid(cfg, reg); });
  WeightSearchOptions opts;
  opts.n_max_probe = n_probe;
  opts.max_evaluations = budget;
  BalanceWeights w = stage("optimize-weights", [&] { return optimize_weights(reg, s, opts); });
  json j{{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}};
  if (!out_path.empty()) write_json_file(out_path, j);
  std::cout << j.dump() << "\n";
  return 0;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool needs_input = true) {
  sub->set_config("--config", "", "key=value config file; flags take precedence");
  sub->allow_config_extras(false);
  auto* in = sub->add_option("--input,-i", cfg.input, "input mesh (obj/ply/off)");
  if (needs_input) in->required();
  sub->add_option("--out-dir,-o", cfg.out_dir, "output directory");
  sub->add_option("--eps-eta", cfg.eps_eta, "apex latitude clamp in radians (default pi/160)");
  sub->add_option("--n-max", cfg.n_max, "max expansion degree");
  sub->add_option("--samples", cfg.samples, "uniform hemispheroid sample count");
  sub->add_option("--c-value", cfg.c_value, "polar semiaxis override (default: from bounding box)");
  sub->add_option("--seed", cfg.seed, "run seed recorded in the manifest");
  sub->add_option("--jobs,-j", cfg.jobs, "worker thread cap");
  sub->add_flag("--weld", cfg.weld, "weld duplicate vertices (1e-8 x bbox diagonal)");
  sub->add_flag("--absolute-distance", cfg.absolute_distance,
                "report A-RMSE without bounding-box normalization");
}

void add_method(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--method,-m", cfg.method, "tutte | conformal | area | balanced");
  sub->add_option("--alpha", cfg.alpha, "balanced: Tutte weight");
  sub->add_option("--beta", cfg.beta, "balanced: conformal weight");
  sub->add_option("--gamma", cfg.gamma, "balanced: area-preserving weight");
}

}  // namespace

int main(int argc, char** argv) {
  install_warning_sink();
  CLI::App app{"hemispheroidal parameterization and harmonic decomposition"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto* run = app.add_subcommand("run", "full pipeline: register, map, decompose, reconstruct");
  add_common(run, cfg);
  add_method(run, cfg);

  RunConfig pcfg;
  auto* par = app.add_subcommand("param", "register and parameterize only");
  add_common(par, pcfg);
  add_method(par, pcfg);

  RunConfig dcfg;
  std::string d_param, d_registration, d_out = "coeffs.json";
  auto* dec = app.add_subcommand("decompose", "expand a parameterized mesh into coefficients");
  add_common(dec, dcfg);
  dec->add_option("--param", d_param, "parameterized mesh from 'param'")->required();
  dec->add_option("--registration", d_registration, "registration json from 'param'")->required();
  dec->add_option("--out-coeffs", d_out, "output coefficient file");

  std::string r_coeffs, r_out = "recon.obj";
  int r_upto = -1, r_samples = 20000;
  bool r_registered_pose = false;
  auto* rec = app.add_subcommand("reconstruct", "evaluate coefficients on a uniform grid");
  rec->set_config("--config", "", "key=value config file; flags take precedence");
  rec->add_option("--coeffs", r_coeffs, "coefficient json")->required();
  rec->add_option("--samples", r_samples, "uniform hemispheroid sample count");
  rec->add_option("--n-upto", r_upto, "truncation degree (default: n_max)");
  rec->add_flag("--registered-pose", r_registered_pose, "skip the inverse registration");
  rec->add_option("--out-mesh", r_out, "output mesh path");

  RunConfig mcfg;
  std::string m_image, m_compare, m_out;
  auto* met = app.add_subcommand("metrics", "distortion and surface-distance reports");
  add_common(met, mcfg);
  met->add_option("--image", m_image, "same-connectivity image mesh for distortions");
  met->add_option("--compare", m_compare, "second mesh for A-RMSE");
  met->add_option("--out-json", m_out, "also write the report to a file");

  RunConfig ccfg;
  double c_min = 0.2, c_max = 2.0;
  int c_probe = 10;
  bool c_armse = false;
  std::string c_curve = "radius_curve.csv";
  auto* opc = app.add_subcommand("optimize-c", "scan the hemispheroid radius");
  add_common(opc, ccfg);
  opc->add_option("--c-min", c_min, "lower radius bound");
  opc->add_option("--c-max", c_max, "upper radius bound");
  opc->add_option("--n-max-probe", c_probe, "probe degree for the orthogonality objective");
  opc->add_flag("--with-armse", c_armse, "also evaluate A-RMSE per sample");
  opc->add_option("--curve", c_curve, "output CSV path");

  RunConfig wcfg;
  int w_probe = 10, w_budget = 60;
  std::string w_out;
  auto* opw = app.add_subcommand("optimize-weights", "search the balance-weight simplex");
  add_common(opw, wcfg);
  opw->add_option("--n-max-probe", w_probe, "probe degree for the reconstruction objective");
  opw->add_option("--budget", w_budget, "objective evaluation budget");
  opw->add_option("--out-json", w_out, "also write the weights to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      set_max_threads(cfg.jobs);
      return cmd_run(cfg);
    }
    if (par->parsed()) {
      set_max_threads(pcfg.jobs);
      return cmd_param(pcfg);
    }
    if (dec->parsed()) {
      set_max_threads(dcfg.jobs);
      return cmd_decompose(dcfg, d_param, d_registration, d_out);
    }
    if (rec->parsed()) return cmd_reconstruct(r_coeffs, r_samples, r_upto, r_registered_pose, r_out);
    if (met->parsed()) {
      set_max_threads(mcfg.jobs);
      return cmd_metrics(mcfg, m_image, m_compare, m_out);
    }
    if (opc->parsed()) {
      set_max_threads(ccfg.jobs);
      return cmd_optimize_c(ccfg, c_min, c_max, c_probe, c_armse, c_curve);
    }
    if (opw->parsed()) {
      set_max_threads(wcfg.jobs);
      return cmd_optimize_weights(wcfg, w_probe, w_budget, w_out);
    }
  } catch (const StageError& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
