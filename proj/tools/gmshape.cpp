// gmshape: Gaussian-mixture shape toolkit CLI.
//
// Subcommands: fit, mesh, reduce, align, eval, silhouette, sample, voxelize,
// views. Exit codes: 0 success, 2 input error, 3 numeric failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gmshape/detail/parallel.hpp"
#include "gmshape/fitter.hpp"
#include "gmshape/ingest.hpp"
#include "gmshape/io.hpp"
#include "gmshape/metrics.hpp"
#include "gmshape/shape_ops.hpp"
#include "gmshape/surface.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;
using namespace gmshape;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ManifestWriter {
  std::string command;
  json config = json::object();
  json inputs = json::array();
  json outputs = json::array();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& path) const {
    json doc;
    doc["tool"] = "gmshape";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["config"] = config;
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error(path + ": cannot write manifest");
  }
};

Vec3i parse_dims(int d) { return Vec3i(d, d, d); }

std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || dot <= slash + 1) return path;
  return path.substr(0, dot);
}

void write_loss_csv(const std::string& path, const FitTrace& trace) {
  std::ofstream out(path);
  out << "iter,l_3d,l_dist,l_sil,total\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const IterStats& it = trace.iterations[i];
    out << i << "," << fmt17(it.l_3d) << "," << fmt17(it.l_dist) << "," << fmt17(it.l_sil) << ","
        << fmt17(it.total) << "\n";
  }
  if (!out) throw std::runtime_error(path + ": cannot write loss trace");
}

// ---------------------------------------------------------------------------

int cmd_fit(CLI::App& app) {
  auto sub = app.add_subcommand("fit", "Fit a Gaussian mixture to a target shape");
  struct FitOpts {
    std::string target;
    std::string out = "out.gmm";
    std::string views_dir;
    FitConfig fit;
    LossConfig loss;
    int dims = 64;
    int n_points = 100000;
    bool no_normalize = false;
    std::string init = "em";
    std::string schedule = "cosine";
  };
  auto opt = std::make_shared<FitOpts>();

  sub->add_option("target", opt->target, "Target shape (.obj/.ply/.vox/.binvox/.xyz)")->required();
  sub->add_option("-o,--out", opt->out, "Output GMM file");
  sub->add_option("--views", opt->views_dir, "View-set directory (cameras.txt + NNN.pgm)");
  sub->add_option("--k", opt->fit.k, "Number of components");
  sub->add_option("--iters", opt->fit.iters, "Optimization steps");
  sub->add_option("--lr", opt->fit.lr, "Adam learning rate");
  sub->add_option("--lr-schedule", opt->schedule, "cosine|constant");
  sub->add_option("--seed", opt->fit.seed, "Random seed");
  sub->add_option("--init", opt->init, "random|em");
  sub->add_option("--w3d", opt->loss.w_3d, "3D loss weight");
  sub->add_option("--wdist", opt->loss.w_dist, "Center-distance loss weight");
  sub->add_option("--wsil", opt->loss.w_sil, "Silhouette loss weight");
  sub->add_option("--q", opt->loss.q_points, "Q of the pseudo soft silhouette");
  sub->add_option("--nviews", opt->loss.n_views, "Views per iteration");
  sub->add_option("--batch", opt->loss.sample_batch, "Points per iteration (0 = all)");
  sub->add_option("--t-dist", opt->loss.t_dist, "Radius T of the center-distance loss");
  sub->add_option("--dims", opt->dims, "Voxelization resolution for mesh targets");
  sub->add_option("--points", opt->n_points, "Volume points sampled from the target");
  sub->add_flag("--no-normalize", opt->no_normalize, "Skip bbox-diagonal normalization");

  sub->callback([opt, &app]() {
    ManifestWriter manifest;
    manifest.command = "fit";

    opt->fit.init = opt->init == "em" ? InitScheme::EmWarmstart : InitScheme::RandomSphere;
    opt->fit.schedule =
        opt->schedule == "constant" ? LrSchedule::Constant : LrSchedule::Cosine;

    const ShapeTarget target = load_shape_target(opt->target, parse_dims(opt->dims),
                                                 opt->n_points, opt->fit.seed, !opt->no_normalize);
    std::vector<ViewObservation> views;
    if (!opt->views_dir.empty()) views = load_view_set(opt->views_dir);
    if (opt->loss.w_sil > 0.0 && views.empty()) opt->loss.w_sil = 0.0;

    const FitResult result = fit(target.points, views, opt->fit, opt->loss);

    write_gmm(opt->out, result.mixture);
    const std::string csv = stem_of(opt->out) + ".loss.csv";
    write_loss_csv(csv, result.trace);

    manifest.config = {{"k", opt->fit.k},
                       {"iters", opt->fit.iters},
                       {"lr", opt->fit.lr},
                       {"lr_schedule", opt->schedule},
                       {"seed", opt->fit.seed},
                       {"init", opt->init},
                       {"w_3d", opt->loss.w_3d},
                       {"w_dist", opt->loss.w_dist},
                       {"w_sil", opt->loss.w_sil},
                       {"q_points", opt->loss.q_points},
                       {"n_views", opt->loss.n_views},
                       {"sample_batch", opt->loss.sample_batch},
                       {"t_dist", opt->loss.t_dist},
                       {"dims", opt->dims},
                       {"points", opt->n_points},
                       {"normalize", !opt->no_normalize},
                       {"threads", thread_count()}};
    manifest.inputs = {opt->target};
    if (!opt->views_dir.empty()) manifest.inputs.push_back(opt->views_dir);
    manifest.outputs = {opt->out, csv};
    manifest.write(opt->out + ".manifest.json");
    std::cout << "fit: wrote " << opt->out << " (final total loss "
              << result.trace.iterations.back().total << ")\n";
  });
  return 0;
}

int cmd_mesh(CLI::App& app) {
  auto sub = app.add_subcommand("mesh", "Extract an isosurface mesh from a GMM file");
  struct MeshOpts {
    std::string gmm;
    std::string out = "out.obj";
    double c = kDefaultIsoLevel;
    int dims = 128;
    std::vector<double> bounds;
  };
  auto opt = std::make_shared<MeshOpts>();
  sub->add_option("gmm", opt->gmm, "Input GMM file")->required();
  sub->add_option("-o,--out", opt->out, "Output mesh (.obj or .ply)");
  sub->add_option("--c", opt->c, "Isosurface level multiplier");
  sub->add_option("--dims", opt->dims, "Grid resolution");
  sub->add_option("--bounds", opt->bounds, "x0 y0 z0 x1 y1 z1 (default: auto)")->expected(6);

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "mesh";
    const GaussianMixture3 m = read_gmm(opt->gmm);
    const Aabb box = opt->bounds.size() == 6
                         ? Aabb{Vec3(opt->bounds[0], opt->bounds[1], opt->bounds[2]),
                                Vec3(opt->bounds[3], opt->bounds[4], opt->bounds[5])}
                         : default_mesh_bounds(m);
    const TriangleMesh mesh = extract_mesh(m, opt->c, parse_dims(opt->dims), box);
    if (opt->out.size() > 4 && opt->out.substr(opt->out.size() - 4) == ".ply")
      write_ply(opt->out, mesh);
    else
      write_obj(opt->out, mesh);

    manifest.config = {{"c", opt->c},
                       {"dims", opt->dims},
                       {"bounds", {box.lo.x(), box.lo.y(), box.lo.z(), box.hi.x(), box.hi.y(), box.hi.z()}},
                       {"threads", thread_count()}};
    manifest.inputs = {opt->gmm};
    manifest.outputs = {opt->out};
    manifest.write(opt->out + ".manifest.json");
    std::cout << "mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
              << " triangles -> " << opt->out << "\n";
  });
  return 0;
}

int cmd_reduce(CLI::App& app) {
  auto sub = app.add_subcommand("reduce", "Reduce a mixture to fewer components");
  struct ReduceOpts {
    std::string gmm;
    std::string out = "reduced.gmm";
    int k = 16;
  };
  auto opt = std::make_shared<ReduceOpts>();
  sub->add_option("gmm", opt->gmm, "Input GMM file")->required();
  sub->add_option("--k", opt->k, "Target component count")->required();
  sub->add_option("-o,--out", opt->out, "Output GMM file");

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "reduce";
    const GaussianMixture3 m = read_gmm(opt->gmm);
    const GaussianMixture3 reduced = reduce(m, opt->k);
    write_gmm(opt->out, reduced);
    manifest.config = {{"k", opt->k}};
    manifest.inputs = {opt->gmm};
    manifest.outputs = {opt->out};
    manifest.write(opt->out + ".manifest.json");
    std::cout << "reduce: " << m.size() << " -> " << reduced.size() << " components -> "
              << opt->out << "\n";
  });
  return 0;
}

int cmd_align(CLI::App& app) {
  auto sub = app.add_subcommand("align", "Estimate the relative pose between two mixtures");
  struct AlignOpts {
    std::string gmm_a;
    std::string gmm_b;
    bool with_scale = false;
    bool all_candidates = false;
    std::string manifest_path = "align.manifest.json";
  };
  auto opt = std::make_shared<AlignOpts>();
  sub->add_option("a", opt->gmm_a, "Reference GMM file")->required();
  sub->add_option("b", opt->gmm_b, "GMM file to align onto the reference")->required();
  sub->add_flag("--scale", opt->with_scale, "Also estimate a uniform scale");
  sub->add_flag("--all", opt->all_candidates, "Print all sign candidates");
  sub->add_option("--manifest", opt->manifest_path, "Manifest path");

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "align";
    const GaussianMixture3 a = read_gmm(opt->gmm_a);
    const GaussianMixture3 b = read_gmm(opt->gmm_b);
    const AlignResult result = align(a, b, opt->with_scale);

    auto print_transform = [](const RigidTransform& t) {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) std::cout << fmt17(t.rotation(r, c)) << " ";
      std::cout << fmt17(t.translation.x()) << " " << fmt17(t.translation.y()) << " "
                << fmt17(t.translation.z()) << "\n";
    };
    print_transform(result.transform);
    std::cout << "residual " << fmt17(result.residual) << "\n";
    if (opt->with_scale) std::cout << "scale " << fmt17(result.transform.scale) << "\n";
    if (result.ambiguous) std::cout << "ambiguous\n";
    if (opt->all_candidates)
      for (const AlignCandidate& cand : result.candidates) {
        std::cout << "candidate residual " << fmt17(cand.residual) << ": ";
        print_transform(cand.transform);
      }

    manifest.config = {{"scale", opt->with_scale}};
    manifest.inputs = {opt->gmm_a, opt->gmm_b};
    manifest.outputs = json::array();
    manifest.write(opt->manifest_path);
  });
  return 0;
}

int cmd_eval(CLI::App& app) {
  auto sub = app.add_subcommand("eval", "Evaluate a fitted mixture against ground truth");
  struct EvalOpts {
    std::string gmm;
    std::string gt;
    std::string views_dir;
    std::string out = "eval";
    double c = kDefaultIsoLevel;
    int iou_dims = 32;
    int mesh_dims = 64;
    int n_points = 1024;
    long long q = 10000;
    std::uint64_t seed = 0;
    std::string normalization = "per-cloud";
  };
  auto opt = std::make_shared<EvalOpts>();
  sub->add_option("--gmm", opt->gmm, "Fitted GMM file")->required();
  sub->add_option("--gt", opt->gt, "Ground truth (.vox/.binvox/.obj/.ply)")->required();
  sub->add_option("--views", opt->views_dir, "Views for silhouette MSE");
  sub->add_option("-o,--out", opt->out, "Report stem (writes <out>.csv and <out>.json)");
  sub->add_option("--c", opt->c, "Isosurface level multiplier");
  sub->add_option("--iou-dims", opt->iou_dims, "IoU grid when ground truth is a mesh");
  sub->add_option("--mesh-dims", opt->mesh_dims, "Isosurface grid for CD/EMD point sampling");
  sub->add_option("--points", opt->n_points, "Surface points for CD/EMD");
  sub->add_option("--q", opt->q, "Q for rendered silhouettes");
  sub->add_option("--seed", opt->seed, "Sampling seed");
  sub->add_option("--normalization", opt->normalization, "per-cloud|joint|none");

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "eval";
    const GaussianMixture3 m = read_gmm(opt->gmm);

    // ground truth volume + surface
    const auto dot = opt->gt.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : opt->gt.substr(dot);
    VoxelGrid gt_grid;
    TriangleMesh gt_surface;
    if (ext == ".vox" || ext == ".binvox") {
      gt_grid = ext == ".vox" ? read_voxel_grid(opt->gt) : read_binvox(opt->gt);
      gt_surface = marching_cubes(gt_grid, 0.5);
    } else {
      const TriangleMesh gt_mesh = load_mesh(opt->gt);
      gt_grid = voxelize_solid(gt_mesh, parse_dims(opt->iou_dims));
      gt_surface = gt_mesh;
    }

    EvalReport report;
    report.grid_dims = gt_grid.dims;
    report.point_count = opt->n_points;
    report.seed = opt->seed;
    report.iou = iou(m, gt_grid, opt->c);

    const TriangleMesh est_surface = extract_mesh(m, opt->c, parse_dims(opt->mesh_dims));
    CloudNormalization norm = CloudNormalization::PerCloud;
    if (opt->normalization == "joint") norm = CloudNormalization::Joint;
    if (opt->normalization == "none") norm = CloudNormalization::None;
    if (!est_surface.empty() && !gt_surface.empty()) {
      const PointList est_pts = sample_surface(est_surface, opt->n_points, opt->seed);
      const PointList gt_pts = sample_surface(gt_surface, opt->n_points, opt->seed + 1);
      report.chamfer = chamfer(est_pts, gt_pts, norm);
      EmdOptions emd_opt;
      emd_opt.normalization = norm;
      report.emd = emd(est_pts, gt_pts, emd_opt).value;
    } else {
      report.chamfer = std::numeric_limits<double>::quiet_NaN();
      report.emd = std::numeric_limits<double>::quiet_NaN();
    }

    if (!opt->views_dir.empty()) {
      const std::vector<ViewObservation> views = load_view_set(opt->views_dir);
      double acc = 0.0;
      for (const ViewObservation& v : views) {
        const SilhouetteImage rendered =
            soft_silhouette(paraperspective_project(m, v.camera), opt->q, v.camera);
        acc += silhouette_mse(rendered, v.silhouette);
      }
      report.sil_mse = acc / views.size();
    }

    const std::string csv_path = opt->out + ".csv";
    std::ofstream csv(csv_path);
    csv << "iou,chamfer,emd,sil_mse\n"
        << fmt17(report.iou) << "," << fmt17(report.chamfer) << "," << fmt17(report.emd) << ","
        << fmt17(report.sil_mse) << "\n";
    if (!csv) throw std::runtime_error(csv_path + ": cannot write");

    json jr = {{"iou", report.iou},
               {"chamfer", report.chamfer},
               {"emd", report.emd},
               {"sil_mse", report.sil_mse},
               {"grid_dims", {report.grid_dims.x(), report.grid_dims.y(), report.grid_dims.z()}},
               {"point_count", report.point_count},
               {"seed", report.seed},
               {"c", opt->c},
               {"mesh_dims", opt->mesh_dims},
               {"normalization", opt->normalization}};
    const std::string json_path = opt->out + ".json";
    std::ofstream jout(json_path);
    jout << jr.dump(2) << "\n";
    if (!jout) throw std::runtime_error(json_path + ": cannot write");

    manifest.config = jr;
    manifest.inputs = {opt->gmm, opt->gt};
    if (!opt->views_dir.empty()) manifest.inputs.push_back(opt->views_dir);
    manifest.outputs = {csv_path, json_path};
    manifest.write(opt->out + ".csv.manifest.json");
    std::cout << "eval: iou " << report.iou << " cd " << report.chamfer << " emd " << report.emd
              << " sil_mse " << report.sil_mse << "\n";
  });
  return 0;
}

int cmd_silhouette(CLI::App& app) {
  auto sub = app.add_subcommand("silhouette", "Render silhouettes of a mixture or mesh");
  struct SilOpts {
    std::string input;
    std::string cameras;
    std::string out = "silhouettes";
    long long q = 10000;
  };
  auto opt = std::make_shared<SilOpts>();
  sub->add_option("input", opt->input, "GMM file (soft) or mesh (binary)")->required();
  sub->add_option("--cameras", opt->cameras, "cameras.txt listing the viewpoints")->required();
  sub->add_option("-o,--out", opt->out, "Output directory");
  sub->add_option("--q", opt->q, "Q of the pseudo soft silhouette");

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "silhouette";
    const std::vector<Camera> cams = read_cameras(opt->cameras);
    std::filesystem::create_directories(opt->out);

    const auto dot = opt->input.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : opt->input.substr(dot);
    std::vector<ViewObservation> views;
    for (std::size_t i = 0; i < cams.size(); ++i) {
      SilhouetteImage img;
      if (ext == ".gmm") {
        const GaussianMixture3 m = read_gmm(opt->input);
        img = soft_silhouette(paraperspective_project(m, cams[i]), opt->q, cams[i]);
      } else {
        img = rasterize_mesh_silhouette(load_mesh(opt->input), cams[i]);
      }
      views.push_back({cams[i], std::move(img)});
    }
    save_view_set(opt->out, views);

    manifest.config = {{"q", opt->q}, {"views", cams.size()}};
    manifest.inputs = {opt->input, opt->cameras};
    manifest.outputs = {opt->out};
    manifest.write(opt->out + "/manifest.json");
    std::cout << "silhouette: wrote " << cams.size() << " views to " << opt->out << "\n";
  });
  return 0;
}

int cmd_sample(CLI::App& app) {
  auto sub = app.add_subcommand("sample", "Draw a point cloud from a mixture");
  struct SampleOpts {
    std::string gmm;
    std::string out = "points.xyz";
    int n = 1024;
    std::uint64_t seed = 0;
  };
  auto opt = std::make_shared<SampleOpts>();
  sub->add_option("gmm", opt->gmm, "Input GMM file")->required();
  sub->add_option("-o,--out", opt->out, "Output .xyz file");
  sub->add_option("--n", opt->n, "Number of points");
  sub->add_option("--seed", opt->seed, "Random seed");

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "sample";
    const GaussianMixture3 m = read_gmm(opt->gmm);
    write_xyz(opt->out, sample(m, opt->n, opt->seed));
    manifest.config = {{"n", opt->n}, {"seed", opt->seed}};
    manifest.inputs = {opt->gmm};
    manifest.outputs = {opt->out};
    manifest.write(opt->out + ".manifest.json");
    std::cout << "sample: wrote " << opt->n << " points to " << opt->out << "\n";
  });
  return 0;
}

int cmd_voxelize(CLI::App& app) {
  auto sub = app.add_subcommand("voxelize", "Voxelize a mesh into a solid occupancy grid");
  struct VoxOpts {
    std::string mesh;
    std::string out = "out.vox";
    int dims = 64;
    bool no_normalize = false;
  };
  auto opt = std::make_shared<VoxOpts>();
  sub->add_option("mesh", opt->mesh, "Input mesh (.obj/.ply)")->required();
  sub->add_option("-o,--out", opt->out, "Output .vox file");
  sub->add_option("--dims", opt->dims, "Grid resolution");
  sub->add_flag("--no-normalize", opt->no_normalize, "Skip bbox-diagonal normalization");

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "voxelize";
    TriangleMesh mesh = load_mesh(opt->mesh);
    if (!opt->no_normalize) mesh = normalize_mesh(mesh).mesh;
    VoxelizeStats stats;
    const VoxelGrid grid = voxelize_solid(mesh, parse_dims(opt->dims), std::nullopt, &stats);
    write_voxel_grid(opt->out, grid);
    if (stats.parity_mismatch)
      std::cerr << "voxelize: warning: mesh is not watertight, occupancy is best-effort\n";
    manifest.config = {{"dims", opt->dims},
                       {"normalize", !opt->no_normalize},
                       {"parity_mismatch", stats.parity_mismatch}};
    manifest.inputs = {opt->mesh};
    manifest.outputs = {opt->out};
    manifest.write(opt->out + ".manifest.json");
    std::cout << "voxelize: " << occupied_count(grid) << " occupied voxels -> " << opt->out << "\n";
  });
  return 0;
}

int cmd_views(CLI::App& app) {
  auto sub = app.add_subcommand("views", "Generate ground-truth silhouette views of a mesh");
  struct ViewsOpts {
    std::string mesh;
    std::string out = "views";
    int n = 100;
    int subdiv = 2;
    std::uint64_t seed = 0;
    double dist = -1.0;
    bool no_normalize = false;
  };
  auto opt = std::make_shared<ViewsOpts>();
  sub->add_option("mesh", opt->mesh, "Input mesh (.obj/.ply)")->required();
  sub->add_option("-o,--out", opt->out, "Output directory");
  sub->add_option("--n", opt->n, "Number of views");
  sub->add_option("--subdiv", opt->subdiv, "Icosphere subdivisions");
  sub->add_option("--seed", opt->seed, "View selection seed");
  sub->add_option("--dist", opt->dist, "Camera distance (default: bbox diagonal)");
  sub->add_flag("--no-normalize", opt->no_normalize, "Skip bbox-diagonal normalization");

  sub->callback([opt]() {
    ManifestWriter manifest;
    manifest.command = "views";
    TriangleMesh mesh = load_mesh(opt->mesh);
    if (!opt->no_normalize) mesh = normalize_mesh(mesh).mesh;
    const std::vector<ViewObservation> views =
        make_view_set(mesh, opt->n, opt->subdiv, opt->seed, opt->dist);
    save_view_set(opt->out, views);
    manifest.config = {{"n", opt->n},
                       {"subdiv", opt->subdiv},
                       {"seed", opt->seed},
                       {"dist", opt->dist},
                       {"normalize", !opt->no_normalize}};
    manifest.inputs = {opt->mesh};
    manifest.outputs = {opt->out};
    manifest.write(opt->out + "/manifest.json");
    std::cout << "views: wrote " << views.size() << " views to " << opt->out << "\n";
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-mixture shape representation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  app.add_option_function<int>(
         "--threads", [](int n) { set_thread_count(n); }, "Worker threads (0 = hardware)");
  app.set_config("--config", "", "Read options from an INI/TOML file");

  cmd_fit(app);
  cmd_mesh(app);
  cmd_reduce(app);
  cmd_align(app);
  cmd_eval(app);
  cmd_silhouette(app);
  cmd_sample(app);
  cmd_voxelize(app);
  cmd_views(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const numeric_error& e) {
    std::cerr << "gmshape: numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "gmshape: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
