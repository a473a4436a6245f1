// smpi: build, render, merge and evaluate structural multiplane images.
//
// Exit codes: 0 success, 1 data error, 2 usage error.

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smpi/builder.hpp"
#include "smpi/eval.hpp"
#include "smpi/fusion.hpp"
#include "smpi/geometry.hpp"
#include "smpi/io.hpp"
#include "smpi/render.hpp"
#include "smpi/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

std::string num(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string indexed(const std::string& stem, std::size_t i, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return stem + "_" + buf + ext;
}

// Line-oriented "key value" report, mirrored to stdout.
class Report {
 public:
  void add(const std::string& key, const std::string& value) { out_ << key << ' ' << value << '\n'; }
  void add(const std::string& key, double value) { add(key, num(value)); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

  void emit(const std::string& path) const {
    std::cout << out_.str();
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw smpi::Error(smpi::ErrorCode::kIo, "cannot write report " + path);
    f << out_.str();
  }

 private:
  std::ostringstream out_;
};

smpi::LayerPrecision parse_precision(const std::string& s) {
  return s == "float32" ? smpi::LayerPrecision::kFloat32 : smpi::LayerPrecision::k8Bit;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string scene;
  std::uint64_t seed = 0;
  std::string out;
  std::string precision = "8bit";
};

int run_synth(const SynthArgs& a) {
  const smpi::SynthOutput s = smpi::synth_scene(a.scene, a.seed);
  const fs::path out(a.out);
  fs::create_directories(out);
  smpi::save_image(s.gt.image, out / "image.png");
  smpi::save_depth(s.gt.depth, out / "depth.png");
  smpi::save_depth(s.gt.depth, out / "depth.depth");
  for (std::size_t i = 0; i < s.gt.plane_masks.size(); ++i) {
    smpi::save_mask(s.gt.plane_masks[i], out / indexed("mask", i, ".png"));
  }
  smpi::save_labels(smpi::plane_labels(s.smpi), out / "labels.png");
  const std::array<smpi::Camera, 1> cams{s.gt.camera};
  smpi::save_trajectory(cams, out / "camera.txt");
  smpi::save_smpi(s.smpi, out / "smpi", parse_precision(a.precision));

  Report r;
  r.add("scene", s.scene.name());
  r.add("num_planar", s.smpi.num_planar());
  r.add("num_nonplanar", s.smpi.num_nonplanar());
  r.emit("");
  return 0;
}

// ---- build -----------------------------------------------------------------

struct BuildArgs {
  std::string image;
  std::string depth;
  std::vector<std::string> masks;
  std::string camera;
  int nonplanar_layers = 8;
  std::string binning = "depth";
  bool feather = false;
  std::string precision = "8bit";
  std::string out;
};

int run_build(const BuildArgs& a) {
  smpi::Raster<smpi::Rgb> image = smpi::load_image(a.image);
  const auto cams = smpi::load_trajectory(a.camera, image.resolution());
  if (cams.empty()) throw smpi::Error(smpi::ErrorCode::kInvalidArgument, "camera file is empty");
  smpi::SceneGT gt{std::move(image), smpi::load_depth(a.depth), {}, cams.front()};
  for (const auto& m : a.masks) gt.plane_masks.push_back(smpi::load_mask(m));

  smpi::BuildOptions opts;
  opts.nonplanar_layers = a.nonplanar_layers;
  opts.binning = a.binning == "disparity" ? smpi::DepthBinning::kUniformDisparity
                                          : smpi::DepthBinning::kUniformDepth;
  opts.feather = a.feather;
  const smpi::BuildResult built = smpi::build_smpi(gt, opts);
  smpi::save_smpi(built.smpi, a.out, parse_precision(a.precision));

  Report r;
  r.add("num_planar", built.smpi.num_planar());
  r.add("num_nonplanar", built.smpi.num_nonplanar());
  for (std::size_t i = 0; i < built.fit_residuals.size(); ++i) {
    r.add("residual_" + std::to_string(i), built.fit_residuals[i]);
  }
  for (std::size_t i = 0; i < built.nonplanar_depths.size(); ++i) {
    r.add("nonplanar_depth_" + std::to_string(i), built.nonplanar_depths[i]);
  }
  r.emit("");
  return 0;
}

// ---- render ----------------------------------------------------------------

struct RenderArgs {
  std::string smpi;
  std::string trajectory;
  std::string out;
  bool depth = false;
  int height = smpi::kDefaultResolution.height;
  int width = smpi::kDefaultResolution.width;
};

int run_render(const RenderArgs& a) {
  const smpi::SMPI s = smpi::load_smpi(a.smpi);
  const auto cams = smpi::load_trajectory(a.trajectory, smpi::Resolution{a.height, a.width});
  const fs::path out(a.out);
  fs::create_directories(out);
  Report r;
  r.add("frames", cams.size());
  double total_ms = 0.0;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const smpi::RenderedView view = smpi::render_novel_view(s, cams[i]);
    const auto t1 = std::chrono::steady_clock::now();
    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    smpi::save_render(view.image, out / indexed("frame", i, ".png"));
    if (a.depth) {
      smpi::save_depth(view.depth, out / indexed("depth", i, ".png"));
      smpi::save_depth(view.depth, out / indexed("depth", i, ".depth"));
    }
    r.add(indexed("holes", i, ""), smpi::count_holes(view.image));
  }
  if (!cams.empty()) {
    r.add("mean_ms", total_ms / static_cast<double>(cams.size()));
    r.add("fps", 1000.0 * static_cast<double>(cams.size()) / std::max(total_ms, 1e-9));
  }
  r.emit("");
  return 0;
}

// ---- merge -----------------------------------------------------------------

struct MergeArgs {
  std::vector<std::string> renders;
  std::string out;
};

int run_merge(const MergeArgs& a) {
  std::vector<smpi::ImageBuffer> views;
  for (const auto& p : a.renders) views.push_back(smpi::load_render(p));
  const smpi::MergedView merged = smpi::merge_views(views);
  smpi::save_render(merged.image, a.out);
  Report r;
  for (std::size_t i = 0; i < views.size(); ++i) {
    r.add("input_holes_" + std::to_string(i), smpi::count_holes(views[i]));
  }
  r.add("hole_count", merged.hole_count);
  r.emit("");
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string kind;
  std::string report;
  std::string curve;
  std::string mask;
};

smpi::LabelRaster labels_from(const std::string& path) {
  if (fs::is_directory(path)) return smpi::plane_labels(smpi::load_smpi(path));
  return smpi::load_labels(path);
}

int run_eval(const EvalArgs& a) {
  Report r;
  r.add("kind", a.kind);
  if (a.kind == "image") {
    const auto pred = smpi::load_render(a.pred).pixels;
    const auto gt = smpi::load_render(a.gt).pixels;
    r.add("psnr", a.mask.empty() ? smpi::psnr(pred, gt) : smpi::psnr(pred, gt, smpi::load_mask(a.mask)));
    r.add("ssim", smpi::ssim(pred, gt));
  } else if (a.kind == "depth") {
    const smpi::DepthMetrics m = smpi::depth_metrics(smpi::load_depth(a.pred), smpi::load_depth(a.gt));
    r.add("rel", m.rel);
    r.add("log10", m.log10);
    r.add("rmse", m.rmse);
    r.add("a1", m.a1);
    r.add("a2", m.a2);
    r.add("a3", m.a3);
    r.add("pixels", m.count);
  } else if (a.kind == "planes") {
    const smpi::SMPI pred = smpi::load_smpi(a.pred);
    const smpi::SMPI gt = smpi::load_smpi(a.gt);
    const auto thresholds = smpi::default_recall_thresholds();
    const smpi::RecallCurve curve =
        smpi::plane_recall(smpi::plane_instances(pred), smpi::plane_instances(gt),
                           gt.reference_camera().intrinsics(), thresholds);
    r.add("gt_planes", gt.num_planar());
    r.add("pred_planes", pred.num_planar());
    std::ostringstream data;
    data << "# depth_threshold_m recall\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
      r.add("recall@" + num(curve.thresholds[i]), curve.recall[i]);
      data << num(curve.thresholds[i]) << ' ' << num(curve.recall[i]) << '\n';
    }
    const std::string curve_path = !a.curve.empty() ? a.curve
                                   : !a.report.empty() ? a.report + ".curve"
                                                       : std::string();
    if (!curve_path.empty()) {
      std::ofstream f(curve_path);
      if (!f) throw smpi::Error(smpi::ErrorCode::kIo, "cannot write " + curve_path);
      f << data.str();
    }
  } else if (a.kind == "seg") {
    const smpi::SegmentationMetrics m = smpi::segmentation_metrics(labels_from(a.pred), labels_from(a.gt));
    r.add("vi", m.vi);
    r.add("ri", m.ri);
    r.add("sc", m.sc);
  }
  r.emit(a.report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural multiplane image toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene with exact ground truth");
  synth_cmd->add_option("--scene", synth.scene, "box | corridor | random(k[, seed=s])")->required();
  synth_cmd->add_option("--seed", synth.seed, "Seed for random scenes");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--precision", synth.precision, "Layer storage")
      ->check(CLI::IsMember({"8bit", "float32"}));

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Build an S-MPI from image, depth and plane masks");
  build_cmd->add_option("--image", build.image)->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--depth", build.depth)->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--masks", build.masks)->check(CLI::ExistingFile);
  build_cmd->add_option("--camera", build.camera, "Trajectory file; the first camera is used")
      ->required()
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--nonplanar-layers", build.nonplanar_layers)->check(CLI::PositiveNumber);
  build_cmd->add_option("--binning", build.binning)->check(CLI::IsMember({"depth", "disparity"}));
  build_cmd->add_flag("--feather", build.feather, "Soften planar mask borders");
  build_cmd->add_option("--precision", build.precision)->check(CLI::IsMember({"8bit", "float32"}));
  build_cmd->add_option("--out", build.out)->required();

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render an S-MPI along a camera trajectory");
  render_cmd->add_option("--smpi", render.smpi)->required();
  render_cmd->add_option("--trajectory", render.trajectory)->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--out", render.out)->required();
  render_cmd->add_flag("--depth", render.depth, "Also write depth maps");
  render_cmd->add_option("--height", render.height)->check(CLI::PositiveNumber);
  render_cmd->add_option("--width", render.width)->check(CLI::PositiveNumber);

  MergeArgs merge;
  auto* merge_cmd = app.add_subcommand("merge", "Confidence-weighted merge of renders");
  merge_cmd->add_option("--renders", merge.renders)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--out", merge.out)->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compute image, depth, plane or segmentation metrics");
  eval_cmd->add_option("--pred", eval.pred)->required()->check(CLI::ExistingPath);
  eval_cmd->add_option("--gt", eval.gt)->required()->check(CLI::ExistingPath);
  eval_cmd->add_option("--kind", eval.kind)->required()->check(CLI::IsMember({"image", "depth", "planes", "seg"}));
  eval_cmd->add_option("--report", eval.report);
  eval_cmd->add_option("--curve", eval.curve, "Recall curve output (planes)");
  eval_cmd->add_option("--mask", eval.mask, "Restrict PSNR to a mask (image)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*build_cmd) return run_build(build);
    if (*render_cmd) return run_render(render);
    if (*merge_cmd) return run_merge(merge);
    if (*eval_cmd) return run_eval(eval);
  } catch (const smpi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == smpi::ErrorCode::kUnknownScene ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
