// Copyright 2026 The DepthFuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "depthfuse/depthfuse.h"
#include "depthfuse/oracle.h"

namespace depthfuse::cli {
namespace {

namespace fs = std::filesystem;

struct DensifyArgs {
  std::string sparse;
  std::string prior;
  std::string config;
  bool align = false;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string out = "pseudo_depth.png";
  std::string report;
};

struct RefineArgs {
  std::string init;
  std::string sensor;
  std::string mask;
  std::string config;
  std::string image;
  std::string out = "refined.png";
};

struct EvalArgs {
  std::string pred;
  std::string gt;
  double d_max = kKittiMaxDepth;
  std::string csv;
};

struct SynthArgs {
  int height = 0;
  int width = 0;
  std::uint64_t seed = 0;
  std::string outdir;
};

// Appends one row, writing the header first when the file is new or empty.
void AppendCsv(const fs::path& path, const std::string& header,
               const std::string& row) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  if (fresh) out << header << '\n';
  out << row << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void RequireExists(std::initializer_list<std::pair<const char*, std::string>>
                       inputs) {
  std::string missing;
  for (const auto& [flag, path] : inputs) {
    if (path.empty() || fs::exists(path)) continue;
    if (!missing.empty()) missing += ", ";
    missing += std::string(flag) + " " + path;
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kIo, "missing input file(s): " + missing);
  }
}

int CmdDensify(const DensifyArgs& args, std::ostream& out, std::ostream& err) {
  RequireExists({{"--sparse", args.sparse},
                 {"--prior", args.prior},
                 {"--config", args.config}});
  RunConfig config = args.config.empty() ? RunConfig{} : LoadConfig(args.config);
  if (args.tol) config.cg.rel_tolerance = *args.tol;
  if (args.max_iter) config.cg.max_iterations = *args.max_iter;
  config.align = config.align || args.align;
  config.cg.Validate();

  const DepthGrid sparse = ReadDepthPng(args.sparse);
  DepthGrid prior = ReadFloatRaster(args.prior);
  RequireSameShape(sparse, prior, "sparse", "prior");

  double scale = 1.0;
  double shift = 0.0;
  if (config.align) {
    AlignResult aligned = ScaleShiftAlign(prior, sparse);
    scale = aligned.scale;
    shift = aligned.shift;
    prior = std::move(aligned.aligned);
  }

  const DensifyResult result = Densify(sparse, prior, config.cg);
  WriteDepthPng(result.depth, args.out);

  std::ostringstream row;
  row.precision(17);
  row << result.report.iterations << ',' << result.report.final_rel_residual
      << ',' << (result.report.converged ? 1 : 0) << ',' << scale << ','
      << shift;
  if (!args.report.empty()) {
    AppendCsv(args.report, "iterations,final_rel_residual,converged,scale,shift",
              row.str());
  }
  out << "densify: " << ShapeString(sparse.height(), sparse.width())
      << " iterations=" << result.report.iterations
      << " rel_residual=" << result.report.final_rel_residual
      << " converged=" << (result.report.converged ? "true" : "false")
      << " -> " << args.out << '\n';
  if (!result.report.converged) {
    err << "warning: solver did not reach tolerance "
        << config.cg.rel_tolerance << "; output written anyway\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int CmdRefine(const RefineArgs& args, std::ostream& out, std::ostream&) {
  RequireExists({{"--init", args.init},
                 {"--sensor", args.sensor},
                 {"--mask", args.mask},
                 {"--config", args.config},
                 {"--image", args.image}});
  const RunConfig config = LoadConfig(args.config);
  const DepthGrid init = ReadDepthPng(args.init);
  const DepthGrid sensor = ReadDepthPng(args.sensor);
  const BinaryMask mask = ReadMaskPng(args.mask);
  RequireSameShape(init, sensor, "init", "sensor");
  RequireSameShape(init, mask, "init", "mask");
  const DepthGrid image = args.image.empty() ? init : ReadFloatRaster(args.image);
  RequireSameShape(init, image, "init", "image");

  const FeatureGrid features = HandcraftedFeatures(image, init);
  const DepthGrid refined = Refine(init, sensor, mask, features, config.refine);
  WriteDepthPng(refined, args.out);
  out << "refine: " << ShapeString(init.height(), init.width())
      << " iterations=" << config.refine.iterations << " -> " << args.out
      << '\n';
  return kExitOk;
}

int CmdEval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  RequireExists({{"--pred", args.pred}, {"--gt", args.gt}});
  const DepthGrid pred = ReadDepthPng(args.pred);
  const DepthGrid gt = ReadDepthPng(args.gt);
  RequireSameShape(pred, gt, "pred", "gt");
  const EvalReport report = Evaluate(pred, gt, args.d_max);
  out << ToKeyValue(report);
  if (!args.csv.empty()) AppendCsv(args.csv, CsvHeader(), ToCsvRow(report));
  if (report.valid_pixel_count == 0) {
    err << "warning: ground truth " << args.gt
        << " has no valid pixels; metrics use n = 1\n";
    return kExitEmptyMask;
  }
  return kExitOk;
}

int CmdSynth(const SynthArgs& args, std::ostream& out, std::ostream&) {
  const oracle::SyntheticScene scene =
      oracle::SynthScene(args.height, args.width, args.seed);
  const fs::path dir(args.outdir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create " + dir.string() + ": " + ec.message());
  }
  WriteDepthPng(scene.dense_gt, dir / "gt.png");
  WriteFloatRaster(scene.prior, dir / "prior.pfm");
  WriteDepthPng(scene.sparse, dir / "sparse.png");
  WriteMaskPng(scene.mask, dir / "mask.png");
  out << "synth: " << ShapeString(args.height, args.width)
      << " seed=" << args.seed << " anchors=" << scene.mask.Count() << " -> "
      << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Sparse-to-dense metric depth: Poisson fusion and refinement",
               "depthfuse"};
  app.require_subcommand(1);

  DensifyArgs densify;
  auto* densify_cmd = app.add_subcommand(
      "densify", "Fuse sparse anchors with a dense relative prior");
  densify_cmd->add_option("--sparse", densify.sparse, "16-bit depth PNG")
      ->required();
  densify_cmd->add_option("--prior", densify.prior, "PFM prior")->required();
  densify_cmd->add_option("--config", densify.config, "key=value config file");
  densify_cmd->add_flag("--align", densify.align,
                        "Least-squares scale/shift the prior to the anchors");
  densify_cmd->add_option("--tol", densify.tol, "CG relative tolerance");
  densify_cmd->add_option("--max-iter", densify.max_iter, "CG iteration cap");
  densify_cmd->add_option("--out", densify.out, "Output depth PNG");
  densify_cmd->add_option("--report", densify.report, "Append solve report CSV");

  RefineArgs refine;
  auto* refine_cmd = app.add_subcommand(
      "refine", "Hyperbolic-affinity propagation with sensor anchoring");
  refine_cmd->add_option("--init", refine.init, "Initial depth PNG")
      ->required();
  refine_cmd->add_option("--sensor", refine.sensor, "Sensor depth PNG")
      ->required();
  refine_cmd->add_option("--mask", refine.mask, "Observation mask PNG")
      ->required();
  refine_cmd->add_option("--config", refine.config, "key=value config file")
      ->required();
  refine_cmd->add_option("--image", refine.image,
                         "Intensity PFM for features (defaults to init)");
  refine_cmd->add_option("--out", refine.out, "Output depth PNG");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Masked RMSE/MAE and losses");
  eval_cmd->add_option("--pred", eval.pred, "Predicted depth PNG")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth depth PNG")->required();
  eval_cmd->add_option("--d-max", eval.d_max, "Normalization depth (m)");
  eval_cmd->add_option("--csv", eval.csv, "Append report CSV row");

  SynthArgs synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "Write a synthetic scene (gt/prior/sparse/mask)");
  synth_cmd->add_option("--height", synth.height)->required();
  synth_cmd->add_option("--width", synth.width)->required();
  synth_cmd->add_option("--seed", synth.seed)->required();
  synth_cmd->add_option("--outdir", synth.outdir)->required();

  std::vector<const char*> argv = {"depthfuse"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (*densify_cmd) return CmdDensify(densify, out, err);
    if (*refine_cmd) return CmdRefine(refine, out, err);
    if (*eval_cmd) return CmdEval(eval, out, err);
    if (*synth_cmd) return CmdSynth(synth, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace depthfuse::cli
