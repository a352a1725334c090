// morphalign: key-point plus pixel-wise aligned face morphing.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "morphalign/error.hpp"
#include "morphalign/image_io.hpp"
#include "morphalign/pipeline.hpp"
#include "morphalign/synthbench.hpp"

namespace fs = std::filesystem;
using namespace morphalign;

namespace {

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw ParameterError(std::string(what) + " must look like A:B, got \"" + s + "\"");
  }
}

struct CommonOptions {
  MorphSettings settings;
  std::string eye_indices = "0:1";
  std::string roi = "face";
  std::string donor = "a";

  void add_to(CLI::App& app) {
    auto& a = settings.align;
    app.add_option("--lambda", a.lambda, "Smoothness/border weight")->capture_default_str();
    app.add_option("--hp-sigma", a.hp_sigma, "High-pass Gaussian sigma (px)")->capture_default_str();
    app.add_option("--gn-max-iters", a.gn_max_iters, "Gauss-Newton iteration cap")->capture_default_str();
    app.add_option("--gn-energy-tol", a.gn_energy_tol, "Relative energy decrease to stop")->capture_default_str();
    app.add_option("--minres-tol", a.minres_tol, "MINRES relative residual")->capture_default_str();
    app.add_option("--minres-max-iters", a.minres_max_iters, "MINRES iteration cap")->capture_default_str();
    app.add_option("--step-halvings", a.step_halvings_max, "Max step halvings per iteration")->capture_default_str();
    app.add_option("--eye-indices", eye_indices, "Landmark indices of the two eyes, I:J")->capture_default_str();
    app.add_option("--feather-sigma", settings.feather_sigma, "Face mask feathering (px)")->capture_default_str();
    app.add_option("--split-sigma", settings.split_sigma, "Background band split (px)")->capture_default_str();
    app.add_option("--donor", donor, "Background donor image")->check(CLI::IsMember({"a", "b"}))->capture_default_str();
    app.add_option("--roi", roi, "Pixel-wise alignment region")->check(CLI::IsMember({"face", "full"}))->capture_default_str();
    app.add_option("--roi-margin", settings.roi_margin, "Margin around the landmarks for --roi face")->capture_default_str();
  }

  MorphSettings resolve() {
    const auto [i, j] = parse_pair(eye_indices, "--eye-indices");
    settings.eyes = {static_cast<int>(i), static_cast<int>(j)};
    settings.roi_mode = roi == "full" ? RoiMode::full : RoiMode::face;
    settings.donor_is_a = donor == "a";
    settings.align.validate();
    return settings;
  }
};

int exit_code_for(const Error& e, bool single) {
  return single && e.kind() == ErrorKind::numerical ? 2 : 1;
}

int run_single(MorphJob job) {
  const ManifestRow row = run_job_or_throw(job);
  std::cout << "output=" << row.output << "\nbytes=" << row.output_bytes << "\nmethod=" << row.method
            << "\ninitial_energy=" << row.initial_energy << "\nfinal_energy=" << row.final_energy
            << "\niterations=" << row.iterations << "\n";
  return 0;
}

int run_batch_cmd(const fs::path& manifest, int parallel, const fs::path& out_manifest, bool strict,
                  const MorphSettings& settings) {
  const auto jobs = read_manifest(manifest, settings);
  const auto rows = run_batch(jobs, parallel, strict);
  const std::string text = format_manifest(rows);
  if (out_manifest.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_manifest, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + out_manifest.string());
    os << text;
  }
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (r.status != "ok") {
      ++failed;
      std::cerr << "job " << r.id << ": " << r.status << ": " << r.message << "\n";
    }
  std::cerr << rows.size() << " jobs, " << failed << " failed\n";
  return 0;
}

int run_synth(const std::string& kind, const std::string& offset, int size, std::uint64_t seed, double noise,
              const fs::path& dir, const AlignParams& params) {
  PairDescriptor desc;
  desc.kind = parse_shape_kind(kind);
  const auto [dx, dy] = parse_pair(offset, "--offset");
  desc.offset = {dx, dy};
  desc.size = size;
  desc.seed = seed;
  desc.noise_sigma = noise;
  const SyntheticPair pair = make_pair(desc);

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_image(dir / "img1.png", pair.img1);
  save_image(dir / "img2.png", pair.img2);

  const Point2 g1 = ground_truth_w1(pair), g2 = ground_truth_w2(pair);
  {
    std::ofstream os(dir / "ground_truth.txt");
    os.precision(17);
    os << "kind=" << kind << "\nsize=" << size << "\noffset_x=" << dx << "\noffset_y=" << dy
       << "\nseed=" << seed << "\nnoise_sigma=" << noise << "\nw1_x=" << g1.x << "\nw1_y=" << g1.y
       << "\nw2_x=" << g2.x << "\nw2_y=" << g2.y << "\n";
    if (!os) throw IoError("write failed in " + dir.string());
  }

  const AlignResult res = gauss_newton_align(pair.img1, pair.img2, params);
  const EndpointError epe = endpoint_error(res, pair);
  std::ostringstream report;
  report.precision(10);
  report << "lambda=" << params.lambda << "\nhp_sigma=" << params.hp_sigma
         << "\niterations=" << res.iterations_used << "\nconverged=" << (res.converged ? 1 : 0)
         << "\nminres_iterations=" << res.minres_iterations << "\ninitial_energy=" << res.initial_energy
         << "\nfinal_energy=" << res.final_energy() << "\nepe_mean=" << epe.mean << "\nepe_max=" << epe.max
         << "\nsupport_pixels=" << epe.support_pixels << "\n";
  try {
    report << "residual_reduction=" << residual_reduction(pair, res, params) << "\n";
  } catch (const RangeError&) {
    report << "residual_reduction=undefined\n";
  }
  std::ofstream os(dir / "score.txt");
  os << report.str();
  if (!os) throw IoError("write failed in " + dir.string());
  std::cout << report.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Face morphing with pixel-wise alignment of the pre-aligned inputs"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  common.add_to(app);

  MorphJob job;
  job.id = "single";
  std::string method = "pw", jpeg_target, dump_dir;
  auto* single = app.add_subcommand("single", "Morph one pair of portraits");
  single->add_option("--image-a", job.image_a, "First portrait")->required();
  single->add_option("--image-b", job.image_b, "Second portrait")->required();
  single->add_option("--lm-a", job.landmarks_a, "Landmarks of the first portrait")->required();
  single->add_option("--lm-b", job.landmarks_b, "Landmarks of the second portrait")->required();
  single->add_option("--alpha", job.alpha, "Blending factor")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  single->add_option("--method", method, "simple or pw")->check(CLI::IsMember({"simple", "pw"}))->capture_default_str();
  single->add_option("--out", job.output, "Output image (.png or .jpg)")->required();
  single->add_option("--jpeg-target", jpeg_target, "JPEG size window MIN:MAX in kB (1 kB = 1024 B)");
  single->add_option("--dump-warps", dump_dir, "Directory for warp fields and debug images");

  fs::path manifest, out_manifest;
  int parallel = 1;
  bool strict = false;
  auto* batch = app.add_subcommand("batch", "Run a CSV manifest of morph jobs");
  batch->add_option("--manifest", manifest, "Input manifest CSV")->required();
  batch->add_option("--parallel", parallel, "Concurrent jobs")->check(CLI::PositiveNumber)->capture_default_str();
  batch->add_option("--out-manifest", out_manifest, "Result manifest (stdout if omitted)");
  batch->add_flag("--strict", strict, "Stop at the first failing job");

  std::string kind = "ring", offset = "2:0";
  int size = 128;
  std::uint64_t seed = 7;
  double noise = 0.0;
  fs::path synth_dir;
  auto* synth = app.add_subcommand("synth", "Generate and score a synthetic misaligned pair");
  synth->add_option("--kind", kind, "disk, ring, dot or arc")->check(CLI::IsMember({"disk", "ring", "dot", "arc"}))->capture_default_str();
  synth->add_option("--offset", offset, "Displacement of the second image, DX:DY px")->capture_default_str();
  synth->add_option("--size", size, "Image side length")->capture_default_str();
  synth->add_option("--seed", seed, "Noise seed")->capture_default_str();
  synth->add_option("--noise", noise, "Gaussian noise sigma")->capture_default_str();
  synth->add_option("--out", synth_dir, "Output directory")->required();

  std::uint64_t portrait_seed = 1;
  int pw = 600, ph = 720;
  fs::path portrait_image, portrait_lm;
  auto* portrait = app.add_subcommand("portrait", "Render a synthetic test portrait with landmarks");
  portrait->add_option("--seed", portrait_seed, "Subject seed")->capture_default_str();
  portrait->add_option("--width", pw)->capture_default_str();
  portrait->add_option("--height", ph)->capture_default_str();
  portrait->add_option("--out-image", portrait_image)->required();
  portrait->add_option("--out-landmarks", portrait_lm)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors map to exit code 1; --help and friends exit 0.
    return app.exit(e) == 0 ? 0 : 1;
  }

  const bool is_single = single->parsed();
  try {
    const MorphSettings settings = common.resolve();
    if (is_single) {
      job.settings = settings;
      job.method = parse_method(method);
      if (!jpeg_target.empty()) job.jpeg_target = parse_jpeg_target(jpeg_target);
      if (!dump_dir.empty()) job.dump_dir = fs::path(dump_dir);
      return run_single(job);
    }
    if (batch->parsed()) return run_batch_cmd(manifest, parallel, out_manifest, strict, settings);
    if (synth->parsed()) return run_synth(kind, offset, size, seed, noise, synth_dir, settings.align);
    if (portrait->parsed()) {
      const SyntheticPortrait p = make_portrait(portrait_seed, pw, ph);
      save_image(portrait_image, p.image);
      save_landmarks(portrait_lm, p.landmarks);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "morphalign: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code_for(e, is_single);
  } catch (const std::exception& e) {
    std::cerr << "morphalign: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
