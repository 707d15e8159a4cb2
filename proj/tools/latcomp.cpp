#include "latcomp/bench.hpp"
#include "latcomp/error.hpp"
#include "latcomp/io.hpp"
#include "latcomp/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace latcomp;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitOverBudget = 3;

// Where frames come from: a bundle on disk or a generated preset.
struct SourceOptions {
  std::string seq;
  std::string scene;
  size_t frames = 90;
  uint64_t seed = 0;
  int width = 640;
  int height = 360;

  void add(CLI::App* app, bool allow_scene) {
    auto* seq_opt = app->add_option("--seq", seq, "sequence bundle directory");
    if (!allow_scene) {
      seq_opt->required();
      return;
    }
    auto* scene_opt = app->add_option("--scene", scene, "generate a preset instead of reading --seq")
                          ->check(CLI::IsMember({"corridor", "frontal"}));
    seq_opt->excludes(scene_opt);
    app->add_option("--frames", frames, "frames to generate with --scene")->capture_default_str();
    app->add_option("--seed", seed, "seed for --scene and the link emulation")->capture_default_str();
    app->add_option("--width", width, "image width for --scene")->capture_default_str();
    app->add_option("--height", height, "image height for --scene")->capture_default_str();
  }

  DepthSource open() const {
    if (!seq.empty()) return make_file_source(seq);
    if (scene.empty()) throw CLI::RequiredError("--seq or --scene");
    SyntheticOptions o;
    o.preset = parse_scene_preset(scene);
    o.frames = frames;
    o.seed = seed;
    o.width = width;
    o.height = height;
    return make_synthetic_source(make_synthetic_sequence(o));
  }
};

struct RenderFlags {
  std::string method = "pointcloud";
  double gamma = SplatConfig{}.gamma;
  double radius = SplatConfig{}.radius_constant;
  std::string inpaint = "pullpush";
  int threads = 0;

  void add(CLI::App* app, bool with_method, bool with_threads = true) {
    if (with_method) {
      app->add_option("--method", method)
          ->check(CLI::IsMember({"pointcloud", "homography", "cropscale"}))
          ->capture_default_str();
    }
    app->add_option("--gamma", gamma, "softmax blending temperature")->capture_default_str();
    app->add_option("--radius", radius, "sphere radius constant")->capture_default_str();
    app->add_option("--inpaint", inpaint)
        ->check(CLI::IsMember({"pullpush", "diffusion", "none"}))
        ->capture_default_str();
    if (with_threads) {
      app->add_option("--threads", threads, "render threads, 0 = all")->capture_default_str();
    }
  }

  CompensatorConfig config() const {
    CompensatorConfig cfg;
    cfg.method = parse_method(method);
    cfg.splat.gamma = gamma;
    cfg.splat.radius_constant = radius;
    cfg.splat.threads = threads;
    cfg.inpaint.method = parse_inpaint_method(inpaint);
    cfg.splat.validate();
    cfg.inpaint.validate();
    return cfg;
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "'" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

// Every option of the subcommand with its effective value, defaults included.
void write_run_config(const fs::path& dir, const CLI::App& sub, int argc, char** argv) {
  json j;
  j["command"] = sub.get_name();
  j["argv"] = std::vector<std::string>(argv, argv + argc);
  json options = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    const auto& results = opt->results();
    if (!results.empty()) {
      options[opt->get_name()] = results.size() == 1 ? json(results[0]) : json(results);
    } else {
      options[opt->get_name()] = opt->get_default_str();
    }
  }
  j["options"] = options;
  fs::create_directories(dir);
  std::ofstream out(dir / "run_config.json");
  out << j.dump(2) << '\n';
}

int cmd_synth(const SourceOptions& src, const std::string& out_dir, double dropout) {
  SyntheticOptions o;
  o.preset = parse_scene_preset(src.scene.empty() ? "corridor" : src.scene);
  o.frames = src.frames;
  o.seed = src.seed;
  o.width = src.width;
  o.height = src.height;
  SyntheticSequence seq = make_synthetic_sequence(o);
  seq.depth_dropout = dropout;
  seq.dropout_seed = src.seed;
  const DepthSource source = make_synthetic_source(seq);
  write_bundle(out_dir, sequence_info(source), [&](size_t i) {
    FrameBundle f = load_frame(source, i);
    return FrameFiles{std::move(f.image), std::move(f.depth)};
  });
  std::cout << "wrote " << o.frames << " frames to " << out_dir << '\n';
  return 0;
}

int cmd_render(const SourceOptions& src, const RenderFlags& flags, size_t frame, int delay,
               bool predicted, const std::string& out_dir) {
  const DepthSource source = src.open();
  const SequenceInfo& info = sequence_info(source);
  if (delay < 0) throw CLI::ValidationError("--delay", "must be >= 0");
  const size_t target = frame + static_cast<size_t>(delay);
  if (target >= info.frame_count()) {
    throw Error(ErrorKind::kData, "frame " + std::to_string(frame) + " + delay " +
                                      std::to_string(delay) + " is past the last frame (" +
                                      std::to_string(info.frame_count()) + " frames)");
  }
  const FrameBundle a = load_frame(source, frame);
  const FrameBundle truth = load_frame(source, target);
  RigidPose dst = truth.pose;
  if (predicted) {
    const KinematicParams k = info.kinematics();
    const PlanarPose start = camera_to_planar(a.pose, k);
    const Prediction p = predict(start, a.timestamp, info.commands.up_to(truth.timestamp),
                                 truth.timestamp, k);
    dst = compose(a.pose, compose(invert(planar_to_camera(start, k)), planar_to_camera(p.pose, k)));
  }
  CompensatorConfig cfg = flags.config();
  if (cfg.method == Method::kCropScale) {
    cfg.crop_scale = calibrate_crop_scale(info.intrinsics, load_frame(source, 0).depth);
  }
  const CompensatedFrame out = compensate(a, dst, info, cfg);
  fs::create_directories(out_dir);
  write_png(fs::path(out_dir) / "compensated.png", out.image);
  write_mask_png(fs::path(out_dir) / "holes.png", out.holes);
  write_png(fs::path(out_dir) / "truth.png", truth.image);
  std::printf("psnr %.3f dB (stale frame %.3f dB), holes %.2f%%, render %.1f ms\n",
              psnr(out.image, truth.image), psnr(a.image, truth.image), 100.0 * out.hole_fraction,
              out.timings.render_ms);
  return 0;
}

int cmd_evaluate(const SourceOptions& src, const RenderFlags& flags, const std::string& delays,
                 const std::string& methods, size_t stride, bool predicted, const std::string& out) {
  EvalConfig cfg;
  cfg.delays = parse_int_list(delays, "--delays");
  cfg.methods.clear();
  for (const auto& m : split_list(methods)) cfg.methods.push_back(parse_method(m));
  cfg.compensator = flags.config();
  cfg.frame_stride = stride;
  cfg.predicted_pose = predicted;
  const auto rows = run_offline_eval(src.open(), cfg);
  const fs::path out_path(out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream file(out_path);
  write_eval_csv(file, rows);
  if (!file) throw Error(ErrorKind::kData, "cannot write " + out);

  for (Method m : cfg.methods) {
    for (int d : cfg.delays) {
      double sum = 0;
      size_t n = 0;
      for (const auto& r : rows) {
        if (r.method == m && r.delay_steps == d) {
          sum += r.psnr;
          ++n;
        }
      }
      std::printf("%-10s t+%-3d mean psnr %.3f dB over %zu frames\n", to_string(m).c_str(), d,
                  n ? sum / n : NAN, n);
    }
  }
  return 0;
}

NetworkConditions load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kData, "cannot open profile " + path);
  NetworkConditions c;
  json j;
  try {
    j = json::parse(in);
    for (const auto& [key, value] : j.items()) {
      if (key == "delay_ms") c.base_delay = value.get<double>() / 1000.0;
      else if (key == "jitter_ms") c.jitter_stddev = value.get<double>() / 1000.0;
      else if (key == "skip") c.skip = value.get<int>();
      else if (key == "drop") c.drop_probability = value.get<double>();
      else if (key == "seed") c.seed = value.get<uint64_t>();
      else throw Error(ErrorKind::kData, "profile " + path + ": unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kData, "profile " + path + ": " + e.what());
  }
  return c;
}

struct SimulateFlags {
  double delay_ms = 0;
  double jitter_ms = 0;
  int skip = 1;
  double drop = 0;
  std::string profile;
  std::string horizon = "now";
  int steps = 0;
  bool wall_clock = false;
  bool timings = false;
  bool no_frames = false;
};

int cmd_simulate(const CLI::App& sub, const SourceOptions& src, const RenderFlags& flags,
                 const SimulateFlags& sim, const std::string& out_dir) {
  auto set = [&](const char* flag) { return sub.count(flag) > 0; };
  NetworkConditions cond;
  if (!sim.profile.empty()) cond = load_profile(sim.profile);
  // Flags given on the command line override the profile.
  if (!set("--profile") || set("--delay-ms")) cond.base_delay = sim.delay_ms / 1000.0;
  if (!set("--profile") || set("--jitter-ms")) cond.jitter_stddev = sim.jitter_ms / 1000.0;
  if (!set("--profile") || set("--skip")) cond.skip = sim.skip;
  if (!set("--profile") || set("--drop")) cond.drop_probability = sim.drop;
  if (!set("--profile") || set("--seed")) cond.seed = src.seed;
  cond.validate();

  LiveConfig cfg;
  cfg.compensator = flags.config();
  cfg.horizon = sim.horizon == "now" ? HorizonPolicy::kCompensateToNow : HorizonPolicy::kFixedSteps;
  cfg.fixed_steps = sim.steps;
  cfg.wall_clock = sim.wall_clock;
  cfg.measure_timings = sim.timings || sim.wall_clock;

  const DepthSource source = src.open();
  const fs::path dir(out_dir);
  fs::create_directories(dir / "frames");
  FrameSink sink;
  if (!sim.no_frames) {
    sink = [&](const FrameRecord& r, const ImageBuffer& image) {
      write_png(dir / "frames" / format_frame_path("%06d.png", r.tick), image);
    };
  }
  const FrameLog log = run_live(source, cond, cfg, sink);
  {
    std::ofstream f(dir / "frame_log.csv");
    write_frame_log_csv(f, log);
  }

  size_t violations = 0, scored = 0, beats = 0, overruns = 0, waiting = 0;
  std::vector<size_t> sources;
  for (const auto& r : log) {
    if (r.waiting) {
      ++waiting;
      continue;
    }
    if (r.source_arrival_time > r.display_time) ++violations;
    if (r.overrun) ++overruns;
    if (sources.empty() || sources.back() != r.source_index) sources.push_back(r.source_index);
    if (!std::isnan(r.psnr_compensated)) {
      ++scored;
      if (r.psnr_compensated > r.psnr_raw) ++beats;
    }
  }
  const SequenceInfo& info = sequence_info(source);
  const auto deliveries = emulate_link(info.timestamps, cond);
  double rate = 0;
  if (deliveries.size() > 1) {
    rate = static_cast<double>(deliveries.size() - 1) /
           (deliveries.back().capture_time - deliveries.front().capture_time);
  }
  std::printf("ticks %zu (waiting %zu), delivered %zu frames at %.2f FPS\n", log.size(), waiting,
              deliveries.size(), rate);
  std::printf("causality violations %zu, overruns %zu\n", violations, overruns);
  if (scored) {
    std::printf("compensated beats stale feed on %zu / %zu scored frames (%.1f%%)\n", beats, scored,
                100.0 * beats / scored);
  }
  return violations == 0 ? 0 : kExitData;
}

int cmd_bench(const SourceOptions& src, const RenderFlags& flags, const std::string& threads,
              int repeats, int delay, double budget_ms) {
  const DepthSource source = src.open();
  const SequenceInfo& info = sequence_info(source);
  const size_t target = std::min(info.frame_count() - 1, static_cast<size_t>(std::max(0, delay)));
  const FrameBundle frame = load_frame(source, 0);
  const CompensatorConfig cfg = flags.config();
  const auto counts = parse_int_list(threads, "--threads");
  const BenchReport report = bench_render(frame, info.camera_pose(target), info.intrinsics, cfg.splat,
                                          cfg.inpaint, counts, repeats);
  std::printf("%dx%d, %zu spheres, %d repeats\n", info.intrinsics.width, info.intrinsics.height,
              report.points, repeats);
  const double base = report.runs.front().median_ms;
  bool exact = true;
  for (const auto& r : report.runs) {
    exact = exact && r.matches_first;
    std::printf("threads %2d  median %8.2f ms  min %8.2f ms  speedup %5.2fx  %s\n", r.threads,
                r.median_ms, r.min_ms, base / r.median_ms, r.matches_first ? "bit-exact" : "DIFFERS");
  }
  std::printf("hardware threads available: %u\n", std::thread::hardware_concurrency());
  if (!exact) {
    std::fprintf(stderr, "output differs across thread counts\n");
    return kExitData;
  }
  const double best = report.runs.back().median_ms;
  if (best > budget_ms) {
    std::fprintf(stderr, "median %.2f ms exceeds the %.2f ms budget\n", best, budget_ms);
    return kExitOverBudget;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency compensation for delayed robot video"};
  app.require_subcommand(1);

  SourceOptions src;
  RenderFlags flags;

  auto* synth = app.add_subcommand("synth", "generate a synthetic sequence bundle");
  std::string synth_out;
  double dropout = 0.0;
  synth->add_option("--scene", src.scene)
      ->check(CLI::IsMember({"corridor", "frontal"}))
      ->default_str("corridor");
  synth->add_option("--frames", src.frames)->capture_default_str();
  synth->add_option("--seed", src.seed)->capture_default_str();
  synth->add_option("--width", src.width)->capture_default_str();
  synth->add_option("--height", src.height)->capture_default_str();
  synth->add_option("--depth-dropout", dropout, "fraction of depth pixels invalidated")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_option("--out", synth_out)->required();

  auto* render = app.add_subcommand("render", "compensate a single frame");
  size_t render_frame = 0;
  int render_delay = 5;
  bool render_predicted = false;
  std::string render_out;
  src.add(render, true);
  flags.add(render, true);
  render->add_option("--frame", render_frame)->capture_default_str();
  render->add_option("--delay", render_delay, "steps between source and target frame")
      ->capture_default_str();
  render->add_flag("--predicted-pose", render_predicted, "integrate commands instead of true pose");
  render->add_option("--out", render_out)->required();

  auto* evaluate = app.add_subcommand("evaluate", "offline evaluation over a sequence");
  std::string delays = "1,5,10", methods = "pointcloud,homography,cropscale", eval_out;
  size_t stride = 1;
  bool eval_predicted = false;
  src.add(evaluate, true);
  flags.add(evaluate, false);
  evaluate->add_option("--delays", delays)->capture_default_str();
  evaluate->add_option("--methods", methods)->capture_default_str();
  evaluate->add_option("--stride", stride, "evaluate every n-th source frame")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate->add_flag("--predicted-pose", eval_predicted);
  evaluate->add_option("--out", eval_out, "metrics CSV")->required();

  auto* simulate = app.add_subcommand("simulate", "live compensation over an emulated link");
  SimulateFlags sim;
  std::string sim_out;
  src.add(simulate, true);
  flags.add(simulate, true);
  simulate->add_option("--delay-ms", sim.delay_ms)->capture_default_str();
  simulate->add_option("--jitter-ms", sim.jitter_ms)->capture_default_str();
  simulate->add_option("--skip", sim.skip, "keep one of every n frames")->capture_default_str();
  simulate->add_option("--drop", sim.drop, "drop probability")->capture_default_str();
  simulate->add_option("--profile", sim.profile, "JSON network profile")->check(CLI::ExistingFile);
  simulate->add_option("--horizon", sim.horizon)
      ->check(CLI::IsMember({"now", "steps"}))
      ->capture_default_str();
  simulate->add_option("--steps", sim.steps, "prediction steps for --horizon steps")
      ->capture_default_str();
  simulate->add_flag("--wall-clock", sim.wall_clock, "pace by the real clock with worker threads");
  simulate->add_flag("--timings", sim.timings, "record stage timings in the log");
  simulate->add_flag("--no-frames", sim.no_frames, "skip writing frame PNGs");
  simulate->add_option("--out", sim_out)->required();

  auto* bench = app.add_subcommand("bench", "rasterizer throughput");
  std::string bench_threads = "1,2,4,8";
  int repeats = 5, bench_delay = 5;
  double budget_ms = 100.0;
  std::string bench_out;
  SourceOptions bench_src;
  bench_src.frames = 10;
  bench_src.width = 1280;
  bench_src.height = 720;
  bench_src.add(bench, true);
  flags.add(bench, false, false);
  bench->add_option("--threads", bench_threads)->capture_default_str();
  bench->add_option("--repeats", repeats)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--delay", bench_delay, "target frame index")->capture_default_str();
  bench->add_option("--budget-ms", budget_ms)->capture_default_str();
  bench->add_option("--out", bench_out, "directory for run_config.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      write_run_config(synth_out, *synth, argc, argv);
      return cmd_synth(src, synth_out, dropout);
    }
    if (render->parsed()) {
      write_run_config(render_out, *render, argc, argv);
      return cmd_render(src, flags, render_frame, render_delay, render_predicted, render_out);
    }
    if (evaluate->parsed()) {
      const fs::path out(eval_out);
      write_run_config(out.has_parent_path() ? out.parent_path() : fs::path("."), *evaluate, argc, argv);
      return cmd_evaluate(src, flags, delays, methods, stride, eval_predicted, eval_out);
    }
    if (simulate->parsed()) {
      write_run_config(sim_out, *simulate, argc, argv);
      return cmd_simulate(*simulate, src, flags, sim, sim_out);
    }
    if (bench->parsed()) {
      if (!bench_out.empty()) write_run_config(bench_out, *bench, argc, argv);
      return cmd_bench(bench_src, flags, bench_threads, repeats, bench_delay, budget_ms);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kData ? kExitData : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
