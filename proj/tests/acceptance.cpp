// Acceptance criteria 1-10. Each case prints one "[PASS]/[FAIL] criterion N"
// line with the measured numbers, then asserts.
#include "latcomp/bench.hpp"
#include "latcomp/error.hpp"
#include "latcomp/pipeline.hpp"
#include "support.hpp"

#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <thread>

using namespace latcomp;

namespace {

void report(int n, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

SyntheticOptions preset(ScenePreset p, size_t frames, int w = 640, int h = 360) {
  SyntheticOptions o;
  o.preset = p;
  o.frames = frames;
  o.width = w;
  o.height = h;
  return o;
}

Mask inverted(const Mask& m) {
  Mask out = m;
  for (auto& v : out.data()) v = v ? 0 : 1;
  return out;
}

}  // namespace

TEST_CASE("criterion 1: backproject/project round trip") {
  std::mt19937_64 rng(101);
  const auto t0 = std::chrono::steady_clock::now();
  double px_err = 0, z_err = 0;
  for (int k = 0; k < 100; ++k) {
    const int w = 160, h = 120;
    CameraIntrinsics intr = CameraIntrinsics::centered(w, h);
    intr.fy *= 1.1;
    const DepthMap depth = testing::random_depth(rng, w, h, 0.2, 20.0, 0.1);
    const ImageBuffer img = testing::random_image(rng, w, h);
    const RigidPose pose = testing::random_pose(rng);
    const auto cloud = backproject(intr, depth, img);
    const auto proj = project(intr, cloud, pose, pose, 0.05);
    REQUIRE(proj.size() == depth.valid_count());
    for (const auto& p : proj) {
      const int u = p.source_pixel % w, v = p.source_pixel / w;
      px_err = std::max({px_err, std::abs(p.pixel.x() - u), std::abs(p.pixel.y() - v)});
      z_err = std::max(z_err, std::abs(p.depth - depth.at(p.source_pixel)));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = px_err <= 1e-4 && z_err <= 1e-9 && secs < 5.0;
  report(1, pass, fmt("max pixel error %.3g px, max depth error %.3g m, %.2f s for 100 maps", px_err,
                      z_err, secs));
  CHECK(pass);
}

TEST_CASE("criterion 2: reprojection fidelity on the corridor") {
  const SyntheticSequence seq = make_synthetic_sequence(preset(ScenePreset::kCorridor, 30));
  const auto& intr = seq.info.intrinsics;
  const std::vector<Eigen::Vector3d> offsets = {
      {0.2, 0, 0}, {-0.2, 0, 0}, {0, 0, 0.2}, {0.14, 0, 0.14}, {-0.1, 0, 0.2}};
  double worst_psnr = 1e9, worst_holes = 0;
  size_t renders = 0;
  for (size_t i = 0; i < seq.info.frame_count(); i += 3) {
    const RigidPose src = seq.info.camera_pose(i);
    const auto view = raycast(seq.scene, intr, src);
    for (const auto& off : offsets) {
      const RigidPose dst = compose(src, RigidPose::from_translation(off));
      const auto truth = raycast(seq.scene, intr, dst);
      const auto r = render_compensated(view.image, view.depth, intr, src, dst, SplatConfig{});
      worst_psnr = std::min(worst_psnr, psnr(r.image, truth.image, inverted(r.hole_mask)));
      worst_holes = std::max(worst_holes, r.hole_fraction());
      ++renders;
    }
  }
  const bool pass = worst_psnr >= 30.0 && worst_holes < 0.25;
  report(2, pass, fmt("%.0f renders, min non-hole PSNR %.2f dB, max hole fraction %.2f%%",
                      static_cast<double>(renders), worst_psnr, 100 * worst_holes));
  CHECK(pass);
}

TEST_CASE("criterion 3: kinematics against a fine Euler oracle") {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> v(-1.5, 1.5), w(-3.0, 3.0), p(-5, 5);
  std::uniform_int_distribution<int> count(1, 12);
  const KinematicParams params;
  const double dt = 1e-5;
  double pos_err = 0, head_err = 0;
  for (int s = 0; s < 100; ++s) {
    // Command switches fall on the oracle's step grid so the only error left
    // is the integrator's own.
    const int n = count(rng);
    std::vector<long> first_step;
    std::vector<VelocityCommand> cmds;
    for (int k = 0; k < n; ++k) {
      first_step.push_back(k * (100000L / n));
      cmds.push_back({static_cast<double>(first_step.back()) * dt, v(rng), w(rng)});
    }
    const PlanarPose start{p(rng), p(rng), normalize_angle(p(rng))};
    const auto got = predict(start, 0.0, CommandBuffer(cmds), 1.0, params).pose;

    double x = start.x, y = start.y, th = start.theta;
    const long steps = std::lround(1.0 / dt);
    for (long i = 0; i < steps; ++i) {
      size_t k = 0;
      while (k + 1 < cmds.size() && first_step[k + 1] <= i) ++k;
      x += params.mu * cmds[k].v * std::cos(th) * dt;
      y += params.mu * cmds[k].v * std::sin(th) * dt;
      th += params.eta * cmds[k].omega * dt;
    }
    pos_err = std::max(pos_err, std::hypot(got.x - x, got.y - y));
    head_err = std::max(head_err, std::abs(normalize_angle(got.theta - th)));
  }
  const auto q = step({0, 0, 0}, {0, 1.0, std::numbers::pi / 2}, 1.0, params);
  const double g = 2 / std::numbers::pi;
  const double quarter_err =
      std::max({std::abs(q.x - g), std::abs(q.y - g), std::abs(q.theta - std::numbers::pi / 2)});
  const bool pass = pos_err <= 1e-4 && head_err <= 1e-6 && quarter_err <= 1e-12;
  report(3, pass, fmt("max position error %.3g m, heading error %.3g rad, quarter circle error %.3g",
                      pos_err, head_err, quarter_err));
  CHECK(pass);
}

TEST_CASE("criterion 4: softmax blending limits") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> z(0.5, 15.0), u(0, 1);
  const auto intr = CameraIntrinsics::centered(41, 41);
  double hard_err = 0, soft_err = 0;
  for (int k = 0; k < 50; ++k) {
    double z1 = z(rng), z2 = z(rng);
    if (std::abs(z1 - z2) < 0.05) z2 = z1 + 0.5;
    const Color c1(u(rng), u(rng), u(rng)), c2(u(rng), u(rng), u(rng));
    ColoredPointCloud cloud;
    // Both spheres sit on the optical axis, so both cover the center pixel.
    cloud.positions = {{0, 0, z1}, {0, 0, z2}};
    cloud.colors = {c1, c2};
    cloud.source_pixel = {0, 1};
    const Color near = z1 < z2 ? c1 : c2;
    SplatConfig cfg;
    cfg.gamma = 1e-6;
    const auto hard = rasterize(cloud, RigidPose::identity(), RigidPose::identity(), intr, cfg);
    hard_err = std::max<double>(hard_err, (hard.image.pixel(20, 20) - near).cwiseAbs().maxCoeff());
    cfg.gamma = 1e6;
    const auto soft = rasterize(cloud, RigidPose::identity(), RigidPose::identity(), intr, cfg);
    soft_err = std::max<double>(soft_err,
                                (soft.image.pixel(20, 20) - 0.5f * (c1 + c2)).cwiseAbs().maxCoeff());
  }
  const bool pass = hard_err <= 1e-6 && soft_err <= 1e-3;
  report(4, pass, fmt("gamma=1e-6 max error to nearest color %.3g, gamma=1e6 max error to mean %.3g",
                      hard_err, soft_err));
  CHECK(pass);
}

TEST_CASE("criterion 5: metric oracles") {
  std::mt19937_64 rng(505);
  double psnr_err = 0, rel_err = 0, d1_err = 0, si_err = 0;
  for (int k = 0; k < 50; ++k) {
    const ImageBuffer a = testing::random_image(rng, 37, 29), b = testing::random_image(rng, 37, 29);
    long double sq = 0;
    for (size_t i = 0; i < a.values().size(); ++i) {
      const long double d = static_cast<long double>(a.values()[i]) - b.values()[i];
      sq += d * d;
    }
    const double ref_psnr = static_cast<double>(10.0L * std::log10(a.values().size() / sq));
    psnr_err = std::max(psnr_err, std::abs(psnr(a, b) - ref_psnr));

    const DepthMap p = testing::random_depth(rng, 37, 29, 0.3, 20, 0.2);
    const DepthMap t = testing::random_depth(rng, 37, 29, 0.3, 20, 0.2);
    long double rel = 0, s = 0, s2 = 0;
    size_t n = 0, inside = 0;
    for (size_t i = 0; i < p.pixel_count(); ++i) {
      if (!p.valid(i) || !t.valid(i)) continue;
      rel += std::abs(static_cast<long double>(p.at(i)) - t.at(i)) / t.at(i);
      const double r = std::max(p.at(i) / t.at(i), t.at(i) / p.at(i));
      inside += r < 1.25;
      const long double g = std::log(static_cast<long double>(t.at(i))) - std::log(static_cast<long double>(p.at(i)));
      s += g;
      s2 += g * g;
      ++n;
    }
    const auto m = depth_metrics(p, t);
    rel_err = std::max(rel_err, std::abs(m.abs_rel - static_cast<double>(rel / n)));
    d1_err = std::max(d1_err, std::abs(m.delta1 - static_cast<double>(inside) / n));
    const double ref_si = static_cast<double>(std::sqrt(s2 / n - 0.85L * (s / n) * (s / n)));
    si_err = std::max(si_err, std::abs(si_loss(p, t, 0.85) - ref_si));
  }
  // Power-of-two scale keeps the log differences exactly equal.
  const DepthMap t = testing::random_depth(rng, 40, 30, 0.3, 20, 0.1);
  DepthMap scaled(40, 30);
  for (size_t i = 0; i < t.pixel_count(); ++i) scaled.set(i, 4.0 * t.at(i));
  const double si_scaled = si_loss(scaled, t, 1.0);

  ImageBuffer x(200, 190);
  for (size_t i = 0; i < x.pixel_count(); ++i) {
    const double u = static_cast<double>(i % 200), v = static_cast<double>(i / 200);
    const float val = static_cast<float>(0.5 + 0.45 * std::sin(0.13 * u + 0.05 * v) * std::cos(0.09 * v));
    x.set_pixel(i, Color(val, 0.8f * val, 1 - val));
  }
  const double self = ms_ssim(x, x);
  const ImageBuffer ca(180, 180, Color::Constant(0.3f)), cb(180, 180, Color::Constant(0.6f));
  const double c1 = 1e-4;
  const double hand = (2 * 0.3 * 0.6 + c1) / (0.3 * 0.3 + 0.6 * 0.6 + c1);
  // Constant images: contrast-structure is 1 at every scale, so MS-SSIM is
  // the luminance term raised to the coarsest-scale weight.
  const double const_err = std::abs(ms_ssim(ca, cb) - std::pow(hand, kMsSsimWeights.back()));

  const bool pass = psnr_err <= 1e-9 && rel_err <= 1e-9 && d1_err <= 1e-9 && si_err <= 1e-9 &&
                    si_scaled == 0.0 && std::abs(self - 1) <= 1e-9 && const_err <= 1e-6;
  report(5, pass,
         fmt("oracle errors psnr %.2g absrel %.2g delta1 %.2g si %.2g", psnr_err, rel_err, d1_err,
             si_err) +
             fmt("; si(c*d,d,1)=%.3g, ms_ssim(x,x)-1=%.2g, constant-image error %.2g", si_scaled,
                 self - 1, const_err));
  CHECK(pass);
}

TEST_CASE("criterion 6: inpainting contract") {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> dim(8, 120);
  std::uniform_real_distribution<double> frac(0, 0.9);
  size_t changed = 0;
  for (int k = 0; k < 50; ++k) {
    const int w = dim(rng), h = dim(rng);
    const ImageBuffer img = testing::random_image(rng, w, h);
    Mask holes(w, h);
    std::bernoulli_distribution coin(frac(rng));
    for (size_t i = 0; i < holes.size(); ++i) holes.set(i, coin(rng));
    const auto out = fill(img, holes, InpaintConfig{});
    for (size_t i = 0; i < img.pixel_count(); ++i) {
      if (!holes.at(i) && out.image.pixel(i) != img.pixel(i)) ++changed;
    }
  }

  // The scripted drive moves straight ahead, and the true t+5 poses
  // disocclude nothing, so the t+5 displacement is also applied sideways.
  const SyntheticSequence seq = make_synthetic_sequence(preset(ScenePreset::kCorridor, 60));
  const DepthSource src = make_synthetic_source(seq);
  const auto& intr = seq.info.intrinsics;
  size_t frames = 0, wins = 0;
  double min_gain = 1e9, forward_holes = 0, side_holes = 1;
  for (size_t i = 0; i + 5 < seq.info.frame_count(); i += 2) {
    const FrameBundle f = load_frame(src, i);
    const RigidPose ahead = seq.info.camera_pose(i + 5);
    forward_holes = std::max(
        forward_holes, render_compensated(f.image, f.depth, intr, f.pose, ahead, SplatConfig{}).hole_fraction());
    const double step = (ahead.translation - f.pose.translation).norm();
    const double side = (i / 2) % 2 ? step : -step;
    const RigidPose dst = compose(f.pose, RigidPose::from_translation({side, 0, 0}));
    const auto truth = raycast(seq.scene, intr, dst);
    const auto r = render_compensated(f.image, f.depth, intr, f.pose, dst, SplatConfig{});
    const double filled = psnr(fill(r, InpaintConfig{}).image, truth.image);
    const double sentinel = psnr(r.image, truth.image);
    min_gain = std::min(min_gain, filled - sentinel);
    side_holes = std::min(side_holes, r.hole_fraction());
    wins += filled > sentinel;
    ++frames;
  }
  const bool pass = changed == 0 && wins == frames;
  report(6, pass,
         fmt("%.0f non-hole pixels changed over 50 fixtures; filled beats sentinel on %.0f/%.0f "
             "sideways t+5 offsets (min gain %.3f dB)",
             static_cast<double>(changed), static_cast<double>(wins), static_cast<double>(frames),
             min_gain) +
             fmt(", min hole fraction %.3f%% (true t+5 poses: max %.3f%%)", 100 * side_holes,
                 100 * forward_holes));
  CHECK(pass);
}

TEST_CASE("criterion 7: stream emulation") {
  const SyntheticSequence seq =
      make_synthetic_sequence(preset(ScenePreset::kCorridor, 120, 160, 90));
  const DepthSource src = make_synthetic_source(seq);
  const double jitter = 0.01;
  bool pass = true;
  std::string detail;
  for (auto [skip, delay] : {std::pair{5, 0.25}, std::pair{10, 0.5}}) {
    NetworkConditions c;
    c.base_delay = delay;
    c.jitter_stddev = jitter;
    c.skip = skip;
    c.seed = 77;
    LiveConfig cfg;
    cfg.compensator.inpaint.iterations = 16;
    const FrameLog log = run_live(src, c, cfg);
    const FrameLog again = run_live(src, c, cfg);

    std::set<size_t> sources;
    double first = 1e9, last = -1e9, lat_dev = 0;
    for (const auto& r : log) {
      if (r.waiting) continue;
      if (sources.insert(r.source_index).second) {
        first = std::min(first, r.source_capture_time);
        last = std::max(last, r.source_capture_time);
      }
      lat_dev = std::max(lat_dev, std::abs(r.effective_latency - delay));
    }
    const double rate = (sources.size() - 1) / (last - first);
    const bool ok = std::abs(rate - 30.0 / skip) <= 0.1 && lat_dev <= 5 * jitter && log == again;
    pass = pass && ok;
    detail += fmt("skip %.0f: %.2f FPS, max |latency-%.0f ms| %.1f ms", skip, rate, delay * 1000,
                  lat_dev * 1000) +
              (log == again ? ", logs identical; " : ", logs DIFFER; ");
  }
  report(7, pass, detail);
  CHECK(pass);
}

TEST_CASE("criterion 8: method ordering") {
  EvalConfig cfg;
  cfg.delays = {1, 5, 10};
  auto means = [&](ScenePreset p) {
    const DepthSource src = make_synthetic_source(make_synthetic_sequence(preset(p, 40)));
    std::map<std::pair<Method, int>, std::pair<double, int>> acc;
    for (const auto& r : run_offline_eval(src, cfg)) {
      auto& a = acc[{r.method, r.delay_steps}];
      a.first += r.psnr;
      a.second += 1;
    }
    std::map<std::pair<Method, int>, double> out;
    for (const auto& [k, v] : acc) out[k] = v.first / v.second;
    return out;
  };
  const auto corridor = means(ScenePreset::kCorridor);
  const auto frontal = means(ScenePreset::kFrontal);
  bool corridor_ok = true, frontal_ok = true;
  std::string detail;
  for (int d : cfg.delays) {
    const double pc = corridor.at({Method::kPointCloud, d});
    const double h = corridor.at({Method::kHomography, d});
    const double cs = corridor.at({Method::kCropScale, d});
    corridor_ok = corridor_ok && pc > h && h > cs;
    detail += fmt("corridor t+%.0f pc %.2f / homography %.2f / cropscale %.2f dB; ", d, pc, h, cs);
  }
  for (int d : cfg.delays) {
    const double pc = frontal.at({Method::kPointCloud, d});
    const double h = frontal.at({Method::kHomography, d});
    frontal_ok = frontal_ok && pc - h <= 1.0;
    detail += fmt("frontal t+%.0f pc %.2f / homography %.2f dB; ", d, pc, h);
  }
  report(8, corridor_ok && frontal_ok,
         std::string("corridor ordering ") + (corridor_ok ? "holds" : "FAILS") + ", frontal gap " +
             (frontal_ok ? "within" : "OVER") + " 1 dB; " + detail);
  CHECK(corridor_ok);
  CHECK(frontal_ok);
}

TEST_CASE("criterion 9: rasterizer throughput") {
  const SyntheticSequence seq = make_synthetic_sequence(preset(ScenePreset::kCorridor, 10, 1280, 720));
  const DepthSource src = make_synthetic_source(seq);
  const FrameBundle frame = load_frame(src, 0);
  const auto report_data = bench_render(frame, seq.info.camera_pose(5), seq.info.intrinsics,
                                        SplatConfig{}, InpaintConfig{}, {1, 8}, 5);
  const BenchPoint& one = report_data.runs.at(0);
  const BenchPoint& eight = report_data.runs.at(1);
  const double speedup = one.median_ms / eight.median_ms;
  const bool exact = eight.matches_first;
  const bool pass = eight.median_ms <= 100.0 && speedup >= 4.0 && exact;
  report(9, pass,
         fmt("%.0f spheres, median %.1f ms at 1 thread, %.1f ms at 8 threads, speedup %.2fx", 
             static_cast<double>(report_data.points), one.median_ms, eight.median_ms, speedup) +
             (exact ? ", bit-exact across thread counts" : ", OUTPUT DIFFERS across thread counts") +
             fmt(" (host reports %.0f hardware threads)", std::thread::hardware_concurrency()));
  CHECK(exact);
  CHECK(eight.median_ms <= 100.0);
  CHECK(speedup >= 4.0);
}

TEST_CASE("criterion 10: end-to-end live run") {
  const DepthSource src = make_synthetic_source(make_synthetic_sequence(preset(ScenePreset::kCorridor, 90)));
  NetworkConditions c;
  c.base_delay = 0.5;
  c.skip = 10;
  const FrameLog log = run_live(src, c, LiveConfig{});
  size_t violations = 0, scored = 0, beats = 0;
  for (const auto& r : log) {
    if (r.waiting) continue;
    if (r.source_arrival_time > r.display_time) ++violations;
    if (std::isnan(r.psnr_compensated)) continue;
    ++scored;
    beats += r.psnr_compensated > r.psnr_raw;
  }
  const double share = scored ? static_cast<double>(beats) / scored : 0.0;
  const bool pass = violations == 0 && scored > 0 && share >= 0.8;
  report(10, pass, fmt("%.0f causality violations; compensated beats raw feed on %.0f/%.0f frames (%.1f%%)",
                       static_cast<double>(violations), static_cast<double>(beats),
                       static_cast<double>(scored), 100 * share));
  CHECK(pass);
}
