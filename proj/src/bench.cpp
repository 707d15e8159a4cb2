#include "latcomp/bench.hpp"

#include "latcomp/error.hpp"

#include <algorithm>
#include <chrono>

namespace latcomp {

BenchReport bench_render(const FrameBundle& frame, const RigidPose& dst_pose,
                         const CameraIntrinsics& intr, const SplatConfig& splat,
                         const InpaintConfig& inpaint, const std::vector<int>& thread_counts,
                         int repeats) {
  if (thread_counts.empty() || repeats < 1) {
    throw Error(ErrorKind::kInvalidArgument, "bench needs thread counts and repeats >= 1");
  }
  const ColoredPointCloud cloud = backproject(intr, frame.depth, frame.image);
  BenchReport report;
  report.points = cloud.size();
  ImageBuffer reference;
  for (int threads : thread_counts) {
    if (threads < 1) throw Error(ErrorKind::kInvalidArgument, "thread counts must be >= 1");
    SplatConfig cfg = splat;
    cfg.threads = threads;
    std::vector<double> times;
    ImageBuffer last;
    for (int r = 0; r < repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      RenderOutput render = rasterize(cloud, frame.pose, dst_pose, intr, cfg);
      last = fill(render, inpaint).image;
      times.push_back(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(times.begin(), times.end());
    BenchPoint point;
    point.threads = threads;
    point.median_ms = times[times.size() / 2];
    point.min_ms = times.front();
    if (report.runs.empty()) {
      reference = std::move(last);
    } else {
      point.matches_first = last == reference;
    }
    report.runs.push_back(point);
  }
  return report;
}

}  // namespace latcomp
