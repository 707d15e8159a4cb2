#pragma once

#include "latcomp/inpaint.hpp"
#include "latcomp/sequence.hpp"
#include "latcomp/splat.hpp"

#include <vector>

namespace latcomp {

struct BenchPoint {
  int threads = 1;
  double median_ms = 0.0;  // rasterize + inpaint
  double min_ms = 0.0;
  bool matches_first = true;  // output bit-identical to the first thread count
};

struct BenchReport {
  size_t points = 0;
  std::vector<BenchPoint> runs;
};

// Times rasterize + inpaint of `frame` re-rendered from `dst_pose` at each
// thread count. Back-projection happens once, outside the timed region.
BenchReport bench_render(const FrameBundle& frame, const RigidPose& dst_pose,
                         const CameraIntrinsics& intr, const SplatConfig& splat,
                         const InpaintConfig& inpaint, const std::vector<int>& thread_counts,
                         int repeats);

}  // namespace latcomp
