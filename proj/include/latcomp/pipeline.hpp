#pragma once

#include "latcomp/baselines.hpp"
#include "latcomp/depth_source.hpp"
#include "latcomp/inpaint.hpp"
#include "latcomp/kinematics.hpp"
#include "latcomp/metrics.hpp"
#include "latcomp/splat.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace latcomp {

enum class Method { kPointCloud, kHomography, kCropScale };

Method parse_method(const std::string& name);
std::string to_string(Method method);

struct CompensatorConfig {
  Method method = Method::kPointCloud;
  SplatConfig splat;
  InpaintConfig inpaint;
  // Crop+scale constants; calibrated from the sequence when unset.
  std::optional<CropScaleParams> crop_scale;
  // Homography plane; defaults to the sequence's dominant plane, then to the
  // ground at camera-mount height.
  std::optional<WorldPlane> plane;
};

struct StageTimings {
  double depth_load_ms = 0.0;
  double render_ms = 0.0;
  double inpaint_ms = 0.0;
  double total_ms = 0.0;
};

struct CompensatedFrame {
  ImageBuffer image;                  // after inpainting
  Mask holes;                         // pixels the method could not produce
  std::optional<DepthMap> depth;      // blended depth (point cloud only)
  double hole_fraction = 0.0;
  StageTimings timings;
};

// zoom_per_meter = 1 / median valid depth of `reference`; shift = -fx so a
// left turn slides the window left.
CropScaleParams calibrate_crop_scale(const CameraIntrinsics& intr, const DepthMap& reference);

// Synthesizes the view from `dst_pose` given the frame captured at src.
CompensatedFrame compensate(const FrameBundle& source, const RigidPose& dst_pose,
                            const SequenceInfo& info, const CompensatorConfig& cfg);

// --- link emulation -------------------------------------------------------

struct NetworkConditions {
  double base_delay = 0.0;      // seconds
  double jitter_stddev = 0.0;   // seconds
  int skip = 1;                 // keep one of every `skip` frames (0 and 1 keep all)
  double drop_probability = 0.0;
  uint64_t seed = 0;

  void validate() const;
};

struct Delivery {
  size_t index;
  double capture_time;
  double arrival_time;
};

// Deliveries in arrival order. Frames overtaken by a later capture are
// discarded so capture times are increasing as well.
std::vector<Delivery> emulate_link(const std::vector<double>& capture_times,
                                   const NetworkConditions& cond);

// --- live compensation ----------------------------------------------------

struct StampedFrame {
  FrameBundle frame;  // frame.timestamp is the capture time
  size_t index = 0;
  double arrival_time = 0.0;
};

enum class HorizonPolicy { kCompensateToNow, kFixedSteps };

// Replaces a delivered frame's depth before it is published, e.g. with a
// depth estimate computed from the image. Runs on the ingestion worker.
using DepthStage = std::function<DepthMap(const FrameBundle&)>;

struct LiveConfig {
  double display_period = 1.0 / 30.0;
  HorizonPolicy horizon = HorizonPolicy::kCompensateToNow;
  int fixed_steps = 0;
  CompensatorConfig compensator;
  // Real threads paced by the wall clock instead of a virtual clock.
  bool wall_clock = false;
  // Stage timings are wall-clock measurements and therefore not
  // reproducible; off by default so the log is deterministic.
  bool measure_timings = false;
  // Compare each emitted frame with the sequence frame at its target time.
  bool score_against_truth = true;
  std::optional<double> end_time;  // defaults to the last capture time
  DepthStage depth_stage;          // unset: use the depth shipped with the frame

  void validate() const;
};

struct FrameRecord {
  size_t tick = 0;
  double display_time = 0.0;
  bool waiting = true;  // no frame delivered yet; a placeholder was emitted
  size_t source_index = 0;
  double source_capture_time = 0.0;
  double source_arrival_time = 0.0;
  double effective_latency = 0.0;  // arrival - capture of the source frame
  double horizon = 0.0;            // target time - capture time
  PlanarPose predicted_pose;
  bool no_commands = false;
  double hole_fraction = 0.0;
  bool overrun = false;
  StageTimings timings;
  double psnr_compensated = std::numeric_limits<double>::quiet_NaN();
  double psnr_raw = std::numeric_limits<double>::quiet_NaN();

  bool operator==(const FrameRecord&) const;
};

using FrameLog = std::vector<FrameRecord>;
using FrameSink = std::function<void(const FrameRecord&, const ImageBuffer&)>;

FrameLog run_live(const DepthSource& source, const NetworkConditions& cond, const LiveConfig& cfg,
                  const FrameSink& sink = {});

void write_frame_log_csv(std::ostream& out, const FrameLog& log);

// --- offline evaluation ---------------------------------------------------

struct EvalConfig {
  std::vector<int> delays = {1, 5, 10};
  std::vector<Method> methods = {Method::kPointCloud, Method::kHomography, Method::kCropScale};
  CompensatorConfig compensator;
  bool predicted_pose = false;  // integrate commands instead of using the true future pose
  size_t frame_stride = 1;
  double si_lambda = kDefaultSiLambda;
};

struct EvalRow {
  std::string sequence_id;
  size_t frame_index = 0;
  int delay_steps = 0;
  Method method = Method::kPointCloud;
  double psnr = 0.0;
  double ms_ssim = 0.0;
  double abs_rel = 0.0;
  double delta1 = 0.0;
  double si_loss = 0.0;
  double hole_fraction = 0.0;
  double render_ms = 0.0;
};

std::vector<EvalRow> run_offline_eval(const DepthSource& source, const EvalConfig& cfg);

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows);

}  // namespace latcomp
