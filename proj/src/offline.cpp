#include "latcomp/error.hpp"
#include "latcomp/io.hpp"
#include "latcomp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace latcomp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Integrates the commands between the two capture times and applies the
// resulting base motion to the measured source pose.
RigidPose predicted_target(const SequenceInfo& info, size_t src, size_t dst) {
  const KinematicParams params = info.kinematics();
  const RigidPose src_pose = info.camera_pose(src);
  const PlanarPose start = camera_to_planar(src_pose, params);
  const double t_dst = info.timestamps[dst];
  const Prediction pred =
      predict(start, info.timestamps[src], info.commands.up_to(t_dst), t_dst, params);
  return compose(src_pose, compose(invert(planar_to_camera(start, params)),
                                   planar_to_camera(pred.pose, params)));
}

}  // namespace

std::vector<EvalRow> run_offline_eval(const DepthSource& source, const EvalConfig& cfg) {
  const SequenceInfo& info = sequence_info(source);
  info.validate();
  if (cfg.delays.empty() || cfg.methods.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "evaluation needs at least one delay and one method");
  }
  if (cfg.frame_stride == 0) throw Error(ErrorKind::kInvalidArgument, "frame_stride must be >= 1");
  for (int d : cfg.delays) {
    if (d < 0) throw Error(ErrorKind::kInvalidArgument, "delays must be >= 0");
  }
  const auto max_delay = static_cast<size_t>(*std::max_element(cfg.delays.begin(), cfg.delays.end()));
  const size_t n = info.frame_count();
  if (n < max_delay + 1) {
    throw Error(ErrorKind::kData, "sequence '" + info.name + "' has " + std::to_string(n) +
                                      " frames; delay " + std::to_string(max_delay) + " needs at least " +
                                      std::to_string(max_delay + 1));
  }
  const bool score_ms_ssim =
      std::min(info.intrinsics.width, info.intrinsics.height) >= kMsSsimMinDimension;

  // Crop+scale constants are fixed per sequence, from the first frame.
  CompensatorConfig base = cfg.compensator;
  if (!base.crop_scale) base.crop_scale = calibrate_crop_scale(info.intrinsics, load_frame(source, 0).depth);

  std::vector<EvalRow> rows;
  for (size_t t = 0; t + max_delay < n; t += cfg.frame_stride) {
    const FrameBundle src = load_frame(source, t);
    for (int d : cfg.delays) {
      const size_t target = t + static_cast<size_t>(d);
      const FrameBundle truth = load_frame(source, target);
      const RigidPose dst = cfg.predicted_pose ? predicted_target(info, t, target) : truth.pose;
      for (Method method : cfg.methods) {
        CompensatorConfig comp = base;
        comp.method = method;
        const CompensatedFrame out = compensate(src, dst, info, comp);

        EvalRow row;
        row.sequence_id = info.name;
        row.frame_index = t;
        row.delay_steps = d;
        row.method = method;
        row.psnr = psnr(out.image, truth.image);
        row.ms_ssim = score_ms_ssim ? ms_ssim(out.image, truth.image) : kNaN;
        row.abs_rel = row.delta1 = row.si_loss = kNaN;
        if (out.depth) {
          // No jointly valid pixels leaves the depth columns NaN.
          try {
            const DepthAccuracy acc = depth_metrics(*out.depth, truth.depth);
            row.abs_rel = acc.abs_rel;
            row.delta1 = acc.delta1;
            row.si_loss = latcomp::si_loss(*out.depth, truth.depth, cfg.si_lambda);
          } catch (const Error&) {
          }
        }
        row.hole_fraction = out.hole_fraction;
        row.render_ms = out.timings.render_ms;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << "sequence_id,frame_index,delay_steps,method,psnr,ms_ssim,abs_rel,delta1,si_loss,"
         "hole_fraction,render_ms\n";
  for (const EvalRow& r : rows) {
    out << r.sequence_id << ',' << r.frame_index << ',' << r.delay_steps << ',' << to_string(r.method)
        << ',' << format_double(r.psnr) << ',' << format_double(r.ms_ssim) << ','
        << format_double(r.abs_rel) << ',' << format_double(r.delta1) << ','
        << format_double(r.si_loss) << ',' << format_double(r.hole_fraction) << ','
        << format_double(r.render_ms) << '\n';
  }
}

}  // namespace latcomp
