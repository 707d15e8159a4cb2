#include "latcomp/kinematics.hpp"

#include "latcomp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace latcomp {

double normalize_angle(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(theta, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

void KinematicParams::validate() const {
  if (!(mu > 0) || !(eta > 0)) {
    throw Error(ErrorKind::kInvalidArgument, "friction coefficients must be positive: mu=" +
                                                 std::to_string(mu) + " eta=" + std::to_string(eta));
  }
}

RigidPose forward_camera_mount(double height) {
  Eigen::Matrix3d r;
  // Columns are the camera axes expressed in the base frame.
  r << 0, 0, 1,
      -1, 0, 0,
       0, -1, 0;
  return {r, Eigen::Vector3d(0, 0, height)};
}

CommandBuffer::CommandBuffer(std::vector<VelocityCommand> commands) {
  for (size_t i = 0; i < commands.size(); ++i) {
    if (!std::isfinite(commands[i].timestamp) ||
        (i > 0 && !(commands[i].timestamp > commands[i - 1].timestamp))) {
      throw Error(ErrorKind::kInvalidArgument,
                  "command timestamps must be finite and strictly increasing (index " +
                      std::to_string(i) + ")");
    }
  }
  commands_ = std::make_shared<const std::vector<VelocityCommand>>(std::move(commands));
}

CommandBuffer CommandBuffer::up_to(double t) const {
  const auto& all = *commands_;
  auto end = std::upper_bound(all.begin(), all.end(), t,
                              [](double value, const VelocityCommand& c) { return value < c.timestamp; });
  if (end == all.end()) return *this;
  return CommandBuffer(std::vector<VelocityCommand>(all.begin(), end));
}

CommandBuffer CommandBuffer::appended(const VelocityCommand& cmd) const {
  std::vector<VelocityCommand> next = *commands_;
  next.push_back(cmd);
  return CommandBuffer(std::move(next));
}

PlanarPose step(const PlanarPose& pose, const VelocityCommand& cmd, double dt,
                const KinematicParams& params) {
  const double v = params.mu * cmd.v;
  const double w = params.eta * cmd.omega;
  // Chord of the arc: length v dt sinc(w dt / 2), direction theta + w dt / 2.
  // Reduces to the straight line for w = 0 and stays accurate for tiny w.
  const double half = 0.5 * w * dt;
  const double sinc = std::abs(half) < 1e-9 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  const double chord = v * dt * sinc;
  const double mid = pose.theta + half;
  PlanarPose out;
  out.x = pose.x + chord * std::cos(mid);
  out.y = pose.y + chord * std::sin(mid);
  out.theta = normalize_angle(pose.theta + w * dt);
  return out;
}

Prediction predict(const PlanarPose& start, double start_time, const CommandBuffer& commands,
                   double horizon_end, const KinematicParams& params) {
  if (horizon_end < start_time) {
    throw Error(ErrorKind::kInvalidArgument, "predict: horizon ends before the start pose");
  }
  const auto& cmds = commands.commands();
  if (cmds.empty()) return {start, true};

  PlanarPose pose = start;
  double t = start_time;
  for (size_t i = 0; i < cmds.size() && t < horizon_end; ++i) {
    const double active_until = (i + 1 < cmds.size()) ? cmds[i + 1].timestamp : horizon_end;
    const double from = std::max(t, cmds[i].timestamp);
    const double to = std::min(active_until, horizon_end);
    if (to <= from) continue;
    pose = step(pose, cmds[i], to - from, params);
    t = to;
  }
  return {pose, false};
}

RigidPose planar_to_camera(const PlanarPose& pose, const KinematicParams& params) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  RigidPose base;
  base.rotation << c, -s, 0,
                   s,  c, 0,
                   0,  0, 1;
  base.translation = Eigen::Vector3d(pose.x, pose.y, 0.0);
  return compose(base, params.camera_mount);
}

PlanarPose camera_to_planar(const RigidPose& camera_pose, const KinematicParams& params) {
  const RigidPose base = compose(camera_pose, invert(params.camera_mount));
  return {base.translation.x(), base.translation.y(),
          normalize_angle(std::atan2(base.rotation(1, 0), base.rotation(0, 0)))};
}

}  // namespace latcomp
