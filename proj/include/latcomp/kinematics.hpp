#pragma once

#include "latcomp/geometry.hpp"

#include <memory>
#include <vector>

namespace latcomp {

struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // (-pi, pi]

  bool operator==(const PlanarPose&) const = default;
};

double normalize_angle(double theta);

struct VelocityCommand {
  double timestamp = 0.0;
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};

struct KinematicParams {
  double mu = 1.0;   // linear friction coefficient
  double eta = 1.0;  // angular friction coefficient
  RigidPose camera_mount = RigidPose::identity();  // camera frame -> base frame

  void validate() const;
};

// Forward-looking camera `height` meters above the base origin: camera z
// along base +x, camera x along base -y, camera y along base -z.
RigidPose forward_camera_mount(double height);

// Immutable, timestamp-ordered command log. Copies share storage, so handing
// a snapshot to a reader is cheap and the reader never sees later appends.
class CommandBuffer {
 public:
  CommandBuffer() : commands_(std::make_shared<const std::vector<VelocityCommand>>()) {}
  // Throws kInvalidArgument unless timestamps are finite and strictly increasing.
  explicit CommandBuffer(std::vector<VelocityCommand> commands);

  const std::vector<VelocityCommand>& commands() const { return *commands_; }
  bool empty() const { return commands_->empty(); }
  size_t size() const { return commands_->size(); }

  // Commands with timestamp <= t.
  CommandBuffer up_to(double t) const;
  CommandBuffer appended(const VelocityCommand& cmd) const;

 private:
  std::shared_ptr<const std::vector<VelocityCommand>> commands_;
};

// Exact unicycle arc for constant (v, omega) held over dt seconds.
PlanarPose step(const PlanarPose& pose, const VelocityCommand& cmd, double dt,
                const KinematicParams& params);

struct Prediction {
  PlanarPose pose;
  bool no_commands = false;
};

// Integrates the buffered commands from `start_time` to `horizon_end`. Each
// command is active from its timestamp until the next one; the last extends
// to the horizon. Before the first command the robot is at rest.
Prediction predict(const PlanarPose& start, double start_time, const CommandBuffer& commands,
                   double horizon_end, const KinematicParams& params);

// Embeds a ground-plane pose (z = 0, yaw = theta) and composes the mount.
RigidPose planar_to_camera(const PlanarPose& pose, const KinematicParams& params);

// Inverse of planar_to_camera, ignoring any out-of-plane component.
PlanarPose camera_to_planar(const RigidPose& camera_pose, const KinematicParams& params);

}  // namespace latcomp
