#pragma once

#include "latcomp/image.hpp"
#include "latcomp/sequence.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace latcomp {

namespace fs = std::filesystem;

// 8-bit RGB PNG. Reading promotes to [0, 1]; writing rounds to nearest.
void write_png(const fs::path& path, const ImageBuffer& image);
ImageBuffer read_png(const fs::path& path);
// Single-channel 8-bit PNG, 255 where the mask is set.
void write_mask_png(const fs::path& path, const Mask& mask);

// Grayscale PFM ("Pf", negative scale = little-endian float32, rows stored
// bottom-to-top). Invalid depths are written as +inf.
void write_pfm(const fs::path& path, const DepthMap& depth);
DepthMap read_pfm(const fs::path& path);

// Contents of the bundle's `manifest` file.
struct SequenceManifest {
  std::string name;
  CameraIntrinsics intrinsics;
  double frame_rate = 30.0;
  PoseFrame pose_frame = PoseFrame::kCamera;
  RigidPose camera_mount = RigidPose::identity();
  DepthRange depth_range;
  std::optional<WorldPlane> dominant_plane;
  size_t frame_count = 0;
  std::string rgb_pattern = "rgb/%06d.png";
  std::string depth_pattern = "depth/%06d.pfm";
  std::string poses_file = "poses.csv";
  std::string commands_file = "commands.csv";
};

// JSON text; unknown keys are rejected.
std::string manifest_to_text(const SequenceManifest& manifest);
SequenceManifest manifest_from_text(const std::string& text);

// printf-style "%06d" expansion of a file pattern.
std::string format_frame_path(const std::string& pattern, size_t index);

// A sequence bundle on disk. Metadata is loaded eagerly; frames on demand.
struct SequenceBundle {
  fs::path root;
  SequenceManifest manifest;
  SequenceInfo info;

  fs::path rgb_path(size_t index) const;
  fs::path depth_path(size_t index) const;
};

// Validates the manifest against the directory: every referenced file must
// exist and counts must agree. Errors name the offending path.
SequenceBundle load_bundle(const fs::path& root);

struct FrameFiles {
  ImageBuffer image;
  DepthMap depth;
};
// Decodes one frame; depths outside the declared range become invalid.
FrameFiles read_bundle_frame(const SequenceBundle& bundle, size_t index);

// Writes manifest, poses.csv, commands.csv and one rgb/depth pair per frame.
// `frame_at(i)` supplies the raster data.
void write_bundle(const fs::path& root, const SequenceInfo& info,
                  const std::function<FrameFiles(size_t)>& frame_at);

void write_poses_csv(const fs::path& path, const std::vector<double>& timestamps,
                     const std::vector<RigidPose>& poses);
void read_poses_csv(const fs::path& path, std::vector<double>& timestamps,
                    std::vector<RigidPose>& poses);
void write_commands_csv(const fs::path& path, const CommandBuffer& commands);
CommandBuffer read_commands_csv(const fs::path& path);

// Shortest decimal representation that round-trips the double.
std::string format_double(double value);

}  // namespace latcomp
