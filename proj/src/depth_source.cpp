#include "latcomp/depth_source.hpp"

#include "latcomp/error.hpp"

#include <random>

namespace latcomp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_index(const SequenceInfo& info, size_t index) {
  if (index >= info.frame_count()) {
    throw Error(ErrorKind::kInvalidArgument, "frame index " + std::to_string(index) +
                                                 " out of range for '" + info.name + "' (" +
                                                 std::to_string(info.frame_count()) + " frames)");
  }
}

FrameBundle load_file(const FileDepth& src, size_t index) {
  const SequenceInfo& info = src.bundle->info;
  check_index(info, index);
  FrameFiles files = read_bundle_frame(*src.bundle, index);
  return {std::move(files.image), std::move(files.depth), info.camera_pose(index),
          info.timestamps[index]};
}

FrameBundle load_synthetic(const Synthetic& src, size_t index) {
  const SyntheticSequence& seq = *src.sequence;
  check_index(seq.info, index);
  const RigidPose pose = seq.info.camera_pose(index);
  RaycastResult rc = raycast(seq.scene, seq.info.intrinsics, pose);
  if (seq.depth_dropout > 0) {
    std::mt19937_64 rng(seq.dropout_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    std::bernoulli_distribution drop(seq.depth_dropout);
    for (size_t i = 0; i < rc.depth.pixel_count(); ++i) {
      if (drop(rng)) rc.depth.invalidate(i);
    }
  }
  return {std::move(rc.image), std::move(rc.depth), pose, seq.info.timestamps[index]};
}

const SequenceInfo& imagery_info(const ImagerySource& source) {
  return std::visit(Overloaded{[](const FileDepth& f) -> const SequenceInfo& { return f.bundle->info; },
                               [](const Synthetic& s) -> const SequenceInfo& { return s.sequence->info; }},
                    source);
}

}  // namespace

void validate(const DepthSource& source) {
  if (const auto* plane = std::get_if<PlaneDepth>(&source)) {
    if (!(plane->offset > 0) || std::abs(plane->normal.norm() - 1.0) > 1e-9) {
      throw Error(ErrorKind::kInvalidArgument, "plane depth needs a unit normal and offset > 0");
    }
  }
}

const SequenceInfo& sequence_info(const DepthSource& source) {
  return std::visit(
      Overloaded{[](const FileDepth& f) -> const SequenceInfo& { return f.bundle->info; },
                 [](const Synthetic& s) -> const SequenceInfo& { return s.sequence->info; },
                 [](const PlaneDepth& p) -> const SequenceInfo& { return imagery_info(p.imagery); }},
      source);
}

FrameBundle load_frame(const DepthSource& source, size_t index) {
  validate(source);
  return std::visit(
      Overloaded{[&](const FileDepth& f) { return load_file(f, index); },
                 [&](const Synthetic& s) { return load_synthetic(s, index); },
                 [&](const PlaneDepth& p) {
                   FrameBundle frame = std::visit(
                       Overloaded{[&](const FileDepth& f) { return load_file(f, index); },
                                  [&](const Synthetic& s) { return load_synthetic(s, index); }},
                       p.imagery);
                   frame.depth = plane_depth(imagery_info(p.imagery).intrinsics, frame.pose,
                                             p.normal, p.offset);
                   return frame;
                 }},
      source);
}

DepthSource make_file_source(const fs::path& root) {
  return FileDepth{std::make_shared<const SequenceBundle>(load_bundle(root))};
}

DepthSource make_synthetic_source(SyntheticSequence sequence) {
  return Synthetic{std::make_shared<const SyntheticSequence>(std::move(sequence))};
}

}  // namespace latcomp
