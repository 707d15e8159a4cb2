#pragma once

#include "latcomp/io.hpp"
#include "latcomp/sequence.hpp"

#include <memory>
#include <variant>

namespace latcomp {

// Images, poses and depth from a bundle on disk.
struct FileDepth {
  std::shared_ptr<const SequenceBundle> bundle;
};

// Images and poses from a synthetic sequence; depth by ray casting.
struct Synthetic {
  std::shared_ptr<const SyntheticSequence> sequence;
};

using ImagerySource = std::variant<FileDepth, Synthetic>;

// Replaces depth with a plane `offset` meters from each frame's camera along
// -normal (world frame); imagery and poses come from the wrapped source.
struct PlaneDepth {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 1.0;
  ImagerySource imagery;
};

using DepthSource = std::variant<FileDepth, PlaneDepth, Synthetic>;

// Throws kInvalidArgument for a plane with non-unit normal or offset <= 0.
void validate(const DepthSource& source);

const SequenceInfo& sequence_info(const DepthSource& source);

// Decoded frame with its camera pose and timestamp. Index out of range is a
// kInvalidArgument error; unreadable files are kData errors naming the path.
FrameBundle load_frame(const DepthSource& source, size_t index);

DepthSource make_file_source(const fs::path& root);
DepthSource make_synthetic_source(SyntheticSequence sequence);

}  // namespace latcomp
