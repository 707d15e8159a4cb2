#pragma once

#include "latcomp/image.hpp"
#include "latcomp/splat.hpp"

#include <string>

namespace latcomp {

enum class InpaintMethod {
  kPullPush,
  kDiffusion,
  kNone,  // leave the hole color in place
};

InpaintMethod parse_inpaint_method(const std::string& name);
std::string to_string(InpaintMethod method);

struct InpaintConfig {
  InpaintMethod method = InpaintMethod::kPullPush;
  int iterations = 256;  // diffusion cap

  void validate() const;
};

struct InpaintResult {
  ImageBuffer image;
  bool no_valid_pixels = false;  // every pixel was a hole; output is mid-gray
};

// Fills pixels where `holes` is set. All other pixels are copied bit-exact.
InpaintResult fill(const ImageBuffer& image, const Mask& holes, const InpaintConfig& cfg);

inline InpaintResult fill(const RenderOutput& render, const InpaintConfig& cfg) {
  return fill(render.image, render.hole_mask, cfg);
}

}  // namespace latcomp
