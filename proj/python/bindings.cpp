#include "latcomp/baselines.hpp"
#include "latcomp/depth_source.hpp"
#include "latcomp/error.hpp"
#include "latcomp/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace latcomp;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

ImageBuffer to_image(const FloatArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("image must have shape (H, W, 3)");
  ImageBuffer img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.data(), a.data(), sizeof(float) * a.size());
  return img;
}

FloatArray from_image(const ImageBuffer& img) {
  FloatArray a({static_cast<py::ssize_t>(img.height()), static_cast<py::ssize_t>(img.width()),
                py::ssize_t{3}});
  std::memcpy(a.mutable_data(), img.data(), sizeof(float) * a.size());
  return a;
}

// NaN, inf and non-positive values all mean "no depth".
DepthMap to_depth(const DoubleArray& a) {
  if (a.ndim() != 2) throw py::value_error("depth must have shape (H, W)");
  DepthMap d(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (size_t i = 0; i < d.pixel_count(); ++i) d.set(i, a.data()[i]);
  return d;
}

DoubleArray from_depth(const DepthMap& d) {
  DoubleArray a({static_cast<py::ssize_t>(d.height()), static_cast<py::ssize_t>(d.width())});
  std::memcpy(a.mutable_data(), d.values().data(), sizeof(double) * a.size());
  return a;
}

Mask to_mask(const BoolArray& a) {
  if (a.ndim() != 2) throw py::value_error("mask must have shape (H, W)");
  Mask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (size_t i = 0; i < m.size(); ++i) m.set(i, a.data()[i]);
  return m;
}

BoolArray from_mask(const Mask& m) {
  BoolArray a({static_cast<py::ssize_t>(m.height()), static_cast<py::ssize_t>(m.width())});
  for (size_t i = 0; i < m.size(); ++i) a.mutable_data()[i] = m.at(i);
  return a;
}

RigidPose to_pose(const Eigen::Matrix4d& m) {
  return RigidPose::from_noisy(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

py::tuple from_planar(const PlanarPose& p) { return py::make_tuple(p.x, p.y, p.theta); }
PlanarPose to_planar(const std::tuple<double, double, double>& t) {
  return {std::get<0>(t), std::get<1>(t), std::get<2>(t)};
}

CommandBuffer to_commands(const std::vector<std::tuple<double, double, double>>& rows) {
  std::vector<VelocityCommand> cmds;
  for (const auto& [t, v, w] : rows) cmds.push_back({t, v, w});
  return CommandBuffer(std::move(cmds));
}

KinematicParams kinematics(double mu, double eta) {
  KinematicParams p;
  p.mu = mu;
  p.eta = eta;
  return p;
}

SplatConfig splat_config(double gamma, double radius, int threads) {
  SplatConfig cfg;
  cfg.gamma = gamma;
  cfg.radius_constant = radius;
  cfg.threads = threads;
  return cfg;
}

CompensatorConfig compensator(const std::string& method, double gamma, double radius,
                              const std::string& inpaint) {
  CompensatorConfig cfg;
  cfg.method = parse_method(method);
  cfg.splat = splat_config(gamma, radius, 0);
  cfg.inpaint.method = parse_inpaint_method(inpaint);
  return cfg;
}

// Sequence handle shared by file bundles and synthetic presets.
struct Sequence {
  DepthSource source;

  const SequenceInfo& info() const { return sequence_info(source); }
};

py::dict frame_record(const FrameRecord& r) {
  py::dict d;
  d["tick"] = r.tick;
  d["display_time"] = r.display_time;
  d["waiting"] = r.waiting;
  d["source_index"] = r.source_index;
  d["source_capture_time"] = r.source_capture_time;
  d["source_arrival_time"] = r.source_arrival_time;
  d["effective_latency"] = r.effective_latency;
  d["horizon"] = r.horizon;
  d["predicted_pose"] = from_planar(r.predicted_pose);
  d["no_commands"] = r.no_commands;
  d["hole_fraction"] = r.hole_fraction;
  d["overrun"] = r.overrun;
  d["psnr_compensated"] = r.psnr_compensated;
  d["psnr_raw"] = r.psnr_raw;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Latency compensation by depth-based reprojection";

  static py::exception<Error> data_error(m, "DataError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kData) {
        py::set_error(data_error, e.what());
      } else {
        PyErr_SetString(PyExc_ValueError, e.what());
      }
    }
  });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"))
      .def_static("centered", &CameraIntrinsics::centered, py::arg("width"), py::arg("height"),
                  py::arg("fx_over_width") = 0.5)
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def("matrix", &CameraIntrinsics::matrix)
      .def("__repr__", [](const CameraIntrinsics& k) {
        return "CameraIntrinsics(fx=" + std::to_string(k.fx) + ", fy=" + std::to_string(k.fy) +
               ", cx=" + std::to_string(k.cx) + ", cy=" + std::to_string(k.cy) + ", " +
               shape_string(k.width, k.height) + ")";
      });

  // --- geometry and rendering
  m.def(
      "backproject",
      [](const CameraIntrinsics& intr, const DoubleArray& depth, const FloatArray& image) {
        const auto cloud = backproject(intr, to_depth(depth), to_image(image));
        DoubleArray pos({static_cast<py::ssize_t>(cloud.size()), py::ssize_t{3}});
        FloatArray col({static_cast<py::ssize_t>(cloud.size()), py::ssize_t{3}});
        py::array_t<int32_t> px(static_cast<py::ssize_t>(cloud.size()));
        for (size_t i = 0; i < cloud.size(); ++i) {
          for (int c = 0; c < 3; ++c) {
            pos.mutable_data()[3 * i + c] = cloud.positions[i][c];
            col.mutable_data()[3 * i + c] = cloud.colors[i][c];
          }
          px.mutable_data()[i] = cloud.source_pixel[i];
        }
        return py::make_tuple(pos, col, px);
      },
      py::arg("intrinsics"), py::arg("depth"), py::arg("image"),
      "Camera-frame points, their colors and row-major source pixel indices.");

  m.def(
      "render",
      [](const FloatArray& image, const DoubleArray& depth, const CameraIntrinsics& intr,
         const Eigen::Matrix4d& src_pose, const Eigen::Matrix4d& dst_pose, double gamma,
         double radius, int threads) {
        const ImageBuffer img = to_image(image);
        const DepthMap d = to_depth(depth);
        RenderOutput out;
        {
          py::gil_scoped_release release;
          out = render_compensated(img, d, intr, to_pose(src_pose), to_pose(dst_pose),
                                   splat_config(gamma, radius, threads));
        }
        return py::make_tuple(from_image(out.image), from_mask(out.hole_mask),
                              from_depth(out.blended_depth));
      },
      py::arg("image"), py::arg("depth"), py::arg("intrinsics"), py::arg("src_pose"),
      py::arg("dst_pose"), py::arg("gamma") = 0.1, py::arg("radius") = 3e-3, py::arg("threads") = 0,
      "Splats the frame into dst_pose's view. Returns (image, holes, depth).");

  m.def(
      "inpaint",
      [](const FloatArray& image, const BoolArray& holes, const std::string& method, int iterations) {
        return from_image(fill(to_image(image), to_mask(holes),
                               InpaintConfig{parse_inpaint_method(method), iterations})
                              .image);
      },
      py::arg("image"), py::arg("holes"), py::arg("method") = "pullpush",
      py::arg("iterations") = 256);

  // --- metrics
  m.def(
      "psnr",
      [](const FloatArray& pred, const FloatArray& truth, std::optional<BoolArray> mask) {
        std::optional<Mask> m;
        if (mask) m = to_mask(*mask);
        return psnr(to_image(pred), to_image(truth), m);
      },
      py::arg("pred"), py::arg("truth"), py::arg("mask") = py::none());
  m.def(
      "ssim",
      [](const FloatArray& a, const FloatArray& b) { return ssim(to_image(a), to_image(b)); },
      py::arg("pred"), py::arg("truth"));
  m.def(
      "ms_ssim",
      [](const FloatArray& a, const FloatArray& b) { return ms_ssim(to_image(a), to_image(b)); },
      py::arg("pred"), py::arg("truth"));
  m.def(
      "depth_metrics",
      [](const DoubleArray& pred, const DoubleArray& truth) {
        const auto r = depth_metrics(to_depth(pred), to_depth(truth));
        return py::make_tuple(r.abs_rel, r.delta1, r.valid_pixels);
      },
      py::arg("pred"), py::arg("truth"), "Returns (abs_rel, delta1, valid_pixels).");
  m.def(
      "si_loss",
      [](const DoubleArray& pred, const DoubleArray& truth, double lambda) {
        return si_loss(to_depth(pred), to_depth(truth), lambda);
      },
      py::arg("pred"), py::arg("truth"), py::arg("lam") = kDefaultSiLambda);

  // --- baselines
  m.def(
      "plane_homography",
      [](const CameraIntrinsics& intr, const Eigen::Matrix4d& src, const Eigen::Matrix4d& dst,
         const Eigen::Vector3d& normal, double distance) {
        return plane_homography(intr, to_pose(src), to_pose(dst), CameraPlane{normal, distance}).h;
      },
      py::arg("intrinsics"), py::arg("src_pose"), py::arg("dst_pose"), py::arg("normal"),
      py::arg("distance"));
  m.def(
      "warp",
      [](const FloatArray& image, const Eigen::Matrix3d& h) {
        const auto r = warp(to_image(image), HomographyMatrix::normalized(h));
        return py::make_tuple(from_image(r.image), from_mask(r.valid));
      },
      py::arg("image"), py::arg("homography"));

  // --- kinematics
  m.def(
      "step",
      [](const std::tuple<double, double, double>& pose, double v, double omega, double dt,
         double mu, double eta) {
        return from_planar(step(to_planar(pose), {0.0, v, omega}, dt, kinematics(mu, eta)));
      },
      py::arg("pose"), py::arg("v"), py::arg("omega"), py::arg("dt"), py::arg("mu") = 1.0,
      py::arg("eta") = 1.0);
  m.def(
      "predict",
      [](const std::tuple<double, double, double>& start, double start_time,
         const std::vector<std::tuple<double, double, double>>& commands, double horizon_end,
         double mu, double eta) {
        const auto p = predict(to_planar(start), start_time, to_commands(commands), horizon_end,
                               kinematics(mu, eta));
        return py::make_tuple(from_planar(p.pose), p.no_commands);
      },
      py::arg("start"), py::arg("start_time"), py::arg("commands"), py::arg("horizon_end"),
      py::arg("mu") = 1.0, py::arg("eta") = 1.0,
      "commands are (timestamp, v, omega) rows. Returns ((x, y, theta), no_commands).");

  // --- sequences
  py::class_<Sequence>(m, "Sequence")
      .def_property_readonly("name", [](const Sequence& s) { return s.info().name; })
      .def_property_readonly("intrinsics", [](const Sequence& s) { return s.info().intrinsics; })
      .def_property_readonly("frame_rate", [](const Sequence& s) { return s.info().frame_rate; })
      .def_property_readonly("timestamps", [](const Sequence& s) { return s.info().timestamps; })
      .def("__len__", [](const Sequence& s) { return s.info().frame_count(); })
      .def("pose", [](const Sequence& s, size_t i) {
        if (i >= s.info().frame_count()) throw py::index_error("frame index out of range");
        return s.info().camera_pose(i).matrix();
      })
      .def(
          "frame",
          [](const Sequence& s, size_t i) {
            FrameBundle f;
            {
              py::gil_scoped_release release;
              f = load_frame(s.source, i);
            }
            return py::make_tuple(from_image(f.image), from_depth(f.depth), f.pose.matrix(),
                                  f.timestamp);
          },
          "Returns (image, depth, camera-to-world pose, timestamp).");

  m.def(
      "synthetic",
      [](const std::string& scene, size_t frames, uint64_t seed, int width, int height) {
        SyntheticOptions o;
        o.preset = parse_scene_preset(scene);
        o.frames = frames;
        o.seed = seed;
        o.width = width;
        o.height = height;
        return Sequence{make_synthetic_source(make_synthetic_sequence(o))};
      },
      py::arg("scene") = "corridor", py::arg("frames") = 90, py::arg("seed") = 0,
      py::arg("width") = 640, py::arg("height") = 360);
  m.def(
      "open_sequence", [](const std::string& path) { return Sequence{make_file_source(path)}; },
      py::arg("path"));

  m.def(
      "compensate",
      [](const Sequence& s, size_t index, const Eigen::Matrix4d& dst_pose, const std::string& method,
         double gamma, double radius, const std::string& inpaint) {
        const FrameBundle f = load_frame(s.source, index);
        CompensatorConfig cfg = compensator(method, gamma, radius, inpaint);
        CompensatedFrame out;
        {
          py::gil_scoped_release release;
          out = latcomp::compensate(f, to_pose(dst_pose), s.info(), cfg);
        }
        return py::make_tuple(from_image(out.image), from_mask(out.holes));
      },
      py::arg("sequence"), py::arg("index"), py::arg("dst_pose"), py::arg("method") = "pointcloud",
      py::arg("gamma") = 0.1, py::arg("radius") = 3e-3, py::arg("inpaint") = "pullpush",
      "Synthesizes the view from dst_pose out of frame `index`. Returns (image, holes).");

  m.def(
      "evaluate",
      [](const Sequence& s, std::vector<int> delays, const std::vector<std::string>& methods,
         size_t stride, bool predicted_pose) {
        EvalConfig cfg;
        cfg.delays = std::move(delays);
        cfg.methods.clear();
        for (const auto& name : methods) cfg.methods.push_back(parse_method(name));
        cfg.frame_stride = stride;
        cfg.predicted_pose = predicted_pose;
        std::vector<EvalRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_offline_eval(s.source, cfg);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["sequence_id"] = r.sequence_id;
          d["frame_index"] = r.frame_index;
          d["delay_steps"] = r.delay_steps;
          d["method"] = to_string(r.method);
          d["psnr"] = r.psnr;
          d["ms_ssim"] = r.ms_ssim;
          d["abs_rel"] = r.abs_rel;
          d["delta1"] = r.delta1;
          d["si_loss"] = r.si_loss;
          d["hole_fraction"] = r.hole_fraction;
          out.append(d);
        }
        return out;
      },
      py::arg("sequence"), py::arg("delays") = std::vector<int>{1, 5, 10},
      py::arg("methods") = std::vector<std::string>{"pointcloud", "homography", "cropscale"},
      py::arg("stride") = 1, py::arg("predicted_pose") = false);

  m.def(
      "emulate_link",
      [](const std::vector<double>& capture_times, double delay, double jitter, int skip,
         double drop, uint64_t seed) {
        const auto d = emulate_link(capture_times, NetworkConditions{delay, jitter, skip, drop, seed});
        std::vector<std::tuple<size_t, double, double>> out;
        for (const auto& x : d) out.emplace_back(x.index, x.capture_time, x.arrival_time);
        return out;
      },
      py::arg("capture_times"), py::arg("delay") = 0.0, py::arg("jitter") = 0.0, py::arg("skip") = 1,
      py::arg("drop") = 0.0, py::arg("seed") = 0,
      "Returns (index, capture_time, arrival_time) in arrival order. Times in seconds.");

  m.def(
      "simulate",
      [](const Sequence& s, double delay, double jitter, int skip, double drop, uint64_t seed,
         const std::string& method) {
        LiveConfig cfg;
        cfg.compensator = compensator(method, 0.1, 3e-3, "pullpush");
        FrameLog log;
        {
          py::gil_scoped_release release;
          log = run_live(s.source, NetworkConditions{delay, jitter, skip, drop, seed}, cfg);
        }
        py::list out;
        for (const auto& r : log) out.append(frame_record(r));
        return out;
      },
      py::arg("sequence"), py::arg("delay") = 0.25, py::arg("jitter") = 0.0, py::arg("skip") = 1,
      py::arg("drop") = 0.0, py::arg("seed") = 0, py::arg("method") = "pointcloud",
      "Live compensation on a virtual clock; returns the frame log as dicts.");
}
