#include "latcomp/io.hpp"

#include "latcomp/error.hpp"

#include <json.hpp>
#include <png.h>

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace latcomp {
namespace {

using nlohmann::json;

Error data_error(const fs::path& path, const std::string& reason) {
  return Error(ErrorKind::kData, path.string() + ": " + reason);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, const fs::path& path, size_t line) {
  double value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw data_error(path, "line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, size_t columns) {
  std::ifstream in(path);
  if (!in) throw data_error(path, "cannot open");
  std::string line;
  std::vector<std::vector<double>> rows;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && !line.empty() && (std::isalpha(static_cast<unsigned char>(line[0])))) {
      continue;  // header
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != columns) {
      throw data_error(path, "line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(columns) + " columns, got " +
                                 std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(columns);
    for (const auto& f : fields) row.push_back(parse_double(f, path, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

json pose_to_json(const RigidPose& pose) {
  json r = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(pose.rotation(i, k));
  return {{"rotation", r},
          {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

RigidPose pose_from_json(const json& j) {
  const auto& r = j.at("rotation");
  const auto& t = j.at("translation");
  if (r.size() != 9 || t.size() != 3) {
    throw Error(ErrorKind::kData, "pose needs 9 rotation and 3 translation values");
  }
  Eigen::Matrix3d rot;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) rot(i, k) = r[3 * i + k].get<double>();
  return RigidPose::from_noisy(rot, {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw Error(ErrorKind::kData, where + ": unknown key '" + key + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_png(const fs::path& path, const ImageBuffer& image) {
  std::vector<uint8_t> bytes(3 * image.pixel_count());
  const float* p = image.data();
  for (size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<uint8_t>(std::lround(std::clamp(p[i], 0.0f, 1.0f) * 255.0f));
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw data_error(path, std::string("png write failed: ") + img.message);
  }
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  std::vector<uint8_t> bytes(mask.size());
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.at(i) ? 255 : 0;
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(mask.width());
  img.height = static_cast<png_uint_32>(mask.height());
  img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw data_error(path, std::string("png write failed: ") + img.message);
  }
}

ImageBuffer read_png(const fs::path& path) {
  if (!fs::exists(path)) throw data_error(path, "missing file");
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw data_error(path, std::string("corrupt png: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> bytes(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&img);
    throw data_error(path, std::string("corrupt png: ") + img.message);
  }
  ImageBuffer image(static_cast<int>(img.width), static_cast<int>(img.height));
  float* p = image.data();
  for (size_t i = 0; i < bytes.size(); ++i) p[i] = static_cast<float>(bytes[i]) / 255.0f;
  return image;
}

void write_pfm(const fs::path& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error(path, "cannot open for writing");
  out << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";
  std::vector<float> row(depth.width());
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) {
      row[x] = depth.valid(x, y) ? static_cast<float>(depth(x, y))
                                 : std::numeric_limits<float>::infinity();
      if constexpr (std::endian::native == std::endian::big) {
        row[x] = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<uint32_t>(row[x])));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw data_error(path, "write failed");
}

DepthMap read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(path, "missing file");
  std::string magic;
  int width = 0, height = 0;
  double scale = 0;
  in >> magic >> width >> height >> scale;
  if (!in || magic != "Pf" || width <= 0 || height <= 0 || scale == 0) {
    throw data_error(path, "corrupt pfm header");
  }
  in.get();  // single whitespace before the payload
  const bool file_little = scale < 0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  DepthMap depth(width, height);
  std::vector<float> row(width);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(width * sizeof(float)));
    if (!in) throw data_error(path, "truncated pfm payload");
    for (int x = 0; x < width; ++x) {
      float v = row[x];
      if (swap) v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<uint32_t>(v)));
      depth.set(x, y, static_cast<double>(v));
    }
  }
  return depth;
}

std::string manifest_to_text(const SequenceManifest& m) {
  json j;
  j["name"] = m.name;
  j["intrinsics"] = {{"fx", m.intrinsics.fx}, {"fy", m.intrinsics.fy},
                     {"cx", m.intrinsics.cx}, {"cy", m.intrinsics.cy},
                     {"width", m.intrinsics.width}, {"height", m.intrinsics.height}};
  j["frame_rate"] = m.frame_rate;
  j["pose_frame"] = m.pose_frame == PoseFrame::kCamera ? "camera" : "base+mount";
  j["camera_mount"] = pose_to_json(m.camera_mount);
  j["depth_range"] = {{"min", m.depth_range.min}, {"max", m.depth_range.max}};
  if (m.dominant_plane) {
    const auto& n = m.dominant_plane->normal;
    j["dominant_plane"] = {{"normal", {n.x(), n.y(), n.z()}},
                           {"offset", m.dominant_plane->offset}};
  }
  j["frame_count"] = m.frame_count;
  j["files"] = {{"rgb", m.rgb_pattern}, {"depth", m.depth_pattern},
                {"poses", m.poses_file}, {"commands", m.commands_file}};
  return j.dump(2) + "\n";
}

SequenceManifest manifest_from_text(const std::string& text) {
  SequenceManifest m;
  try {
    const json j = json::parse(text);
    check_keys(j, {"name", "intrinsics", "frame_rate", "pose_frame", "camera_mount", "depth_range",
                   "dominant_plane", "frame_count", "files"},
               "manifest");
    m.name = j.at("name").get<std::string>();
    const auto& k = j.at("intrinsics");
    m.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                    k.at("cy").get<double>(), k.at("width").get<int>(), k.at("height").get<int>()};
    m.frame_rate = j.at("frame_rate").get<double>();
    const auto frame = j.at("pose_frame").get<std::string>();
    if (frame == "camera") m.pose_frame = PoseFrame::kCamera;
    else if (frame == "base+mount") m.pose_frame = PoseFrame::kBaseWithMount;
    else throw Error(ErrorKind::kData, "manifest: pose_frame must be camera or base+mount");
    if (j.contains("camera_mount")) m.camera_mount = pose_from_json(j.at("camera_mount"));
    m.depth_range = {j.at("depth_range").at("min").get<double>(),
                     j.at("depth_range").at("max").get<double>()};
    if (j.contains("dominant_plane")) {
      const auto& p = j.at("dominant_plane");
      const auto& n = p.at("normal");
      m.dominant_plane = WorldPlane{
          Eigen::Vector3d(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()),
          p.at("offset").get<double>()};
    }
    m.frame_count = j.at("frame_count").get<size_t>();
    const auto& f = j.at("files");
    m.rgb_pattern = f.at("rgb").get<std::string>();
    m.depth_pattern = f.at("depth").get<std::string>();
    m.poses_file = f.at("poses").get<std::string>();
    m.commands_file = f.at("commands").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kData, std::string("manifest: ") + e.what());
  }
  if (!(m.frame_rate > 0)) throw Error(ErrorKind::kData, "manifest: frame_rate must be positive");
  if (!(m.depth_range.min < m.depth_range.max)) {
    throw Error(ErrorKind::kData, "manifest: depth_range.min must be below depth_range.max");
  }
  return m;
}

std::string format_frame_path(const std::string& pattern, size_t index) {
  char buf[512];
  const int n = std::snprintf(buf, sizeof(buf), pattern.c_str(), static_cast<int>(index));
  if (n < 0 || static_cast<size_t>(n) >= sizeof(buf)) {
    throw Error(ErrorKind::kData, "bad file pattern '" + pattern + "'");
  }
  return std::string(buf, static_cast<size_t>(n));
}

fs::path SequenceBundle::rgb_path(size_t index) const {
  return root / format_frame_path(manifest.rgb_pattern, index);
}

fs::path SequenceBundle::depth_path(size_t index) const {
  return root / format_frame_path(manifest.depth_pattern, index);
}

void write_poses_csv(const fs::path& path, const std::vector<double>& timestamps,
                     const std::vector<RigidPose>& poses) {
  std::ofstream out(path);
  if (!out) throw data_error(path, "cannot open for writing");
  out << "timestamp_s,r00,r01,r02,tx,r10,r11,r12,ty,r20,r21,r22,tz\n";
  for (size_t i = 0; i < poses.size(); ++i) {
    out << format_double(timestamps[i]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << ',' << format_double(poses[i].rotation(r, c));
      out << ',' << format_double(poses[i].translation[r]);
    }
    out << '\n';
  }
}

void read_poses_csv(const fs::path& path, std::vector<double>& timestamps,
                    std::vector<RigidPose>& poses) {
  timestamps.clear();
  poses.clear();
  for (const auto& row : read_numeric_csv(path, 13)) {
    Eigen::Matrix3d rot;
    Eigen::Vector3d t;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) rot(r, c) = row[1 + 4 * r + c];
      t[r] = row[1 + 4 * r + 3];
    }
    timestamps.push_back(row[0]);
    poses.push_back(RigidPose::from_noisy(rot, t));
  }
}

void write_commands_csv(const fs::path& path, const CommandBuffer& commands) {
  std::ofstream out(path);
  if (!out) throw data_error(path, "cannot open for writing");
  out << "timestamp_s,v_mps,omega_radps\n";
  for (const auto& c : commands.commands()) {
    out << format_double(c.timestamp) << ',' << format_double(c.v) << ','
        << format_double(c.omega) << '\n';
  }
}

CommandBuffer read_commands_csv(const fs::path& path) {
  std::vector<VelocityCommand> cmds;
  for (const auto& row : read_numeric_csv(path, 3)) cmds.push_back({row[0], row[1], row[2]});
  try {
    return CommandBuffer(std::move(cmds));
  } catch (const Error& e) {
    throw data_error(path, e.what());
  }
}

SequenceBundle load_bundle(const fs::path& root) {
  SequenceBundle bundle;
  bundle.root = root;
  const fs::path manifest_path = root / "manifest";
  std::ifstream in(manifest_path);
  if (!in) throw data_error(manifest_path, "missing manifest");
  std::stringstream text;
  text << in.rdbuf();
  try {
    bundle.manifest = manifest_from_text(text.str());
  } catch (const Error& e) {
    throw data_error(manifest_path, e.what());
  }
  const SequenceManifest& m = bundle.manifest;

  SequenceInfo& info = bundle.info;
  info.name = m.name;
  info.intrinsics = m.intrinsics;
  info.frame_rate = m.frame_rate;
  info.pose_frame = m.pose_frame;
  info.camera_mount = m.camera_mount;
  info.depth_range = m.depth_range;
  info.dominant_plane = m.dominant_plane;
  read_poses_csv(root / m.poses_file, info.timestamps, info.poses);
  if (info.poses.size() != m.frame_count) {
    throw data_error(root / m.poses_file, std::to_string(info.poses.size()) +
                                              " poses but manifest declares " +
                                              std::to_string(m.frame_count) + " frames");
  }
  const fs::path commands_path = root / m.commands_file;
  if (!fs::exists(commands_path)) throw data_error(commands_path, "missing file");
  info.commands = read_commands_csv(commands_path);
  try {
    info.validate();
  } catch (const Error& e) {
    throw data_error(manifest_path, e.what());
  }
  for (size_t i = 0; i < m.frame_count; ++i) {
    if (!fs::exists(bundle.rgb_path(i))) throw data_error(bundle.rgb_path(i), "missing file");
    if (!fs::exists(bundle.depth_path(i))) throw data_error(bundle.depth_path(i), "missing file");
  }
  // Extra frames on disk beyond frame_count also indicate a mismatch.
  if (fs::exists(bundle.rgb_path(m.frame_count))) {
    throw data_error(bundle.rgb_path(m.frame_count),
                     "frame beyond declared frame_count " + std::to_string(m.frame_count));
  }
  return bundle;
}

FrameFiles read_bundle_frame(const SequenceBundle& bundle, size_t index) {
  if (index >= bundle.manifest.frame_count) {
    throw Error(ErrorKind::kInvalidArgument, "frame index " + std::to_string(index) +
                                                 " out of range (" +
                                                 std::to_string(bundle.manifest.frame_count) + ")");
  }
  FrameFiles frame{read_png(bundle.rgb_path(index)), read_pfm(bundle.depth_path(index))};
  const auto& intr = bundle.info.intrinsics;
  if (frame.image.width() != intr.width || frame.image.height() != intr.height) {
    throw data_error(bundle.rgb_path(index),
                     "image is " + shape_string(frame.image.width(), frame.image.height()) +
                         ", manifest says " + shape_string(intr.width, intr.height));
  }
  if (frame.depth.width() != intr.width || frame.depth.height() != intr.height) {
    throw data_error(bundle.depth_path(index),
                     "depth is " + shape_string(frame.depth.width(), frame.depth.height()) +
                         ", manifest says " + shape_string(intr.width, intr.height));
  }
  const DepthRange range = bundle.info.depth_range;
  for (size_t i = 0; i < frame.depth.pixel_count(); ++i) {
    const double d = frame.depth.at(i);
    if (frame.depth.valid(i) && (d < range.min || d > range.max)) frame.depth.invalidate(i);
  }
  return frame;
}

void write_bundle(const fs::path& root, const SequenceInfo& info,
                  const std::function<FrameFiles(size_t)>& frame_at) {
  info.validate();
  SequenceManifest m;
  m.name = info.name;
  m.intrinsics = info.intrinsics;
  m.frame_rate = info.frame_rate;
  m.pose_frame = info.pose_frame;
  m.camera_mount = info.camera_mount;
  m.depth_range = info.depth_range;
  m.dominant_plane = info.dominant_plane;
  m.frame_count = info.frame_count();

  SequenceBundle layout{root, m, {}};
  fs::create_directories(root);
  for (size_t i = 0; i < m.frame_count; ++i) {
    fs::create_directories(layout.rgb_path(i).parent_path());
    fs::create_directories(layout.depth_path(i).parent_path());
    const FrameFiles frame = frame_at(i);
    write_png(layout.rgb_path(i), frame.image);
    write_pfm(layout.depth_path(i), frame.depth);
  }
  write_poses_csv(root / m.poses_file, info.timestamps, info.poses);
  write_commands_csv(root / m.commands_file, info.commands);
  std::ofstream out(root / "manifest");
  out << manifest_to_text(m);
  if (!out) throw data_error(root / "manifest", "write failed");
}

}  // namespace latcomp
