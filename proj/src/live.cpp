#include "latcomp/error.hpp"
#include "latcomp/io.hpp"
#include "latcomp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

namespace latcomp {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool same_double(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0 || (std::isnan(a) && std::isnan(b));
}

// Latest delivered frames. Readers get a consistent bundle or nothing; a
// short history lets a late reader stay causal.
class FrameStore {
 public:
  void publish(std::shared_ptr<const StampedFrame> frame) {
    std::lock_guard lock(mutex_);
    frames_.push_back(std::move(frame));
    while (frames_.size() > kHistory) frames_.pop_front();
  }

  std::shared_ptr<const StampedFrame> newest_arrived_by(double t) const {
    std::lock_guard lock(mutex_);
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      if ((*it)->arrival_time <= t) return *it;
    }
    return nullptr;
  }

 private:
  static constexpr size_t kHistory = 16;
  mutable std::mutex mutex_;
  std::deque<std::shared_ptr<const StampedFrame>> frames_;
};

// Single-consumer queue feeding the sink on its own thread.
class LogQueue {
 public:
  explicit LogQueue(const FrameSink& sink) : sink_(sink), worker_([this] { drain(); }) {}
  ~LogQueue() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_one();
  }

  void push(FrameRecord record, ImageBuffer image) {
    {
      std::lock_guard lock(mutex_);
      items_.emplace_back(std::move(record), std::move(image));
    }
    ready_.notify_one();
  }

 private:
  void drain() {
    std::unique_lock lock(mutex_);
    while (true) {
      ready_.wait(lock, [this] { return closed_ || !items_.empty(); });
      if (items_.empty()) return;
      auto item = std::move(items_.front());
      items_.pop_front();
      lock.unlock();
      if (sink_) sink_(item.first, item.second);
      lock.lock();
    }
  }

  const FrameSink& sink_;
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<std::pair<FrameRecord, ImageBuffer>> items_;
  bool closed_ = false;
  std::jthread worker_;
};

std::optional<size_t> frame_at_time(const SequenceInfo& info, double t) {
  const auto& ts = info.timestamps;
  auto it = std::lower_bound(ts.begin(), ts.end(), t - 1e-6);
  if (it != ts.end() && std::abs(*it - t) <= 1e-6) return static_cast<size_t>(it - ts.begin());
  return std::nullopt;
}

class Compensator {
 public:
  Compensator(const DepthSource& source, const LiveConfig& cfg)
      : source_(source), info_(sequence_info(source)), comp_(cfg.compensator), cfg_(cfg),
        params_(info_.kinematics()) {
    // Crop+scale constants are fixed per sequence, from the first frame.
    if (comp_.method == Method::kCropScale && !comp_.crop_scale) {
      comp_.crop_scale = calibrate_crop_scale(info_.intrinsics, load_frame(source_, 0).depth);
    }
  }

  std::pair<FrameRecord, ImageBuffer> tick(size_t k, double display_time,
                                           const StampedFrame* latest) {
    FrameRecord rec;
    rec.tick = k;
    rec.display_time = display_time;
    if (latest == nullptr) {
      return {rec, ImageBuffer(info_.intrinsics.width, info_.intrinsics.height,
                               Color::Constant(0.5f))};
    }
    const auto start = Clock::now();
    const FrameBundle& frame = latest->frame;
    rec.waiting = false;
    rec.source_index = latest->index;
    rec.source_capture_time = frame.timestamp;
    rec.source_arrival_time = latest->arrival_time;
    rec.effective_latency = latest->arrival_time - frame.timestamp;

    const double target = cfg_.horizon == HorizonPolicy::kCompensateToNow
                              ? display_time
                              : frame.timestamp + cfg_.fixed_steps / info_.frame_rate;
    rec.horizon = target - frame.timestamp;

    // Predict the base motion over the horizon and apply it to the measured
    // camera pose, keeping its height, pitch and roll.
    const PlanarPose start_planar = camera_to_planar(frame.pose, params_);
    const Prediction pred = predict(start_planar, frame.timestamp,
                                    info_.commands.up_to(display_time), target, params_);
    rec.predicted_pose = pred.pose;
    rec.no_commands = pred.no_commands;
    const RigidPose delta = compose(invert(planar_to_camera(start_planar, params_)),
                                    planar_to_camera(pred.pose, params_));
    const RigidPose dst = compose(frame.pose, delta);

    CompensatedFrame out = compensate(frame, dst, info_, comp_);
    rec.hole_fraction = out.hole_fraction;
    if (cfg_.measure_timings) {
      rec.timings = out.timings;
      rec.timings.depth_load_ms = latest_load_ms_;
      rec.timings.total_ms = ms_since(start);
    }
    if (cfg_.score_against_truth) {
      if (auto j = frame_at_time(info_, target)) {
        const FrameBundle truth = load_frame(source_, *j);
        rec.psnr_compensated = psnr(out.image, truth.image);
        rec.psnr_raw = psnr(frame.image, truth.image);
      }
    }
    return {rec, std::move(out.image)};
  }

  std::shared_ptr<const StampedFrame> ingest(const Delivery& d) {
    const auto start = Clock::now();
    auto frame = std::make_shared<StampedFrame>();
    frame->frame = load_frame(source_, d.index);
    if (cfg_.depth_stage) {
      DepthMap depth = cfg_.depth_stage(frame->frame);
      if (depth.width() != frame->frame.depth.width() || depth.height() != frame->frame.depth.height()) {
        throw Error(ErrorKind::kDimensionMismatch,
                    "depth stage returned " + shape_string(depth.width(), depth.height()) + ", expected " +
                        shape_string(frame->frame.depth.width(), frame->frame.depth.height()));
      }
      frame->frame.depth = std::move(depth);
    }
    frame->index = d.index;
    frame->arrival_time = d.arrival_time;
    latest_load_ms_ = ms_since(start);
    return frame;
  }

  const SequenceInfo& info() const { return info_; }

 private:
  const DepthSource& source_;
  const SequenceInfo& info_;
  CompensatorConfig comp_;
  const LiveConfig& cfg_;
  KinematicParams params_;
  std::atomic<double> latest_load_ms_{0.0};
};

size_t tick_count(const SequenceInfo& info, const LiveConfig& cfg) {
  const double t0 = info.timestamps.front();
  const double t_end = cfg.end_time.value_or(info.timestamps.back());
  if (t_end < t0) return 0;
  return static_cast<size_t>(std::floor((t_end - t0) / cfg.display_period + 1e-9)) + 1;
}

FrameLog run_virtual(const DepthSource& source, const std::vector<Delivery>& deliveries,
                     const LiveConfig& cfg, const FrameSink& sink) {
  Compensator comp(source, cfg);
  const SequenceInfo& info = comp.info();
  const double t0 = info.timestamps.front();
  FrameLog log;
  std::shared_ptr<const StampedFrame> latest;
  size_t next = 0;
  const size_t ticks = tick_count(info, cfg);
  for (size_t k = 0; k < ticks; ++k) {
    const double t_d = t0 + static_cast<double>(k) * cfg.display_period;
    while (next < deliveries.size() && deliveries[next].arrival_time <= t_d) {
      latest = comp.ingest(deliveries[next++]);
    }
    auto [rec, image] = comp.tick(k, t_d, latest.get());
    if (sink) sink(rec, image);
    log.push_back(rec);
  }
  return log;
}

FrameLog run_wall_clock(const DepthSource& source, const std::vector<Delivery>& deliveries,
                        const LiveConfig& cfg, const FrameSink& sink) {
  Compensator comp(source, cfg);
  const SequenceInfo& info = comp.info();
  const double t0 = info.timestamps.front();
  const auto wall_start = Clock::now();
  auto wall_at = [&](double t) {
    return wall_start + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(t - t0));
  };

  FrameStore store;
  std::atomic<bool> stop{false};
  std::jthread ingestion([&] {
    for (const Delivery& d : deliveries) {
      if (stop) return;
      std::this_thread::sleep_until(wall_at(d.arrival_time));
      store.publish(comp.ingest(d));
    }
  });

  FrameLog log;
  {
    LogQueue logger(sink);
    const size_t ticks = tick_count(info, cfg);
    for (size_t k = 0; k < ticks; ++k) {
      const double t_d = t0 + static_cast<double>(k) * cfg.display_period;
      const auto scheduled = wall_at(t_d);
      const bool late = Clock::now() > scheduled + std::chrono::milliseconds(1);
      std::this_thread::sleep_until(scheduled);
      const auto latest = store.newest_arrived_by(t_d);
      auto [rec, image] = comp.tick(k, t_d, latest.get());
      rec.overrun = late;
      log.push_back(rec);
      logger.push(std::move(rec), std::move(image));
    }
  }
  stop = true;
  return log;
}

}  // namespace

void NetworkConditions::validate() const {
  if (!(base_delay >= 0) || !(jitter_stddev >= 0) || skip < 0 || !(drop_probability >= 0) ||
      !(drop_probability <= 1)) {
    throw Error(ErrorKind::kInvalidArgument,
                "network conditions need delay >= 0, jitter >= 0, skip >= 0, drop in [0, 1]");
  }
}

std::vector<Delivery> emulate_link(const std::vector<double>& capture_times,
                                   const NetworkConditions& cond) {
  cond.validate();
  for (size_t i = 1; i < capture_times.size(); ++i) {
    if (!(capture_times[i] > capture_times[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument, "capture times must be strictly increasing");
    }
  }
  const size_t keep_every = cond.skip <= 1 ? 1 : static_cast<size_t>(cond.skip);
  std::mt19937_64 rng(cond.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Delivery> sent;
  for (size_t i = 0; i < capture_times.size(); i += keep_every) {
    // Both draws happen for every kept frame so the stream of random numbers
    // does not depend on which frames end up dropped.
    const double j = cond.jitter_stddev * jitter(rng);
    const bool dropped = unit(rng) < cond.drop_probability;
    if (dropped) continue;
    const double latency = std::max(0.0, cond.base_delay + j);
    sent.push_back({i, capture_times[i], capture_times[i] + latency});
  }
  std::stable_sort(sent.begin(), sent.end(),
                   [](const Delivery& a, const Delivery& b) { return a.arrival_time < b.arrival_time; });
  std::vector<Delivery> delivered;
  for (const Delivery& d : sent) {
    if (!delivered.empty() && d.capture_time <= delivered.back().capture_time) continue;
    delivered.push_back(d);
  }
  return delivered;
}

void LiveConfig::validate() const {
  if (!(display_period > 0)) throw Error(ErrorKind::kInvalidArgument, "display_period must be > 0");
  if (horizon == HorizonPolicy::kFixedSteps && fixed_steps < 0) {
    throw Error(ErrorKind::kInvalidArgument, "fixed_steps must be >= 0");
  }
  compensator.splat.validate();
  compensator.inpaint.validate();
}

bool FrameRecord::operator==(const FrameRecord& o) const {
  return tick == o.tick && same_double(display_time, o.display_time) && waiting == o.waiting &&
         source_index == o.source_index && same_double(source_capture_time, o.source_capture_time) &&
         same_double(source_arrival_time, o.source_arrival_time) &&
         same_double(effective_latency, o.effective_latency) && same_double(horizon, o.horizon) &&
         same_double(predicted_pose.x, o.predicted_pose.x) &&
         same_double(predicted_pose.y, o.predicted_pose.y) &&
         same_double(predicted_pose.theta, o.predicted_pose.theta) &&
         no_commands == o.no_commands && same_double(hole_fraction, o.hole_fraction) &&
         overrun == o.overrun && same_double(timings.depth_load_ms, o.timings.depth_load_ms) &&
         same_double(timings.render_ms, o.timings.render_ms) &&
         same_double(timings.inpaint_ms, o.timings.inpaint_ms) &&
         same_double(timings.total_ms, o.timings.total_ms) &&
         same_double(psnr_compensated, o.psnr_compensated) && same_double(psnr_raw, o.psnr_raw);
}

FrameLog run_live(const DepthSource& source, const NetworkConditions& cond, const LiveConfig& cfg,
                  const FrameSink& sink) {
  cfg.validate();
  const SequenceInfo& info = sequence_info(source);
  info.validate();
  if (info.frame_count() == 0) return {};
  const std::vector<Delivery> deliveries = emulate_link(info.timestamps, cond);
  return cfg.wall_clock ? run_wall_clock(source, deliveries, cfg, sink)
                        : run_virtual(source, deliveries, cfg, sink);
}

void write_frame_log_csv(std::ostream& out, const FrameLog& log) {
  out << "tick,display_time,waiting,source_index,source_capture_time,source_arrival_time,"
         "effective_latency,horizon,pred_x,pred_y,pred_theta,no_commands,hole_fraction,overrun,"
         "depth_load_ms,render_ms,inpaint_ms,total_ms,psnr_compensated,psnr_raw\n";
  for (const FrameRecord& r : log) {
    out << r.tick << ',' << format_double(r.display_time) << ',' << (r.waiting ? 1 : 0) << ','
        << r.source_index << ',' << format_double(r.source_capture_time) << ','
        << format_double(r.source_arrival_time) << ',' << format_double(r.effective_latency) << ','
        << format_double(r.horizon) << ',' << format_double(r.predicted_pose.x) << ','
        << format_double(r.predicted_pose.y) << ',' << format_double(r.predicted_pose.theta) << ','
        << (r.no_commands ? 1 : 0) << ',' << format_double(r.hole_fraction) << ','
        << (r.overrun ? 1 : 0) << ',' << format_double(r.timings.depth_load_ms) << ','
        << format_double(r.timings.render_ms) << ',' << format_double(r.timings.inpaint_ms) << ','
        << format_double(r.timings.total_ms) << ',' << format_double(r.psnr_compensated) << ','
        << format_double(r.psnr_raw) << '\n';
  }
}

}  // namespace latcomp
