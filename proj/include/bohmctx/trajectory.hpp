#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "bohmctx/guidance.hpp"
#include "bohmctx/outcome.hpp"
#include "bohmctx/propagate.hpp"

namespace bohmctx::guidance {

/// One Bohmian run: a configuration-space point at every integration time.
struct Trajectory {
  std::size_t dims = 1;
  std::vector<double> times;
  std::vector<double> points;  // times.size() * dims, row per time
  Outcome outcome = Outcome::unresolved;
  std::size_t regularization_events = 0;
  /// Set when the trajectory left the grid domain; integration stopped there.
  std::optional<double> exit_time;

  std::size_t size() const { return times.size(); }
  std::span<const double> point(std::size_t k) const {
    return {points.data() + k * dims, dims};
  }
  std::span<const double> initial() const { return point(0); }
  std::span<const double> final() const { return point(size() - 1); }
  bool failed() const { return exit_time.has_value(); }
};

/// Sequence of guidance frames in increasing time. `frame(k)` is requested
/// with non-decreasing k during integration, so implementations may generate
/// frames lazily and drop old ones after `release_before`.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t count() const = 0;
  virtual double time(std::size_t k) const = 0;
  virtual const GuidanceFrame& frame(std::size_t k) = 0;
  virtual void release_before(std::size_t /*k*/) {}
};

class StoredFrames final : public FrameSource {
 public:
  StoredFrames(std::vector<double> times, std::vector<GuidanceFrame> frames);

  std::size_t count() const override { return frames_.size(); }
  double time(std::size_t k) const override { return times_[k]; }
  const GuidanceFrame& frame(std::size_t k) override { return frames_[k]; }
  const GuidanceFrame& at(std::size_t k) const { return frames_[k]; }

 private:
  std::vector<double> times_;
  std::vector<GuidanceFrame> frames_;
};

/// Propagates a spinor on demand and builds each guidance frame when first
/// requested, keeping only frames not yet released. Memory stays bounded by a
/// few frames however long the run is. Each frame is checked by the support
/// guard as it is produced.
class StreamingFrames final : public FrameSource {
 public:
  StreamingFrames(const Spinor& initial, const numerics::Potential& potential, double dt,
                  std::size_t n_steps, std::size_t stride, VelocityModel model, const Units& units);
  ~StreamingFrames() override;

  std::size_t count() const override { return count_; }
  double time(std::size_t k) const override;
  const GuidanceFrame& frame(std::size_t k) override;
  void release_before(std::size_t k) override;

  /// State after the last produced step.
  const Spinor& state() const { return state_; }

 private:
  Spinor state_;
  std::unique_ptr<numerics::SplitStepper> stepper_;
  numerics::Fft fft_;
  VelocityModel model_;
  Units units_;
  double dt_;
  std::size_t stride_;
  std::size_t count_;
  std::size_t produced_ = 0;  // frames built so far
  std::size_t first_ = 0;     // index of frames_.front()
  std::deque<std::unique_ptr<GuidanceFrame>> frames_;
};

StoredFrames build_frames(const numerics::Propagation<Field>& run, const Units& units);
StoredFrames build_frames(const numerics::Propagation<Spinor>& run, VelocityModel model,
                          const Units& units);

struct IntegrationOptions {
  std::size_t threads = 0;  // 0 = thread_count()
  /// Ignore the frames' Gordon term and follow the convective velocity.
  bool convective_only = false;
};

/// Classical RK4 on the frame velocities, linear in time between frames.
/// Every trajectory gets a point at t0 + k dt for k = 0..K with t0 + K dt the
/// last frame time. dt must divide the frame span and not exceed the
/// smallest frame spacing.
std::vector<Trajectory> integrate_trajectories(FrameSource& frames, std::span<const Coord> initial,
                                               double dt, const IntegrationOptions& options = {});

/// Convenience: builds frames from a stored propagation, then integrates.
std::vector<Trajectory> integrate_trajectories(const numerics::Propagation<Field>& run,
                                               std::span<const Coord> initial, double dt,
                                               const Units& units,
                                               const IntegrationOptions& options = {});
std::vector<Trajectory> integrate_trajectories(const numerics::Propagation<Spinor>& run,
                                               VelocityModel model, std::span<const Coord> initial,
                                               double dt, const Units& units,
                                               const IntegrationOptions& options = {});

/// CSV with columns trajectory_id, t, <coordinate names...>, regularized_flag.
/// Every `stride`-th time is written, plus the final one. A non-empty
/// `ensemble` adds a leading ensemble column.
void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> trajectories,
                            std::span<const std::string> coordinate_names, std::size_t stride = 1,
                            std::string_view ensemble = {}, bool header = true);

}  // namespace bohmctx::guidance
