#include "bohmctx/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "bohmctx/errors.hpp"
#include "bohmctx/parallel.hpp"

namespace bohmctx::guidance {

StoredFrames::StoredFrames(std::vector<double> times, std::vector<GuidanceFrame> frames)
    : times_(std::move(times)), frames_(std::move(frames)) {
  if (times_.size() != frames_.size() || frames_.empty()) {
    throw InvalidInput("frames: need one time per frame and at least one frame");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw InvalidInput("frames: times must increase");
  }
}

StoredFrames build_frames(const numerics::Propagation<Field>& run, const Units& units) {
  if (run.frames.empty()) throw InvalidInput("frames: propagation stored no frames");
  numerics::Fft fft(run.frames.front().grid());
  std::vector<GuidanceFrame> frames;
  frames.reserve(run.frames.size());
  for (const auto& f : run.frames) frames.push_back(GuidanceFrame::from_field(f, units, fft));
  return StoredFrames(run.frame_times, std::move(frames));
}

StoredFrames build_frames(const numerics::Propagation<Spinor>& run, VelocityModel model,
                          const Units& units) {
  if (run.frames.empty()) throw InvalidInput("frames: propagation stored no frames");
  numerics::Fft fft(run.frames.front().grid());
  std::vector<GuidanceFrame> frames;
  frames.reserve(run.frames.size());
  for (const auto& s : run.frames) frames.push_back(GuidanceFrame::from_spinor(s, units, model, fft));
  return StoredFrames(run.frame_times, std::move(frames));
}

StreamingFrames::StreamingFrames(const Spinor& initial, const numerics::Potential& potential, double dt,
                                 std::size_t n_steps, std::size_t stride, VelocityModel model,
                                 const Units& units)
    : state_(initial), fft_(initial.grid()), model_(model), units_(units), dt_(dt), stride_(stride) {
  if (stride == 0 || n_steps == 0 || n_steps % stride != 0) {
    throw InvalidInput("streaming frames: stride must be positive and divide the step count");
  }
  if (!(dt > 0.0)) throw InvalidInput("streaming frames: dt must be positive");
  count_ = n_steps / stride + 1;
  stepper_ = std::make_unique<numerics::SplitStepper>(initial.grid(), potential, true, dt, units);
}

StreamingFrames::~StreamingFrames() = default;

double StreamingFrames::time(std::size_t k) const {
  return static_cast<double>(k * stride_) * dt_;
}

const GuidanceFrame& StreamingFrames::frame(std::size_t k) {
  if (k >= count_) throw InvalidInput("streaming frames: frame index out of range");
  if (k < first_) throw InvalidInput("streaming frames: frame already released");
  while (produced_ <= k) {
    if (produced_ > 0) {
      for (std::size_t s = 0; s < stride_; ++s) {
        stepper_->step(state_);
        if (!state_.all_finite()) {
          throw PropagationFailure("propagate: NaN/Inf in field", (produced_ - 1) * stride_ + s + 1);
        }
      }
    }
    numerics::check_support(state_, time(produced_));
    frames_.push_back(std::make_unique<GuidanceFrame>(GuidanceFrame::from_spinor(state_, units_, model_, fft_)));
    ++produced_;
  }
  return *frames_[k - first_];
}

void StreamingFrames::release_before(std::size_t k) {
  while (first_ < k && !frames_.empty() && first_ + 1 < produced_) {
    frames_.pop_front();
    ++first_;
  }
}

namespace {

struct Walker {
  Coord x{};
  Coord last_velocity{};
  std::size_t regularized = 0;
  bool alive = true;
};

// Frame pair bracketing one evaluation time.
struct TimeSlot {
  const GuidanceFrame* a = nullptr;
  const GuidanceFrame* b = nullptr;
  double w = 0.0;  // weight of b
};

VelocitySample eval(const TimeSlot& slot, const Coord& x, bool convective) {
  auto at = [&](const GuidanceFrame* f) { return convective ? f->convective_velocity(x) : f->velocity(x); };
  VelocitySample va = at(slot.a);
  if (slot.w == 0.0 || slot.b == nullptr) return va;
  const VelocitySample vb = at(slot.b);
  VelocitySample out;
  out.regularized = va.regularized || vb.regularized;
  for (std::size_t d = 0; d < 2; ++d) {
    out.velocity[d] = (1.0 - slot.w) * va.velocity[d] + slot.w * vb.velocity[d];
  }
  return out;
}

}  // namespace

std::vector<Trajectory> integrate_trajectories(FrameSource& frames, std::span<const Coord> initial,
                                               double dt, const IntegrationOptions& options) {
  const std::size_t nf = frames.count();
  if (nf < 2) throw InvalidInput("integrate: need at least two frames");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("integrate: dt must be positive");
  const double t0 = frames.time(0);
  const double span = frames.time(nf - 1) - t0;
  double min_spacing = span;
  for (std::size_t k = 1; k < nf; ++k) min_spacing = std::min(min_spacing, frames.time(k) - frames.time(k - 1));
  if (dt > min_spacing * (1.0 + 1e-9)) {
    throw InvalidInput("integrate: dt exceeds the frame spacing");
  }
  const auto steps = static_cast<std::size_t>(std::llround(span / dt));
  if (steps == 0 || std::abs(static_cast<double>(steps) * dt - span) > 1e-9 * std::max(1.0, span)) {
    throw InvalidInput("integrate: dt must divide the frame time span");
  }

  const GuidanceFrame& first = frames.frame(0);
  const Grid grid = first.grid();
  const auto dims = static_cast<std::size_t>(grid.dims());
  const std::size_t n = initial.size();

  std::vector<Trajectory> out(n);
  std::vector<Walker> walkers(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!grid.contains(initial[i])) throw InvalidInput("integrate: initial position outside the grid");
    out[i].dims = dims;
    out[i].times.reserve(steps + 1);
    out[i].points.reserve((steps + 1) * dims);
    out[i].times.push_back(t0);
    for (std::size_t d = 0; d < dims; ++d) out[i].points.push_back(initial[i][d]);
    walkers[i].x = initial[i];
  }

  std::size_t cursor = 0;  // frames[cursor] <= t < frames[cursor + 1]
  auto slot_at = [&](double t) {
    while (cursor + 2 < nf && frames.time(cursor + 1) <= t) ++cursor;
    // Frame references stay valid: sources keep frames >= the released index.
    TimeSlot slot;
    const double ta = frames.time(cursor);
    const double tb = frames.time(cursor + 1);
    slot.a = &frames.frame(cursor);
    slot.b = &frames.frame(cursor + 1);
    slot.w = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
    if (slot.w == 1.0) {
      slot.a = slot.b;
      slot.w = 0.0;
    }
    return slot;
  };

  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * dt;
    const double t_next = s + 1 == steps ? t0 + span : t0 + static_cast<double>(s + 1) * dt;
    frames.release_before(cursor);
    const TimeSlot s0 = slot_at(t);
    const TimeSlot sh = slot_at(t + 0.5 * dt);
    const TimeSlot s1 = slot_at(t_next);

    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            Walker& w = walkers[i];
            if (!w.alive) continue;
            auto velocity = [&](const TimeSlot& slot, const Coord& x, Coord& v) {
              if (!grid.contains(x)) return false;
              const VelocitySample vs = eval(slot, x, options.convective_only);
              if (vs.regularized) {
                ++w.regularized;
                v = w.last_velocity;
              } else {
                v = vs.velocity;
                w.last_velocity = v;
              }
              return true;
            };
            Coord k1{}, k2{}, k3{}, k4{}, x = w.x;
            bool ok = velocity(s0, x, k1);
            Coord probe{};
            if (ok) {
              for (std::size_t d = 0; d < dims; ++d) probe[d] = x[d] + 0.5 * dt * k1[d];
              ok = velocity(sh, probe, k2);
            }
            if (ok) {
              for (std::size_t d = 0; d < dims; ++d) probe[d] = x[d] + 0.5 * dt * k2[d];
              ok = velocity(sh, probe, k3);
            }
            if (ok) {
              for (std::size_t d = 0; d < dims; ++d) probe[d] = x[d] + dt * k3[d];
              ok = velocity(s1, probe, k4);
            }
            if (ok) {
              for (std::size_t d = 0; d < dims; ++d) {
                x[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
              }
              ok = grid.contains(x) && std::isfinite(x[0]) && std::isfinite(x[1]);
            }
            Trajectory& tr = out[i];
            if (!ok) {
              w.alive = false;
              tr.exit_time = t;
              continue;
            }
            w.x = x;
            tr.times.push_back(t_next);
            for (std::size_t d = 0; d < dims; ++d) tr.points.push_back(x[d]);
          }
        },
        options.threads);
  }
  for (std::size_t i = 0; i < n; ++i) out[i].regularization_events = walkers[i].regularized;
  return out;
}

std::vector<Trajectory> integrate_trajectories(const numerics::Propagation<Field>& run,
                                               std::span<const Coord> initial, double dt,
                                               const Units& units, const IntegrationOptions& options) {
  StoredFrames frames = build_frames(run, units);
  return integrate_trajectories(frames, initial, dt, options);
}

std::vector<Trajectory> integrate_trajectories(const numerics::Propagation<Spinor>& run,
                                               VelocityModel model, std::span<const Coord> initial,
                                               double dt, const Units& units,
                                               const IntegrationOptions& options) {
  StoredFrames frames = build_frames(run, model, units);
  return integrate_trajectories(frames, initial, dt, options);
}

void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> trajectories,
                            std::span<const std::string> coordinate_names, std::size_t stride,
                            std::string_view ensemble, bool header) {
  stride = std::max<std::size_t>(1, stride);
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  if (header) {
    if (!ensemble.empty()) out << "ensemble,";
    out << "trajectory_id,t";
    for (const auto& name : coordinate_names) out << ',' << name;
    out << ",regularized_flag\n";
  }
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    const Trajectory& tr = trajectories[id];
    const int flag = tr.regularization_events > 0 ? 1 : 0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      if (k % stride != 0 && k + 1 != tr.size()) continue;
      if (!ensemble.empty()) out << ensemble << ',';
      out << id << ',' << tr.times[k];
      const auto p = tr.point(k);
      for (std::size_t d = 0; d < std::min(p.size(), coordinate_names.size()); ++d) out << ',' << p[d];
      out << ',' << flag << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace bohmctx::guidance
