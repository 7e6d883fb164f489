#pragma once

#include <chrono>

namespace crashrepro {

/// Seconds-based time source for budgets and latency accounting.
///
/// The replay loop, the explorer and the mock gateway all read the same clock.
/// A `VirtualClock` makes simulator runs fully reproducible: mocks and the
/// simulator charge a fixed cost per operation instead of consuming real time,
/// so budgets expire after a deterministic number of steps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  /// Charges simulated time. Wall clocks ignore it.
  virtual void advance(double seconds) = 0;
};

class SteadyClock final : public Clock {
 public:
  SteadyClock();
  double now() const override;
  void advance(double) override {}

 private:
  std::chrono::steady_clock::time_point origin_;
};

class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(double start = 0.0) : now_(start) {}
  double now() const override { return now_; }
  void advance(double seconds) override {
    if (seconds > 0) now_ += seconds;
  }

 private:
  double now_;
};

}  // namespace crashrepro
