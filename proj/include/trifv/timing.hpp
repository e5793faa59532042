#pragma once

#include <chrono>

namespace trifv {

/// Wall-clock seconds per phase, mirroring the columns of a strong-scaling
/// timing table.
struct PhaseTimes {
  double convection = 0.0;
  double diffusion = 0.0;
  double linear_solver = 0.0;
  double total = 0.0;
};

/// Adds the lifetime of the guard to `slot`.
class ScopedTimer {
public:
  explicit ScopedTimer(double &slot)
      : slot_(slot), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    slot_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
                 .count();
  }
  ScopedTimer(const ScopedTimer &) = delete;
  ScopedTimer &operator=(const ScopedTimer &) = delete;

private:
  double &slot_;
  std::chrono::steady_clock::time_point start_;
};

} // namespace trifv
