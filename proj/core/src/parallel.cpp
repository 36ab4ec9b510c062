#include "pfqr/parallel.hpp"

#include <algorithm>

namespace pfqr {

int resolve_threads(int requested) noexcept {
  const int hardware = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  return std::clamp(requested, 1, hardware * 4);
}

}  // namespace pfqr
