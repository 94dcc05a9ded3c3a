#include "wdtn/marl/replay.hpp"

#include <algorithm>
#include <cassert>

namespace wdtn {

void ReplayBuffer::push(const double* row) {
  if (data_.empty()) data_.resize(static_cast<size_t>(cap_) * width_, 0.0);
  double* dst = data_.data() + next_ * width_;
  for (int j = 0; j < width_; ++j) dst[j] = row[j];
  next_ = (next_ + 1) % cap_;
  size_ = std::min(size_ + 1, cap_);
  ++pushes_;
}

std::vector<long> sample_distinct(long n, int k, RngStream& rng) {
  assert(k <= n);
  // Floyd's algorithm: uniform k-subset in O(k) expected time.
  std::vector<long> out;
  out.reserve(k);
  auto contains = [&](long v) {
    return std::find(out.begin(), out.end(), v) != out.end();
  };
  for (long j = n - k; j < n; ++j) {
    const long t = static_cast<long>(rng.uniform_int(j + 1));
    if (contains(t))
      out.push_back(j);
    else
      out.push_back(t);
  }
  return out;
}

}  // namespace wdtn
