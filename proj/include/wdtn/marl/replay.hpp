#pragma once
// Fixed-width ring-buffer replay store with uniform without-replacement batch
// sampling.

#include <cstdint>
#include <vector>

#include "wdtn/rng.hpp"

namespace wdtn {

class ReplayBuffer {
 public:
  ReplayBuffer(int width, long capacity) : width_(width), cap_(capacity) {}

  int width() const { return width_; }
  long capacity() const { return cap_; }
  long size() const { return size_; }

  void push(const double* row);
  const double* row(long i) const { return data_.data() + i * width_; }

  long pushes() const { return pushes_; }  // total ever pushed (for wraparound)

 private:
  int width_;
  long cap_;
  long size_ = 0;
  long next_ = 0;
  long pushes_ = 0;
  std::vector<double> data_;
};

// k distinct indices uniform over [0, n) (Floyd's subset sampling), k <= n.
std::vector<long> sample_distinct(long n, int k, RngStream& rng);

}  // namespace wdtn
