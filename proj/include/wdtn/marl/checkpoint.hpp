#pragma once
// Versioned binary parameter dumps: magic, version, named double blobs, and a
// trailing checksum over everything before it. Writes are atomic
// (temp + rename); loads validate the magic, version, lengths and checksum and
// throw CheckpointError on any mismatch, so corruption surfaces as an error
// instead of silently wrong weights.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wdtn {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using BlobList = std::vector<std::pair<std::string, std::vector<double>>>;

void save_checkpoint(const std::string& path, const BlobList& blobs);
BlobList load_checkpoint(const std::string& path);

}  // namespace wdtn
