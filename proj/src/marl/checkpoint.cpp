#include "wdtn/marl/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wdtn {

namespace {

constexpr char kMagic[8] = {'W', 'D', 'T', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a_bytes(const char* data, size_t n,
                          std::uint64_t h = 1469598103934665603ull) {
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
void put(std::string& out, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  out.append(p, sizeof(T));
}

template <class T>
T get(const std::string& in, size_t& at) {
  if (at + sizeof(T) > in.size())
    throw CheckpointError("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const BlobList& blobs) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(blobs.size()));
  for (const auto& [name, data] : blobs) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put(out, static_cast<std::uint64_t>(data.size()));
    out.append(reinterpret_cast<const char*>(data.data()),
               data.size() * sizeof(double));
  }
  const std::uint64_t sum = fnv1a_bytes(out.data(), out.size());
  put(out, sum);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot write " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw CheckpointError("cannot rename " + tmp + " to " + path);
}

BlobList load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string in = ss.str();

  if (in.size() < sizeof(kMagic) + 2 * sizeof(std::uint32_t) +
                      sizeof(std::uint64_t))
    throw CheckpointError("checkpoint too small: " + path);
  const std::uint64_t stored =
      *reinterpret_cast<const std::uint64_t*>(in.data() + in.size() -
                                              sizeof(std::uint64_t));
  const std::uint64_t computed =
      fnv1a_bytes(in.data(), in.size() - sizeof(std::uint64_t));
  if (stored != computed)
    throw CheckpointError("checkpoint checksum mismatch: " + path);

  size_t at = 0;
  if (std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("bad checkpoint magic: " + path);
  at += sizeof(kMagic);
  const std::uint32_t version = get<std::uint32_t>(in, at);
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version");
  const std::uint32_t n = get<std::uint32_t>(in, at);

  BlobList blobs;
  blobs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t name_len = get<std::uint32_t>(in, at);
    if (at + name_len > in.size()) throw CheckpointError("checkpoint truncated");
    std::string name(in.data() + at, name_len);
    at += name_len;
    const std::uint64_t count = get<std::uint64_t>(in, at);
    if (at + count * sizeof(double) > in.size() - sizeof(std::uint64_t))
      throw CheckpointError("checkpoint truncated");
    std::vector<double> data(count);
    std::memcpy(data.data(), in.data() + at, count * sizeof(double));
    at += count * sizeof(double);
    blobs.emplace_back(std::move(name), std::move(data));
  }
  if (at != in.size() - sizeof(std::uint64_t))
    throw CheckpointError("checkpoint has trailing bytes");
  return blobs;
}

}  // namespace wdtn
