#include "pql/funcapprox/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pql::fa {

namespace {

constexpr char kMagic[8] = {'P', 'Q', 'L', 'C', 'K', 'P', 'T', '\x01'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
  T v;
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  f.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(ckpt.nets.size()));
  for (const auto& [name, net] : ckpt.nets) {
    put<std::uint32_t>(f, static_cast<std::uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(f, static_cast<std::uint32_t>(net.sizes.size()));
    for (std::size_t s : net.sizes) put<std::uint32_t>(f, static_cast<std::uint32_t>(s));
    for (Act a : net.acts) put<std::uint8_t>(f, static_cast<std::uint8_t>(a));
    f.write(reinterpret_cast<const char*>(net.flat.data()),
            static_cast<std::streamsize>(net.flat.size() * sizeof(float)));
  }
  put<std::uint32_t>(f, static_cast<std::uint32_t>(ckpt.norm.dim()));
  put<std::int64_t>(f, ckpt.norm.count);
  f.write(reinterpret_cast<const char*>(ckpt.norm.mean.data()),
          static_cast<std::streamsize>(ckpt.norm.mean.size() * sizeof(double)));
  f.write(reinterpret_cast<const char*>(ckpt.norm.m2.data()),
          static_cast<std::streamsize>(ckpt.norm.m2.size() * sizeof(double)));
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic/version in " + path);
  Checkpoint ckpt;
  const auto n_nets = get<std::uint32_t>(f);
  for (std::uint32_t k = 0; k < n_nets; ++k) {
    const auto name_len = get<std::uint32_t>(f);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const auto n_sizes = get<std::uint32_t>(f);
    if (n_sizes < 2) throw std::runtime_error("checkpoint: bad layer count");
    std::vector<std::size_t> sizes(n_sizes);
    for (auto& s : sizes) s = get<std::uint32_t>(f);
    std::vector<Act> acts(n_sizes - 1);
    for (auto& a : acts) a = static_cast<Act>(get<std::uint8_t>(f));
    auto net = Mlp<float>::zeros(sizes, acts);
    f.read(reinterpret_cast<char*>(net.flat.data()),
           static_cast<std::streamsize>(net.flat.size() * sizeof(float)));
    if (!f) throw std::runtime_error("checkpoint: truncated parameters");
    ckpt.nets.emplace_back(std::move(name), std::move(net));
  }
  const auto dim = get<std::uint32_t>(f);
  ckpt.norm.count = get<std::int64_t>(f);
  ckpt.norm.mean.resize(dim);
  ckpt.norm.m2.resize(dim);
  f.read(reinterpret_cast<char*>(ckpt.norm.mean.data()),
         static_cast<std::streamsize>(dim * sizeof(double)));
  f.read(reinterpret_cast<char*>(ckpt.norm.m2.data()),
         static_cast<std::streamsize>(dim * sizeof(double)));
  if (!f) throw std::runtime_error("checkpoint: truncated normalizer");
  return ckpt;
}

}  // namespace pql::fa
