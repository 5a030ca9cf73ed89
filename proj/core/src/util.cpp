#include <cmath>
#include <numbers>
#include <unordered_map>

#include "skillspace/atomic_file.hpp"
#include "skillspace/error.hpp"
#include "skillspace/rng.hpp"

namespace skillspace {

AtomicFile::AtomicFile(std::filesystem::path target)
    : target_(std::move(target)) {
  temp_ = target_;
  temp_ += ".tmp";
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    if (out_.is_open()) out_.close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

std::ofstream& AtomicFile::stream() {
  if (!out_.is_open()) {
    out_.open(temp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open " + temp_.string() + " for writing");
  }
  return out_;
}

void AtomicFile::commit() {
  if (out_.is_open()) {
    out_.flush();
    if (!out_) throw IoError("write failed for " + temp_.string());
    out_.close();
  }
  std::error_code ec;
  std::filesystem::rename(temp_, target_, ec);
  if (ec) {
    throw IoError("cannot rename " + temp_.string() + " to " +
                  target_.string() + ": " + ec.message());
  }
  committed_ = true;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  AtomicFile file(path);
  file.stream() << content;
  file.commit();
}

double Rng::normal(double mean, double sd) {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sd * z;
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
  if (k > n) k = n;
  std::vector<std::size_t> out;
  out.reserve(k);
  // Partial Fisher-Yates over a sparse permutation.
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    swapped[j] = vi;
    swapped[i] = vj;
    out.push_back(vj);
  }
  return out;
}

}  // namespace skillspace
