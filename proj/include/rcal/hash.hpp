#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <string>

namespace rcal {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

// Hash of a matrix's values in row-major order, independent of storage order.
inline std::uint64_t matrix_hash(const Eigen::MatrixXd& m) {
  std::uint64_t h = kFnvOffset;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      h = fnv1a64(&v, sizeof(v), h);
    }
  }
  return h;
}

std::string hash_hex(std::uint64_t h);

// FNV-1a over a file's raw bytes. Throws DataError if the file cannot be read.
std::uint64_t file_hash(const std::string& path);

}  // namespace rcal
