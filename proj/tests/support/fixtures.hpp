#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gazefuse/rng.hpp"
#include "gazefuse/tensor.hpp"

namespace gazefuse::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = false) {
  std::vector<float> values(shape_numel(shape));
  for (auto& v : values) v = static_cast<float>(rng.uniform(lo, hi));
  return Tensor(shape, std::move(values), requires_grad);
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("gazefuse_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace gazefuse::testing
