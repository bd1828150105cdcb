#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>

#include "levycal/pricing.hpp"

namespace levycal::test {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("levycal-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Equispaced noise-free design on [-A, A].
inline DesignSpec clean_design(int N, double A) {
  DesignSpec d;
  d.N = N;
  d.law = DesignSpec::Law::Explicit;
  d.explicit_x.resize(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) d.explicit_x[static_cast<std::size_t>(j)] = -A + 2.0 * A * j / (N - 1);
  d.noise_delta = 0.0;
  return d;
}

}  // namespace levycal::test
