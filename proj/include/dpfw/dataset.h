// Copyright 2026 The dpfw Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPFW_DATASET_H_
#define DPFW_DATASET_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpfw {

// n samples of fixed width, row-major.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int64_t n, int width)
      : n_(n), width_(width), values_(static_cast<size_t>(n) * width, 0.0) {}

  static absl::StatusOr<Dataset> FromValues(int64_t n, int width,
                                            std::vector<double> values);

  int64_t n() const { return n_; }
  int width() const { return width_; }
  std::span<const double> row(int64_t i) const {
    return std::span<const double>(values_).subspan(i * width_, width_);
  }
  std::span<double> mutable_row(int64_t i) {
    return std::span<double>(values_).subspan(i * width_, width_);
  }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const Dataset& other) const = default;

 private:
  int64_t n_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

// Binary layout (little endian):
//   bytes 0-7   magic "DPFWDS01"
//   bytes 8-15  uint64 n
//   bytes 16-23 uint64 width
//   bytes 24-27 uint32 encoding (0 = float64 row-major)
//   bytes 28-31 uint32 reserved, zero
//   body        n * width float64 values, row-major
inline constexpr char kDatasetMagic[8] = {'D', 'P', 'F', 'W',
                                          'D', 'S', '0', '1'};
inline constexpr uint32_t kEncodingFloat64RowMajor = 0;

absl::Status WriteDatasetBinary(const Dataset& dataset,
                                const std::string& path);
absl::StatusOr<Dataset> ReadDatasetBinary(const std::string& path);

// Header c0,...,c{width-1}; values with 17 significant digits.
absl::Status WriteDatasetCsv(const Dataset& dataset, const std::string& path);

}  // namespace dpfw

#endif  // DPFW_DATASET_H_
