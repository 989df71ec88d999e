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

#include "dpfw/dataset.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "absl/strings/str_format.h"

namespace dpfw {
namespace {

static_assert(std::endian::native == std::endian::little,
              "dataset I/O assumes a little-endian host");

template <typename T>
void WritePod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool ReadPod(std::ifstream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

}  // namespace

absl::StatusOr<Dataset> Dataset::FromValues(int64_t n, int width,
                                            std::vector<double> values) {
  if (n < 0 || width < 0 ||
      values.size() != static_cast<size_t>(n) * static_cast<size_t>(width)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dataset shape %d x %d does not match %d values", n,
                        width, values.size()));
  }
  Dataset out;
  out.n_ = n;
  out.width_ = width;
  out.values_ = std::move(values);
  return out;
}

absl::Status WriteDatasetBinary(const Dataset& dataset,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError("cannot open " + path);
  out.write(kDatasetMagic, sizeof(kDatasetMagic));
  WritePod<uint64_t>(out, static_cast<uint64_t>(dataset.n()));
  WritePod<uint64_t>(out, static_cast<uint64_t>(dataset.width()));
  WritePod<uint32_t>(out, kEncodingFloat64RowMajor);
  WritePod<uint32_t>(out, 0);
  out.write(
      reinterpret_cast<const char*>(dataset.values().data()),
      static_cast<std::streamsize>(dataset.values().size() * sizeof(double)));
  if (!out) return absl::DataLossError("short write to " + path);
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ReadDatasetBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0) {
    return absl::InvalidArgumentError(path + ": not a dataset file");
  }
  uint64_t n = 0, width = 0;
  uint32_t encoding = 0, reserved = 0;
  if (!ReadPod(in, n) || !ReadPod(in, width) || !ReadPod(in, encoding) ||
      !ReadPod(in, reserved)) {
    return absl::InvalidArgumentError(path + ": truncated header");
  }
  if (encoding != kEncodingFloat64RowMajor) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s: unsupported encoding %d", path, encoding));
  }
  std::vector<double> values(n * width);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    return absl::InvalidArgumentError(path + ": truncated body");
  }
  return Dataset::FromValues(static_cast<int64_t>(n), static_cast<int>(width),
                             std::move(values));
}

absl::Status WriteDatasetCsv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return absl::UnavailableError("cannot open " + path);
  for (int j = 0; j < dataset.width(); ++j) {
    out << (j ? "," : "") << "c" << j;
  }
  out << "\n";
  for (int64_t i = 0; i < dataset.n(); ++i) {
    const auto row = dataset.row(i);
    for (int j = 0; j < dataset.width(); ++j) {
      out << (j ? "," : "") << absl::StrFormat("%.17g", row[j]);
    }
    out << "\n";
  }
  if (!out) return absl::DataLossError("short write to " + path);
  return absl::OkStatus();
}

}  // namespace dpfw
