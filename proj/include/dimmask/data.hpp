// Copyright 2026 The dimmask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIMMASK_DATA_HPP
#define DIMMASK_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dimmask/model.hpp"

namespace dimmask {

enum class Provenance { kAvazu, kSynthetic };

/// Immutable table of bucketized ids (row-major) and binary labels.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::size_t> buckets;
  std::size_t rows = 0;
  std::vector<std::uint32_t> ids;
  std::vector<std::uint8_t> labels;
  Provenance provenance = Provenance::kSynthetic;
  std::uint64_t seed = 0;
  /// Synthetic only: latent dimension per feature, 0 for irrelevant ones.
  std::vector<int> planted_dims;

  std::size_t feature_count() const { return feature_names.size(); }
  std::uint32_t id(std::size_t row, std::size_t feature) const {
    return ids[row * feature_names.size() + feature];
  }
  double positive_rate() const;

  /// Rows [begin, end) as a new dataset.
  Dataset slice(std::size_t begin, std::size_t end) const;
  /// Selected rows as a model batch.
  Batch gather(std::span<const std::size_t> rows) const;
  /// All rows as one batch.
  Batch as_batch() const;
  /// Columns reordered to the spec's feature order (matched by name).
  Dataset project(const ModelSpec& spec) const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);

/// fnv1a64(feature + ":" + value) mod buckets.
std::uint32_t bucket_of(std::string_view feature, std::string_view value, std::size_t buckets);

/// Columns of the Kaggle Avazu CTR file.
const std::vector<std::string>& avazu_columns();

/// Default feature list for Avazu: every column except id and click; hour is
/// reduced to hour-of-day.
std::vector<FeatureSpec> default_avazu_features(std::size_t base_dim, bool use_dml,
                                                const MaskConfig& mask,
                                                double initial_effective_dim);

enum class SplitRule { kLastDayTest, kAllTrain };

struct AvazuOptions {
  SplitRule split = SplitRule::kLastDayTest;
  std::size_t row_cap = 0;  // 0 = keep all rows
  std::uint64_t cap_seed = 0;
};

struct AvazuIngest {
  Dataset train;
  Dataset test;
  std::size_t skipped = 0;
  std::size_t parsed = 0;
};

/// Reads an Avazu-format CSV. Categorical values go through bucket_of; a
/// feature named "hour" uses the two trailing digits of the YYMMDDHH stamp.
AvazuIngest ingest_avazu(const std::filesystem::path& path, const std::vector<FeatureSpec>& features,
                         const AvazuOptions& options = {});

struct SynthConfig {
  std::vector<int> planted;  // one entry per relevant feature, each >= 1
  std::size_t irrelevant = 0;
  std::size_t vocab = 1000;
  std::size_t rows = 10000;
  double noise = 0.5;
  std::uint64_t seed = 1;
  double target_rate = 0.2;

  void validate() const;
};

/// label ~ Bernoulli(sigmoid(b + sum_f u_f . latent_f[id_f] + noise * eps)),
/// latents V x k_f with unit-variance entries, u_f ~ N(0, 1/k_f) (zero for
/// irrelevant features), b bisected so the mean rate is target_rate.
Dataset gen_synthetic(const SynthConfig& config);

/// `#DMLSYN v1 seed=S planted=k1,...` header, then `f0,...,label` CSV.
void write_synthetic(const Dataset& ds, const std::filesystem::path& path, std::size_t vocab);
Dataset read_synthetic(const std::filesystem::path& path);
bool is_synthetic_file(const std::filesystem::path& path);

/// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed);

/// One epoch over a dataset: one full shuffle, then consecutive batches; the
/// final batch may be short.
class BatchIterator {
 public:
  BatchIterator(const Dataset& ds, std::size_t batch_size, std::uint64_t shuffle_seed);

  bool next(Batch& out);
  std::size_t batch_count() const;

 private:
  const Dataset* ds_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace dimmask

#endif  // DIMMASK_DATA_HPP
