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

#include "dimmask/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dimmask {

double Dataset::positive_rate() const {
  if (rows == 0) return 0.0;
  std::size_t pos = 0;
  for (auto l : labels) pos += l;
  return static_cast<double>(pos) / static_cast<double>(rows);
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows) throw std::out_of_range("dataset slice out of range");
  Dataset out = *this;
  const std::size_t nf = feature_count();
  out.rows = end - begin;
  out.ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(begin * nf),
                 ids.begin() + static_cast<std::ptrdiff_t>(end * nf));
  out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    labels.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

Batch Dataset::gather(std::span<const std::size_t> rows_sel) const {
  const std::size_t nf = feature_count();
  Batch b(rows_sel.size(), nf);
  for (std::size_t i = 0; i < rows_sel.size(); ++i) {
    const std::size_t r = rows_sel[i];
    for (std::size_t f = 0; f < nf; ++f) b.id(i, f) = ids[r * nf + f];
    b.labels[i] = labels[r];
  }
  return b;
}

Batch Dataset::as_batch() const {
  std::vector<std::size_t> all(rows);
  for (std::size_t i = 0; i < rows; ++i) all[i] = i;
  return gather(all);
}

Dataset Dataset::project(const ModelSpec& spec) const {
  std::vector<std::size_t> src;
  for (const auto& f : spec.features) {
    auto it = std::find(feature_names.begin(), feature_names.end(), f.name);
    if (it == feature_names.end()) throw InputError("dataset has no feature '" + f.name + "'");
    src.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  Dataset out;
  out.rows = rows;
  out.provenance = provenance;
  out.seed = seed;
  const std::size_t nf = feature_count();
  for (std::size_t j = 0; j < src.size(); ++j) {
    out.feature_names.push_back(feature_names[src[j]]);
    out.buckets.push_back(buckets[src[j]]);
    if (!planted_dims.empty()) out.planted_dims.push_back(planted_dims[src[j]]);
  }
  out.ids.resize(rows * src.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < src.size(); ++j) out.ids[r * src.size() + j] = ids[r * nf + src[j]];
  out.labels = labels;
  return out;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t bucket_of(std::string_view feature, std::string_view value, std::size_t buckets) {
  std::string key;
  key.reserve(feature.size() + 1 + value.size());
  key.append(feature).append(":").append(value);
  return static_cast<std::uint32_t>(fnv1a64(key) % buckets);
}

const std::vector<std::string>& avazu_columns() {
  static const std::vector<std::string> cols = {
      "id",         "click",      "hour",          "C1",           "banner_pos",
      "site_id",    "site_domain", "site_category", "app_id",       "app_domain",
      "app_category", "device_id", "device_ip",     "device_model", "device_type",
      "device_conn_type", "C14",   "C15",           "C16",          "C17",
      "C18",        "C19",        "C20",           "C21"};
  return cols;
}

std::vector<FeatureSpec> default_avazu_features(std::size_t base_dim, bool use_dml,
                                                const MaskConfig& mask,
                                                double initial_effective_dim) {
  static const std::vector<std::string> high_card = {"site_id", "app_id", "device_id", "device_ip",
                                                     "device_model"};
  std::vector<FeatureSpec> out;
  for (const auto& col : avazu_columns()) {
    if (col == "id" || col == "click") continue;
    FeatureSpec f;
    f.name = col;
    if (col == "hour") f.buckets = 24;
    else if (std::find(high_card.begin(), high_card.end(), col) != high_card.end())
      f.buckets = std::size_t{1} << 18;
    else f.buckets = 256;
    f.base_dim = base_dim;
    f.use_dml = use_dml;
    f.initial_effective_dim = initial_effective_dim;
    f.mask = mask;
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

struct RawRow {
  std::vector<std::uint32_t> ids;
  std::uint8_t label = 0;
  std::string day;
};

}  // namespace

AvazuIngest ingest_avazu(const std::filesystem::path& path, const std::vector<FeatureSpec>& features,
                         const AvazuOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = split_csv(trim_cr(line));
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t click_col = column("click");
  const std::size_t hour_col = column("hour");
  std::vector<std::size_t> feature_cols;
  for (const auto& f : features) feature_cols.push_back(column(f.name));

  AvazuIngest result;
  std::vector<RawRow> kept;
  RngStream reservoir_rng(options.cap_seed, 0x7265736572766f69ULL);
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    const auto row_text = trim_cr(line);
    if (row_text.empty()) continue;
    const auto cells = split_csv(row_text);
    RawRow row;
    bool ok = cells.size() == header.size();
    if (ok) {
      const auto click = cells[click_col];
      const auto hour = cells[hour_col];
      ok = (click == "0" || click == "1") && hour.size() == 8 &&
           std::all_of(hour.begin(), hour.end(), [](char c) { return c >= '0' && c <= '9'; });
      if (ok) {
        row.label = click == "1" ? 1 : 0;
        row.day = std::string(hour.substr(0, 6));
        for (std::size_t j = 0; j < features.size(); ++j) {
          const auto& f = features[j];
          if (f.name == "hour") {
            const int hod = (hour[6] - '0') * 10 + (hour[7] - '0');
            row.ids.push_back(static_cast<std::uint32_t>(hod % static_cast<int>(f.buckets)));
          } else {
            row.ids.push_back(bucket_of(f.name, cells[feature_cols[j]], f.buckets));
          }
        }
      }
    }
    if (!ok) {
      ++result.skipped;
      continue;
    }
    ++result.parsed;
    // Algorithm R reservoir; slot order is restored below.
    if (options.row_cap == 0 || kept.size() < options.row_cap) {
      kept.push_back(std::move(row));
      kept.back().ids.push_back(static_cast<std::uint32_t>(seen));
    } else {
      const std::uint64_t j = reservoir_rng.next_below(seen + 1);
      if (j < options.row_cap) {
        kept[j] = std::move(row);
        kept[j].ids.push_back(static_cast<std::uint32_t>(seen));
      }
    }
    ++seen;
  }
  std::sort(kept.begin(), kept.end(), [](const RawRow& a, const RawRow& b) { return a.ids.back() < b.ids.back(); });

  std::string last_day;
  for (const auto& r : kept) last_day = std::max(last_day, r.day);

  auto make = [&](bool test_split) {
    Dataset ds;
    ds.provenance = Provenance::kAvazu;
    for (const auto& f : features) {
      ds.feature_names.push_back(f.name);
      ds.buckets.push_back(f.buckets);
    }
    for (const auto& r : kept) {
      const bool is_test = options.split == SplitRule::kLastDayTest && r.day == last_day;
      if (is_test != test_split) continue;
      ds.ids.insert(ds.ids.end(), r.ids.begin(), r.ids.end() - 1);
      ds.labels.push_back(r.label);
      ++ds.rows;
    }
    return ds;
  };
  result.train = make(false);
  result.test = make(true);
  return result;
}

void SynthConfig::validate() const {
  if (planted.empty()) throw InputError("synthetic data needs at least one relevant feature");
  for (int k : planted)
    if (k < 1) throw InputError("planted dimensions must be >= 1");
  if (vocab < 1) throw InputError("vocab must be >= 1");
  if (rows < 1) throw InputError("rows must be >= 1");
  if (!(noise >= 0.0)) throw InputError("noise must be >= 0");
  if (!(target_rate > 0.0 && target_rate < 1.0)) throw InputError("target rate must lie in (0, 1)");
}

Dataset gen_synthetic(const SynthConfig& config) {
  config.validate();
  const std::size_t relevant = config.planted.size();
  const std::size_t nf = relevant + config.irrelevant;
  const std::size_t V = config.vocab;

  // Latent tables; irrelevant features get a 1-d latent that is never read.
  std::vector<int> k(nf, 1);
  for (std::size_t f = 0; f < relevant; ++f) k[f] = config.planted[f];
  std::vector<Matrix> latent;
  for (std::size_t f = 0; f < nf; ++f) {
    RngStream rng(config.seed, 0x100 + f);
    Matrix m(V, static_cast<std::size_t>(k[f]));
    for (auto& v : m.values()) v = rng.next_normal();
    latent.push_back(std::move(m));
  }
  // Linear mixing vectors u_f ~ N(0, 1/k_f); zero for irrelevant features.
  std::vector<std::vector<double>> mix(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    RngStream rng(config.seed, 0x200 + f);
    mix[f].assign(static_cast<std::size_t>(k[f]), 0.0);
    if (f < relevant)
      for (auto& u : mix[f]) u = rng.next_normal() / std::sqrt(static_cast<double>(k[f]));
  }
  Dataset ds;
  ds.provenance = Provenance::kSynthetic;
  ds.seed = config.seed;
  ds.rows = config.rows;
  for (std::size_t f = 0; f < nf; ++f) {
    ds.feature_names.push_back("f" + std::to_string(f));
    ds.buckets.push_back(V);
    ds.planted_dims.push_back(f < relevant ? k[f] : 0);
  }
  ds.ids.resize(config.rows * nf);
  RngStream id_rng(config.seed, 0x400);
  RngStream noise_rng(config.seed, 0x500);
  std::vector<double> score(config.rows);
  for (std::size_t r = 0; r < config.rows; ++r) {
    for (std::size_t f = 0; f < nf; ++f)
      ds.ids[r * nf + f] = static_cast<std::uint32_t>(id_rng.next_below(V));
    double s = 0.0;
    for (std::size_t f = 0; f < relevant; ++f) {
      const auto row = latent[f].row(ds.ids[r * nf + f]);
      double dot = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) dot += mix[f][i] * row[i];
      s += dot;
    }
    s += config.noise * noise_rng.next_normal();
    score[r] = s;
  }
  // Bias so the mean click probability matches the target rate.
  auto mean_rate = [&](double bias) {
    double acc = 0.0;
    for (double s : score) acc += sigmoid(bias + s);
    return acc / static_cast<double>(score.size());
  };
  // Large noise scales push the bias well past any fixed bracket.
  double lo = -50.0, hi = 50.0;
  while (mean_rate(lo) > config.target_rate && lo > -1e6) lo *= 2.0;
  while (mean_rate(hi) < config.target_rate && hi < 1e6) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_rate(mid) < config.target_rate ? lo : hi) = mid;
  }
  const double bias = 0.5 * (lo + hi);
  RngStream label_rng(config.seed, 0x600);
  ds.labels.resize(config.rows);
  for (std::size_t r = 0; r < config.rows; ++r)
    ds.labels[r] = label_rng.next_uniform() < sigmoid(bias + score[r]) ? 1 : 0;
  return ds;
}

void write_synthetic(const Dataset& ds, const std::filesystem::path& path, std::size_t vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "#DMLSYN v1 seed=" << ds.seed << " planted=";
  for (std::size_t f = 0; f < ds.planted_dims.size(); ++f)
    out << (f ? "," : "") << ds.planted_dims[f];
  out << " vocab=" << vocab << "\n";
  const std::size_t nf = ds.feature_count();
  for (std::size_t f = 0; f < nf; ++f) out << ds.feature_names[f] << ",";
  out << "label\n";
  std::string line;
  for (std::size_t r = 0; r < ds.rows; ++r) {
    line.clear();
    for (std::size_t f = 0; f < nf; ++f) {
      line += std::to_string(ds.ids[r * nf + f]);
      line += ',';
    }
    line += ds.labels[r] ? '1' : '0';
    line += '\n';
    out << line;
  }
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

bool is_synthetic_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  return in && std::getline(in, line) && line.rfind("#DMLSYN", 0) == 0;
}

Dataset read_synthetic(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("#DMLSYN v1", 0) != 0)
    throw InputError(path.string() + ": missing '#DMLSYN v1' header");
  Dataset ds;
  ds.provenance = Provenance::kSynthetic;
  std::size_t vocab = 0;
  {
    std::istringstream hs(line.substr(10));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      try {
        if (key == "seed") ds.seed = std::stoull(val);
        else if (key == "vocab") vocab = std::stoull(val);
        else if (key == "planted") {
          std::istringstream ps(val);
          std::string k;
          while (std::getline(ps, k, ',')) ds.planted_dims.push_back(std::stoi(k));
        }
      } catch (const std::exception&) {
        throw InputError(path.string() + ": bad header value for '" + key + "'");
      }
    }
  }
  if (!std::getline(in, line)) throw InputError(path.string() + ": missing column header");
  auto header = split_csv(trim_cr(line));
  if (header.size() < 2 || header.back() != "label")
    throw InputError(path.string() + ": last column must be 'label'");
  const std::size_t nf = header.size() - 1;
  for (std::size_t f = 0; f < nf; ++f) ds.feature_names.emplace_back(header[f]);
  std::uint32_t max_id = 0;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto cells = split_csv(text);
    if (cells.size() != nf + 1)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(nf + 1) + " fields");
    for (std::size_t f = 0; f <= nf; ++f) {
      std::uint32_t v = 0;
      const auto cell = cells[f];
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size() || (f == nf && v > 1))
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad value '" +
                         std::string(cell) + "'");
      if (f < nf) {
        ds.ids.push_back(v);
        max_id = std::max(max_id, v);
      } else {
        ds.labels.push_back(static_cast<std::uint8_t>(v));
      }
    }
    ++ds.rows;
  }
  if (vocab == 0) vocab = static_cast<std::size_t>(max_id) + 1;
  if (max_id >= vocab && ds.rows > 0)
    throw InputError(path.string() + ": id " + std::to_string(max_id) + " exceeds vocab");
  ds.buckets.assign(nf, vocab);
  if (!ds.planted_dims.empty() && ds.planted_dims.size() != nf)
    throw InputError(path.string() + ": planted list length does not match the feature count");
  return ds;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  RngStream rng(seed, 0x73687566666c65ULL);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

BatchIterator::BatchIterator(const Dataset& ds, std::size_t batch_size, std::uint64_t shuffle_seed)
    : ds_(&ds), batch_size_(batch_size), order_(shuffled_order(ds.rows, shuffle_seed)) {
  if (batch_size < 1) throw InputError("batch size must be >= 1");
}

bool BatchIterator::next(Batch& out) {
  if (pos_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), pos_ + batch_size_);
  out = ds_->gather(std::span<const std::size_t>(order_).subspan(pos_, end - pos_));
  pos_ = end;
  return true;
}

std::size_t BatchIterator::batch_count() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

}  // namespace dimmask
