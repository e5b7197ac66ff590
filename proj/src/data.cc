//
// Copyright 2026 The ShuffleDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "shuffledp/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shuffledp/errors.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

bool ParseDouble(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> SplitComma(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Dataset MakeBlobs(const BlobSpec& spec) {
  if (spec.n == 0 || spec.dim == 0 || spec.classes < 2) {
    throw ConfigError("blobs need n > 0, dim > 0 and classes >= 2");
  }
  Rng rng = MakeStream(spec.seed, Stream::kData);
  std::vector<std::vector<double>> centers(static_cast<size_t>(spec.classes));
  for (auto& c : centers) {
    c.resize(spec.dim);
    double norm = 0.0;
    for (double& v : c) {
      v = rng.Normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : c) v *= spec.separation / norm;
  }
  Dataset d;
  d.num_classes = spec.classes;
  for (size_t i = 0; i < spec.n; ++i) {
    const int label = static_cast<int>(i % static_cast<size_t>(spec.classes));
    std::vector<double> x(spec.dim);
    for (size_t j = 0; j < spec.dim; ++j) {
      x[j] = centers[static_cast<size_t>(label)][j] + rng.Normal();
    }
    d.features.push_back(std::move(x));
    d.labels.push_back(label);
  }
  return d;
}

BlobSpec ParseBlobSpec(const std::string& text) {
  std::string_view s = text;
  constexpr std::string_view kPrefix = "synthetic:";
  if (s.substr(0, kPrefix.size()) == kPrefix) s.remove_prefix(kPrefix.size());
  BlobSpec spec;
  if (s.empty() || s == "synthetic") return spec;
  for (std::string_view kv : SplitComma(s)) {
    const size_t eq = kv.find('=');
    double v = 0.0;
    if (eq == std::string_view::npos || !ParseDouble(kv.substr(eq + 1), v)) {
      throw ConfigError("bad synthetic data field '" + std::string(kv) + "'");
    }
    const std::string_view key = kv.substr(0, eq);
    if (key == "n") {
      spec.n = static_cast<size_t>(v);
    } else if (key == "dim") {
      spec.dim = static_cast<size_t>(v);
    } else if (key == "classes") {
      spec.classes = static_cast<int>(v);
    } else if (key == "sep") {
      spec.separation = v;
    } else if (key == "seed") {
      spec.seed = static_cast<uint64_t>(v);
    } else {
      throw ConfigError("unknown synthetic data key '" + std::string(key) + "'");
    }
  }
  return spec;
}

Dataset LoadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  Dataset d;
  std::string line;
  bool first = true;
  int max_label = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitComma(line);
    std::vector<double> row(fields.size());
    bool numeric = fields.size() >= 2;
    for (size_t i = 0; numeric && i < fields.size(); ++i) {
      numeric = ParseDouble(fields[i], row[i]);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("non-numeric row in '" + path + "': " + line);
    }
    first = false;
    const double label = row.back();
    row.pop_back();
    if (label < 0 || label != std::floor(label)) {
      throw ConfigError("labels must be non-negative integers");
    }
    if (!d.features.empty() && row.size() != d.dim()) {
      throw ConfigError("ragged rows in '" + path + "'");
    }
    d.features.push_back(std::move(row));
    d.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  if (d.features.empty()) throw ConfigError("no examples in '" + path + "'");
  d.num_classes = std::max(2, max_label + 1);
  return d;
}

Dataset LoadDataset(const std::string& source) {
  if (source.rfind("synthetic", 0) == 0) return MakeBlobs(ParseBlobSpec(source));
  return LoadCsv(source);
}

}  // namespace shuffledp
