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

#ifndef SHUFFLEDP_DATA_H_
#define SHUFFLEDP_DATA_H_

#include <cstdint>
#include <string>

#include "shuffledp/model.h"

namespace shuffledp {

struct BlobSpec {
  size_t n = 512;
  size_t dim = 16;
  int classes = 2;
  double separation = 3.0;  // distance of class centers from the origin
  uint64_t seed = 1;
};

// Isotropic unit-variance Gaussian blobs, one per class, labels balanced
// round-robin.
Dataset MakeBlobs(const BlobSpec& spec);

// "synthetic:n=512,dim=16,classes=2,sep=3,seed=1" (any subset of keys).
BlobSpec ParseBlobSpec(const std::string& text);

// Numeric CSV, one example per row, label in the last column. A first row
// that does not parse as numbers is treated as a header.
Dataset LoadCsv(const std::string& path);

// Dispatches on a "synthetic:" prefix, otherwise reads CSV.
Dataset LoadDataset(const std::string& source);

}  // namespace shuffledp

#endif  // SHUFFLEDP_DATA_H_
