#include "ttpc/experiment.hpp"

namespace ttpc {

const BundledDataset& paper_dataset() {
  // Keep in lockstep with data/paper_dataset.csv (hash-pinned in tests).
  static const BundledDataset dataset = {
      "ttpc-paper-dataset-1",
      {{{ComboId::I1, 1.9, 0.1},
        {ComboId::I2, 1.2, 0.1},
        {ComboId::II1, 1.2, 0.1},
        {ComboId::II2, 0.7, 0.1},
        {ComboId::III1, 1.1, 0.1},
        {ComboId::III2, 0.5, 0.1}}},
      0.41,
      2.6,
      0.1,
  };
  return dataset;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace ttpc
