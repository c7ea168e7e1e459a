#include "toa/anchor_set.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <sstream>

#include "toa/errors.hpp"

namespace toa {

AnchorSet AnchorSet::from_sorted(std::vector<int> indices, int m) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= m) {
      throw InvalidInput("anchor index " + std::to_string(indices[i]) +
                         " out of range [0, " + std::to_string(m) + ")");
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw InvalidInput("anchor indices must be strictly increasing");
    }
  }
  return AnchorSet(std::move(indices));
}

AnchorSet AnchorSet::from_unsorted(std::vector<int> indices, int m) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return from_sorted(std::move(indices), m);
}

AnchorSet AnchorSet::full(int m) {
  std::vector<int> idx(static_cast<std::size_t>(std::max(m, 0)));
  std::iota(idx.begin(), idx.end(), 0);
  return AnchorSet(std::move(idx));
}

bool AnchorSet::contains(int index) const {
  return std::binary_search(idx_.begin(), idx_.end(), index);
}

bool AnchorSet::is_subset_of(const AnchorSet& other) const {
  return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
}

AnchorSet AnchorSet::united(const AnchorSet& other) const {
  std::vector<int> out;
  out.reserve(idx_.size() + other.idx_.size());
  std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                 std::back_inserter(out));
  return AnchorSet(std::move(out));
}

AnchorSet AnchorSet::complement(int m) const {
  std::vector<int> out;
  for (int i = 0; i < m; ++i) {
    if (!contains(i)) out.push_back(i);
  }
  return AnchorSet(std::move(out));
}

std::string AnchorSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < idx_.size(); ++i) os << (i ? "," : "") << idx_[i];
  os << '}';
  return os.str();
}

}  // namespace toa
