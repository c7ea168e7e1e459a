#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace toa {

// Strictly increasing list of zero-based anchor indices. Set equality is list
// equality.
class AnchorSet {
 public:
  AnchorSet() = default;

  // Validates indices against [0, m). Throws InvalidInput on duplicates,
  // out-of-range entries or an unsorted list.
  static AnchorSet from_sorted(std::vector<int> indices, int m);
  // Sorts and deduplicates first.
  static AnchorSet from_unsorted(std::vector<int> indices, int m);
  static AnchorSet full(int m);

  int size() const noexcept { return static_cast<int>(idx_.size()); }
  bool empty() const noexcept { return idx_.empty(); }
  int operator[](int i) const { return idx_[static_cast<std::size_t>(i)]; }
  auto begin() const noexcept { return idx_.begin(); }
  auto end() const noexcept { return idx_.end(); }
  const std::vector<int>& indices() const noexcept { return idx_; }

  bool contains(int index) const;
  bool is_subset_of(const AnchorSet& other) const;
  AnchorSet united(const AnchorSet& other) const;
  // Indices in [0, m) not in this set.
  AnchorSet complement(int m) const;

  std::string to_string() const;

  friend bool operator==(const AnchorSet&, const AnchorSet&) = default;

 private:
  explicit AnchorSet(std::vector<int> idx) : idx_(std::move(idx)) {}
  std::vector<int> idx_;
};

}  // namespace toa
