#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace chemcons {

/// Binary min-heap over a fixed set of keys 0..n-1, each holding one
/// priority. Keys can be updated in place in O(log n). Equal priorities are
/// ordered by the smaller key.
class IndexedPriorityQueue {
 public:
  static constexpr double infinity = std::numeric_limits<double>::infinity();

  IndexedPriorityQueue() = default;
  explicit IndexedPriorityQueue(std::vector<double> priorities);

  std::size_t size() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }

  std::size_t top_key() const { return heap_.front(); }
  double top_priority() const { return priority_[heap_.front()]; }
  double priority(std::size_t key) const { return priority_[key]; }

  void update(std::size_t key, double priority);

 private:
  bool less(std::size_t a, std::size_t b) const {
    const double pa = priority_[heap_[a]];
    const double pb = priority_[heap_[b]];
    return pa < pb || (pa == pb && heap_[a] < heap_[b]);
  }
  void swap_nodes(std::size_t a, std::size_t b);
  void sift_up(std::size_t pos);
  void sift_down(std::size_t pos);

  std::vector<std::size_t> heap_;      // heap position -> key
  std::vector<std::size_t> position_;  // key -> heap position
  std::vector<double> priority_;       // key -> priority
};

}  // namespace chemcons
