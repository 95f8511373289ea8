#include "chemcons/indexed_priority_queue.hpp"

#include <numeric>

namespace chemcons {

IndexedPriorityQueue::IndexedPriorityQueue(std::vector<double> priorities)
    : heap_(priorities.size()), position_(priorities.size()), priority_(std::move(priorities)) {
  std::iota(heap_.begin(), heap_.end(), std::size_t{0});
  std::iota(position_.begin(), position_.end(), std::size_t{0});
  for (std::size_t i = heap_.size() / 2; i-- > 0;) sift_down(i);
}

void IndexedPriorityQueue::update(std::size_t key, double priority) {
  const double old = priority_[key];
  priority_[key] = priority;
  if (priority <= old) {
    sift_up(position_[key]);
  } else {
    sift_down(position_[key]);
  }
}

void IndexedPriorityQueue::swap_nodes(std::size_t a, std::size_t b) {
  std::swap(heap_[a], heap_[b]);
  position_[heap_[a]] = a;
  position_[heap_[b]] = b;
}

void IndexedPriorityQueue::sift_up(std::size_t pos) {
  while (pos > 0) {
    const std::size_t parent = (pos - 1) / 2;
    if (!less(pos, parent)) break;
    swap_nodes(pos, parent);
    pos = parent;
  }
}

void IndexedPriorityQueue::sift_down(std::size_t pos) {
  const std::size_t n = heap_.size();
  for (;;) {
    const std::size_t left = 2 * pos + 1;
    if (left >= n) break;
    std::size_t best = left;
    const std::size_t right = left + 1;
    if (right < n && less(right, left)) best = right;
    if (!less(best, pos)) break;
    swap_nodes(pos, best);
    pos = best;
  }
}

}  // namespace chemcons
