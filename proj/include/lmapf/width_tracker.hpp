#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace lmapf {

// Generated-node counters per priority-tree level.
class WidthTracker {
 public:
  static constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

  explicit WidthTracker(std::size_t limit = kUnlimited) : limit_(limit) {}

  std::size_t limit() const { return limit_; }
  bool violated() const { return violated_; }

  // Records `n` new nodes on `level`. Returns false (and leaves the counters
  // untouched) if that would push the level past the limit.
  bool add(std::size_t level, std::size_t n) {
    if (counts_.size() <= level) counts_.resize(level + 1, 0);
    if (limit_ != kUnlimited && counts_[level] + n > limit_) {
      violated_ = true;
      return false;
    }
    counts_[level] += n;
    return true;
  }

  std::size_t count(std::size_t level) const {
    return level < counts_.size() ? counts_[level] : 0;
  }
  std::size_t width() const {
    return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
  }
  std::size_t levels() const { return counts_.size(); }

 private:
  std::size_t limit_;
  std::vector<std::size_t> counts_;
  bool violated_ = false;
};

}  // namespace lmapf
