#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace cwc {

template <typename T>
struct Counted {
  T value;
  std::uint64_t count;
};

/// Sorted multiset stored as distinct values with positive multiplicities.
/// Ordering of T is given by an ADL-visible `int compare(const T&, const T&)`.
template <typename T>
class Multiset {
 public:
  using Entry = Counted<T>;

  Multiset() = default;

  static Multiset from_unsorted(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return compare(a.value, b.value) < 0; });
    Multiset out;
    for (auto& e : entries) {
      if (e.count == 0) continue;
      if (!out.items_.empty() && compare(out.items_.back().value, e.value) == 0) {
        out.items_.back().count += e.count;
      } else {
        out.items_.push_back(std::move(e));
      }
    }
    return out;
  }

  const std::vector<Entry>& entries() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const Entry& operator[](std::size_t i) const { return items_[i]; }
  std::size_t distinct() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& e : items_) n += e.count;
    return n;
  }

  std::optional<std::size_t> find(const T& v) const {
    auto it = lower(v);
    if (it != items_.end() && compare(it->value, v) == 0)
      return static_cast<std::size_t>(it - items_.begin());
    return std::nullopt;
  }

  std::uint64_t count(const T& v) const {
    auto i = find(v);
    return i ? items_[*i].count : 0;
  }

  void add(const T& v, std::uint64_t n = 1) {
    if (n == 0) return;
    auto it = lower(v);
    if (it != items_.end() && compare(it->value, v) == 0) {
      it->count += n;
    } else {
      items_.insert(it, Entry{v, n});
    }
  }

  /// Removes n copies; returns false (and leaves the set untouched) if fewer exist.
  bool remove(const T& v, std::uint64_t n = 1) {
    if (n == 0) return true;
    auto it = lower(v);
    if (it == items_.end() || compare(it->value, v) != 0 || it->count < n) return false;
    it->count -= n;
    if (it->count == 0) items_.erase(it);
    return true;
  }

  bool contains(const Multiset& sub) const {
    auto it = items_.begin();
    for (const auto& e : sub.items_) {
      while (it != items_.end() && compare(it->value, e.value) < 0) ++it;
      if (it == items_.end() || compare(it->value, e.value) != 0 || it->count < e.count)
        return false;
    }
    return true;
  }

  Multiset plus(const Multiset& other) const {
    Multiset out;
    out.items_.reserve(items_.size() + other.items_.size());
    auto a = items_.begin();
    auto b = other.items_.begin();
    while (a != items_.end() || b != other.items_.end()) {
      int c = a == items_.end() ? 1 : b == other.items_.end() ? -1 : compare(a->value, b->value);
      if (c < 0) {
        out.items_.push_back(*a++);
      } else if (c > 0) {
        out.items_.push_back(*b++);
      } else {
        out.items_.push_back(Entry{a->value, a->count + b->count});
        ++a;
        ++b;
      }
    }
    return out;
  }

  /// Multiset difference; `sub` must be contained in *this.
  Multiset minus(const Multiset& sub) const {
    Multiset out;
    out.items_.reserve(items_.size());
    auto b = sub.items_.begin();
    for (const auto& e : items_) {
      std::uint64_t take = 0;
      if (b != sub.items_.end() && compare(b->value, e.value) == 0) {
        take = b->count;
        ++b;
      }
      if (e.count > take) out.items_.push_back(Entry{e.value, e.count - take});
    }
    return out;
  }

  friend int compare(const Multiset& a, const Multiset& b) {
    std::size_t n = std::min(a.items_.size(), b.items_.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (int c = compare(a.items_[i].value, b.items_[i].value); c != 0) return c;
      if (a.items_[i].count != b.items_[i].count) return a.items_[i].count < b.items_[i].count ? -1 : 1;
    }
    if (a.items_.size() == b.items_.size()) return 0;
    return a.items_.size() < b.items_.size() ? -1 : 1;
  }
  friend bool operator==(const Multiset& a, const Multiset& b) { return compare(a, b) == 0; }

 private:
  auto lower(const T& v) const {
    return std::lower_bound(items_.begin(), items_.end(), v,
                            [](const Entry& e, const T& x) { return compare(e.value, x) < 0; });
  }
  auto lower(const T& v) {
    return std::lower_bound(items_.begin(), items_.end(), v,
                            [](const Entry& e, const T& x) { return compare(e.value, x) < 0; });
  }

  std::vector<Entry> items_;
};

}  // namespace cwc
