#pragma once

#include <compare>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>

namespace cwc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const std::string* intern(std::string_view name) {
  static std::mutex mutex;
  static std::unordered_set<std::string> pool;
  std::lock_guard<std::mutex> lock(mutex);
  return &*pool.emplace(name).first;
}

}  // namespace detail

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  for (char c : s) {
    if (!alpha(c) && !digit(c) && c != '_') return false;
  }
  return true;
}

/// An atomic element. Names are interned, so copies are pointer-sized and
/// equality is a pointer comparison; ordering follows the name.
class Atom {
 public:
  explicit Atom(std::string_view name) : name_(detail::intern(name)) {
    if (!is_identifier(name)) throw Error("invalid atom name '" + std::string(name) + "'");
  }

  const std::string& name() const { return *name_; }

  friend bool operator==(Atom a, Atom b) { return a.name_ == b.name_; }
  friend std::strong_ordering operator<=>(Atom a, Atom b) {
    if (a.name_ == b.name_) return std::strong_ordering::equal;
    int c = a.name_->compare(*b.name_);
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  friend int compare(Atom a, Atom b) {
    if (a.name_ == b.name_) return 0;
    return a.name_->compare(*b.name_) < 0 ? -1 : 1;
  }

 private:
  const std::string* name_;
};

}  // namespace cwc
