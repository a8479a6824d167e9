#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hflab {

// Bad input or violated precondition. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A search or materialization exceeded its work budget. Exit code 3.
struct GuardError : std::runtime_error {
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

// Work counter threaded through enumeration loops. Copies share nothing;
// pass by reference when one budget should cover several phases.
class Guard {
 public:
  Guard() = default;
  explicit Guard(std::uint64_t limit) : limit_(limit) {}

  void tick(std::uint64_t cost = 1) const {
    spent_ += cost;
    if (spent_ > limit_)
      throw GuardError("work budget exceeded (" + std::to_string(limit_) +
                       " units); raise --guard to continue");
  }

  std::uint64_t limit() const { return limit_; }
  std::uint64_t spent() const { return spent_; }

 private:
  std::uint64_t limit_ = 50'000'000;
  mutable std::uint64_t spent_ = 0;
};

}  // namespace hflab
