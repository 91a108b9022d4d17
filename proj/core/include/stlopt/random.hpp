#pragma once

#include <array>
#include <cstdint>

#include "stlopt/design_field.hpp"

namespace stlopt {

/// Philox4x32-10 counter-based generator.
///
/// Output depends only on (key, counter), so a stream can be addressed
/// directly without generating its predecessors.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Identifies one random stream of a campaign.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint32_t band = 0;
  std::uint32_t run = 0;
  bool operator==(const StreamId&) const = default;
};

/// Uniform doubles in [0, 1) with 53 random bits each.
class UniformStream {
 public:
  explicit UniformStream(const StreamId& id);
  double next();

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
};

/// Independent uniform entries with the plate rows forced solid.
DesignVector random_initial_guess(const StreamId& id, const GridSpec& grid);

}  // namespace stlopt
