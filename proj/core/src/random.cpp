#include "stlopt/random.hpp"

namespace stlopt {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
  for (int r = 0; r < 10; ++r) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

UniformStream::UniformStream(const StreamId& id)
    : key_{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)},
      ctr_{0u, 0u, id.band, id.run} {}

double UniformStream::next() {
  if (pos_ + 2 > 4) {
    buf_ = Philox4x32::block(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[1];
    pos_ = 0;
  }
  const std::uint64_t a = buf_[pos_] >> 5;
  const std::uint64_t b = buf_[pos_ + 1] >> 6;
  pos_ += 2;
  return static_cast<double>(a * 67108864ull + b) * (1.0 / 9007199254740992.0);
}

DesignVector random_initial_guess(const StreamId& id, const GridSpec& grid) {
  grid.validate();
  UniformStream s(id);
  Field v(grid.num_elements());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s.next();
  DesignVector d(std::move(v), grid);
  d.apply_mask();
  return d;
}

}  // namespace stlopt
