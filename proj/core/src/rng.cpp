#include "lmm/rng.hpp"

#include "lmm/distributions.hpp"

namespace lmm {

double NormalStream::operator()() {
  // (k + 0.5) / 2^53 is strictly inside (0, 1).
  const double u = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  return qnorm(u);
}

}  // namespace lmm
