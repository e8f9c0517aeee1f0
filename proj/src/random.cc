#include "rose/random.h"

#include <numeric>
#include <utility>

namespace rose {

std::vector<int> sample_without_replacement(int n, int count, Rng& rng) {
  std::vector<int> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
  }
  pool.resize(static_cast<size_t>(count));
  return pool;
}

}  // namespace rose
