#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lqrlab {

// Worker-thread count used by parallel_for. The setting is a pure throughput
// knob: every result produced by this library is byte-identical for any
// thread count, because work items only write to disjoint, preallocated
// slots and all reductions run in a fixed order after the loop.
void set_num_threads(int n);
int num_threads();

namespace detail {
void parallel_for_impl(std::int64_t count,
                       const std::function<void(std::int64_t)>& body);
}

// Runs body(i) for i in [0, count). Iterations must be independent and must
// not touch shared mutable state except their own output slot. Exceptions
// thrown by body are captured and the first one is rethrown on the caller's
// thread after all workers join. Nested calls degrade to a serial loop.
template <class Fn>
void parallel_for(std::int64_t count, Fn&& body) {
  detail::parallel_for_impl(
      count, std::function<void(std::int64_t)>(std::forward<Fn>(body)));
}

// Sums get(lo), ..., get(hi - 1) by recursive halving with a fixed split
// point, so the floating-point result does not depend on thread count or
// chunking. T needs operator+= and copy; returns zero(), i.e. a
// value-initialized accumulator seeded from the first element, for empty
// ranges the caller must special-case (hi > lo is required).
template <class T, class Get>
T pairwise_sum(std::int64_t lo, std::int64_t hi, Get&& get) {
  const std::int64_t len = hi - lo;
  if (len <= 16) {
    T acc = get(lo);
    for (std::int64_t i = lo + 1; i < hi; ++i) acc += get(i);
    return acc;
  }
  const std::int64_t mid = lo + len / 2;
  T left = pairwise_sum<T>(lo, mid, get);
  left += pairwise_sum<T>(mid, hi, get);
  return left;
}

}  // namespace lqrlab
