// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gps {

/// Runs fn(0..n-1), one thread per index beyond the first. The first
/// exception thrown by any task is rethrown after all tasks finish.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n <= 1) {
    if (n == 1)
      fn(std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    threads.emplace_back([&, i] {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  try {
    fn(std::size_t{0});
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : threads)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace gps
