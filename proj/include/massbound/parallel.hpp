#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace massbound::parallel {

/// Result of one row: either a value or the message of the exception it threw.
template <class T>
struct Row {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

namespace detail {

template <class F>
auto run_row(F& f, std::size_t i) -> Row<std::invoke_result_t<F&, std::size_t>> {
  try {
    return {f(i), {}};
  } catch (const std::exception& e) {
    return {std::nullopt, e.what()};
  } catch (...) {
    return {std::nullopt, "unknown exception"};
  }
}

}  // namespace detail

/// Reference implementation: f(0), ..., f(count - 1) in order.
template <class F>
auto map_rows_serial(std::size_t count, F f) {
  std::vector<decltype(detail::run_row(f, 0))> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(detail::run_row(f, i));
  return out;
}

/// Same result as map_rows_serial, with rows spread over `jobs` OpenMP
/// threads (jobs <= 0 uses the OpenMP default). Each slot is written by one
/// thread only, so the output order is the index order whatever the schedule.
/// f must be safe to call concurrently.
template <class F>
auto map_rows(std::size_t count, F f, int jobs = 0) {
  std::vector<decltype(detail::run_row(f, 0))> out(count);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = detail::run_row(f, static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace massbound::parallel
