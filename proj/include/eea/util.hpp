#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace eea {

// Shortest decimal form that round-trips a double; used for all CSV output so
// reruns are byte-identical.
std::string fmt_double(double value);

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t value);

// Writes via a temp file in the same directory, then renames.
void atomic_write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

double percentile(std::vector<double> values, double q);  // linear interpolation
double median(std::vector<double> values);

// Runs fn(0..n-1) on up to `workers` threads. Work items must be pure given
// their index; results are stored by index so output never depends on the
// schedule.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace eea
