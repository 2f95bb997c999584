#pragma once

// Shared vocabulary types: culture dimensions, tri-labels, the five labeling
// tasks, and the deterministic random helpers every seeded operation uses.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace culture {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Dimension : int { clan = 0, adhocracy = 1, market = 2, hierarchy = 3 };

inline constexpr std::array<Dimension, 4> kDimensions = {
    Dimension::clan, Dimension::adhocracy, Dimension::market, Dimension::hierarchy};

inline constexpr std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::clan: return "clan";
    case Dimension::adhocracy: return "adhocracy";
    case Dimension::market: return "market";
    case Dimension::hierarchy: return "hierarchy";
  }
  return "?";
}

inline constexpr std::string_view display_name(Dimension d) {
  switch (d) {
    case Dimension::clan: return "Clan";
    case Dimension::adhocracy: return "Adhocracy";
    case Dimension::market: return "Market";
    case Dimension::hierarchy: return "Hierarchy";
  }
  return "?";
}

inline std::optional<Dimension> parse_dimension(std::string_view s) {
  for (Dimension d : kDimensions)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

inline Dimension dimension_or_throw(std::string_view s) {
  if (auto d = parse_dimension(s)) return *d;
  throw Error("unknown dominant label '" + std::string(s) + "'");
}

inline constexpr int index_of(Dimension d) { return static_cast<int>(d); }

enum class TriLabel : int { negative = -1, neutral = 0, positive = 1 };

inline constexpr std::array<TriLabel, 3> kTriLabels = {TriLabel::negative, TriLabel::neutral,
                                                       TriLabel::positive};

inline constexpr int code(TriLabel t) { return static_cast<int>(t); }

inline TriLabel tri_from_code(long long c) {
  if (c < -1 || c > 1) throw Error("tri-label code out of range: " + std::to_string(c));
  return static_cast<TriLabel>(static_cast<int>(c));
}

// One of the five labeling tasks: a tri-label per dimension, plus the dominant culture.
enum class Task : int { clan = 0, adhocracy = 1, market = 2, hierarchy = 3, dominant = 4 };

inline constexpr std::array<Task, 5> kTasks = {Task::clan, Task::adhocracy, Task::market,
                                               Task::hierarchy, Task::dominant};

// Order used for report columns: dominant first, then the dimensions.
inline constexpr std::array<Task, 5> kReportTaskOrder = {Task::dominant, Task::clan,
                                                         Task::adhocracy, Task::market,
                                                         Task::hierarchy};

inline constexpr std::string_view to_string(Task t) {
  if (t == Task::dominant) return "dominant";
  return to_string(static_cast<Dimension>(static_cast<int>(t)));
}

inline std::optional<Task> parse_task(std::string_view s) {
  for (Task t : kTasks)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

inline Task task_or_throw(std::string_view s) {
  if (auto t = parse_task(s)) return *t;
  throw Error("unknown task '" + std::string(s) + "'");
}

inline constexpr bool is_tri(Task t) { return t != Task::dominant; }
inline constexpr Dimension dimension_of(Task t) { return static_cast<Dimension>(static_cast<int>(t)); }
inline constexpr Task task_of(Dimension d) { return static_cast<Task>(index_of(d)); }

// Labels of every task share one integer encoding: tri tasks use -1/0/+1,
// the dominant task uses the dimension index 0..3.
using Label = int;

inline std::vector<Label> label_domain(Task t) {
  if (is_tri(t)) return {-1, 0, 1};
  return {0, 1, 2, 3};
}

inline bool in_domain(Task t, Label l) {
  return is_tri(t) ? (l >= -1 && l <= 1) : (l >= 0 && l <= 3);
}

inline std::string label_to_string(Task t, Label l) {
  if (is_tri(t)) return std::to_string(l);
  return std::string(to_string(static_cast<Dimension>(l)));
}

// --- deterministic randomness -------------------------------------------

inline constexpr std::uint64_t fnv1a(std::string_view s,
                                     std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Unbiased draw in [0, n). std::uniform_int_distribution is implementation
// defined, so seeded outputs would differ between standard libraries.
template <class Engine>
std::uint64_t bounded(Engine& eng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

template <class T, class Engine>
void seeded_shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

inline std::mt19937_64 make_engine(std::int64_t seed) {
  return std::mt19937_64(splitmix64(static_cast<std::uint64_t>(seed)));
}

// Engine keyed on (seed, parts...), independent of any shared stream.
inline std::mt19937_64 keyed_engine(std::int64_t seed, std::initializer_list<std::string_view> parts) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(seed));
  for (auto p : parts) {
    h = fnv1a(p, h);
    h = fnv1a(std::string_view("\x1f", 1), h);
  }
  return std::mt19937_64(splitmix64(h));
}

}  // namespace culture
