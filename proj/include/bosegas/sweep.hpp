#pragma once

// Sweep ranges, order-stable parallel evaluation and CSV number formatting.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bosegas/errors.hpp"

namespace bosegas {

enum class SweepScale { linear, log };

/// start:stop:steps[:lin|log], or a comma list, or a single value.
struct SweepSpec {
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;
  SweepScale scale = SweepScale::linear;
  std::vector<double> explicit_values;

  static SweepSpec single(double v) {
    SweepSpec s;
    s.explicit_values = {v};
    return s;
  }

  static SweepSpec range(double start, double stop, int steps, SweepScale scale) {
    if (steps < 2) throw ArgumentError("a sweep needs at least 2 steps");
    if (!(start < stop)) throw ArgumentError("sweep start must be below stop");
    if (scale == SweepScale::log && !(start > 0.0)) throw ArgumentError("log sweep needs a positive start");
    SweepSpec s;
    s.start = start;
    s.stop = stop;
    s.steps = steps;
    s.scale = scale;
    return s;
  }

  static SweepSpec parse(std::string_view text) {
    auto to_double = [](std::string_view t) {
      std::string str(t);
      char* end = nullptr;
      const double v = std::strtod(str.c_str(), &end);
      if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v)) {
        throw ArgumentError("not a number: '" + str + "'");
      }
      return v;
    };
    auto split = [](std::string_view t, char sep) {
      std::vector<std::string_view> parts;
      std::size_t pos = 0;
      for (;;) {
        const auto next = t.find(sep, pos);
        parts.push_back(t.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
      }
      return parts;
    };
    if (text.find(':') != std::string_view::npos) {
      const auto p = split(text, ':');
      if (p.size() < 3 || p.size() > 4) throw ArgumentError("range must be start:stop:steps[:lin|log]");
      const double steps = to_double(p[2]);
      if (steps != std::floor(steps) || steps > 1e7) throw ArgumentError("range steps must be an integer");
      SweepScale scale = SweepScale::linear;
      if (p.size() == 4) {
        if (p[3] == "log") scale = SweepScale::log;
        else if (p[3] != "lin") throw ArgumentError("range scale must be 'lin' or 'log'");
      }
      return range(to_double(p[0]), to_double(p[1]), static_cast<int>(steps), scale);
    }
    SweepSpec s;
    for (auto part : split(text, ',')) s.explicit_values.push_back(to_double(part));
    return s;
  }

  std::vector<double> values() const {
    if (!explicit_values.empty()) return explicit_values;
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
      const double t = static_cast<double>(i) / (steps - 1);
      v[i] = scale == SweepScale::log ? start * std::pow(stop / start, t) : start + t * (stop - start);
    }
    v.back() = stop;
    return v;
  }

  std::string describe() const {
    if (!explicit_values.empty()) {
      std::string out;
      for (std::size_t i = 0; i < explicit_values.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", explicit_values[i]);
        out += buf;
      }
      return out;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g:%.17g:%d:%s", start, stop, steps,
                  scale == SweepScale::log ? "log" : "lin");
    return buf;
  }
};

/// Real in scientific notation with 17 significant digits.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

/// Worker count: BOSE_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("BOSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(i) for i in [0, count) on a worker pool; results are returned
/// in index order. The first exception (lowest index) is rethrown.
template <class R>
std::vector<R> parallel_map(std::size_t count, const std::function<R(std::size_t)>& f,
                            unsigned threads = worker_count()) {
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace bosegas
