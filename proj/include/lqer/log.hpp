// Copyright 2026 The LQER Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <atomic>
#include <cstddef>
#include <iostream>
#include <mutex>
#include <string_view>

namespace lqer::log {

namespace detail {
inline std::atomic<std::size_t> &warning_counter() {
    static std::atomic<std::size_t> n{0};
    return n;
}
inline std::atomic<bool> &quiet_flag() {
    static std::atomic<bool> q{false};
    return q;
}
inline std::mutex &sink_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// Total warnings emitted by this process.
inline std::size_t warning_count() { return detail::warning_counter().load(); }

/// Suppresses informational output (warnings are still counted and printed).
inline void set_quiet(bool q) { detail::quiet_flag().store(q); }

inline void warn(std::string_view msg) {
    ++detail::warning_counter();
    const std::lock_guard lock(detail::sink_mutex());
    std::cerr << "warning: " << msg << '\n';
}

inline void info(std::string_view msg) {
    if (detail::quiet_flag().load()) {
        return;
    }
    const std::lock_guard lock(detail::sink_mutex());
    std::cerr << msg << '\n';
}

} // namespace lqer::log
