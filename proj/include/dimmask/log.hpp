// Copyright 2026 The dimmask Authors.
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

#ifndef DIMMASK_LOG_HPP
#define DIMMASK_LOG_HPP

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string_view>

namespace dimmask::log {

enum class Level { kQuiet = 0, kInfo = 1, kDebug = 2 };

/// Read once from DML_LOG={quiet,info,debug}; defaults to info.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("DML_LOG");
    const std::string_view v = env ? env : "info";
    if (v == "quiet") return Level::kQuiet;
    if (v == "debug") return Level::kDebug;
    return Level::kInfo;
  }();
  return level;
}

template <typename... Args>
void emit(Level level, const Args&... args) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::ostringstream os;
  (os << ... << args);
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << os.str() << '\n';
}

template <typename... Args>
void info(const Args&... args) {
  emit(Level::kInfo, args...);
}

template <typename... Args>
void debug(const Args&... args) {
  emit(Level::kDebug, args...);
}

}  // namespace dimmask::log

#endif  // DIMMASK_LOG_HPP
