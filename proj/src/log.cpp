#include "foveate/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace foveate::log {

namespace {

std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

const char* prefix(Level level) {
  switch (level) {
    case Level::debug: return "[debug] ";
    case Level::info: return "[info] ";
    case Level::warn: return "[warn] ";
    case Level::error: return "[error] ";
  }
  return "[?] ";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void write(Level level, const std::string& message) {
  if (static_cast<int>(level) < static_cast<int>(g_level.load())) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << prefix(level) << message << '\n';
}

}  // namespace foveate::log
