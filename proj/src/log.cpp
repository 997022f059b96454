#include "gacn/log.hpp"

#include <atomic>

namespace gacn::log {
namespace {
std::atomic<Level> g_level{Level::warn};
}

Level level() noexcept { return g_level.load(); }
void set_level(Level lvl) noexcept { g_level.store(lvl); }

void write(Level lvl, std::string_view msg) {
  if (lvl < g_level.load()) return;
  static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
  std::cerr << "[gacn " << kNames[static_cast<int>(lvl)] << "] " << msg << '\n';
}

}  // namespace gacn::log
