#pragma once

#include <iostream>
#include <string_view>

namespace gacn::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

Level level() noexcept;
void set_level(Level lvl) noexcept;

// Writes "[gacn level] msg" to stderr when `lvl` passes the threshold.
void write(Level lvl, std::string_view msg);

inline void info(std::string_view msg) { write(Level::info, msg); }
inline void warn(std::string_view msg) { write(Level::warn, msg); }

}  // namespace gacn::log
