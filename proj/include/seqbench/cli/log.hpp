#pragma once

#include <string_view>

namespace seqbench::log {

enum class Format { Text, Json };
enum class Level { Debug, Info, Warn, Error };

void set_format(Format format);
void set_level(Level level);
Format parse_format(std::string_view name);

/// Thread-safe; writes one line to standard error.
void write(Level level, std::string_view message);

inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

}  // namespace seqbench::log
