#include "seqbench/cli/log.hpp"

#include <atomic>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <string>

#include "seqbench/error.hpp"

namespace seqbench::log {

namespace {
std::atomic<Format> g_format{Format::Text};
std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;

const char* level_name(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "info";
}
}  // namespace

void set_format(Format format) { g_format = format; }
void set_level(Level level) { g_level = level; }

Format parse_format(std::string_view name) {
  if (name == "text") return Format::Text;
  if (name == "json") return Format::Json;
  throw ValidationError("unknown log format '" + std::string(name) + "'");
}

void write(Level level, std::string_view message) {
  if (level < g_level.load()) return;
  std::string line;
  if (g_format.load() == Format::Json) {
    line = nlohmann::json{{"level", level_name(level)}, {"msg", message}}.dump();
  } else {
    line = std::string("[") + level_name(level) + "] " + std::string(message);
  }
  std::lock_guard lock(g_mutex);
  std::cerr << line << '\n';
}

}  // namespace seqbench::log
