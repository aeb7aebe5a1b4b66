#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "xdeval/errors.hpp"

namespace xdeval::jsonio {

using ordered_json = nlohmann::ordered_json;

inline std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// nlohmann reports a byte offset; derive the 1-based line number from it.
[[noreturn]] inline void rethrow_parse_error(
    const nlohmann::json::parse_error& e, const std::string& text,
    const std::string& path) {
  const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  throw ParseError(path + ": " + e.what(), line, offset);
}

inline ordered_json parse_file(const std::string& path) {
  const std::string text = read_all(path);
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    rethrow_parse_error(e, text, path);
  }
}

inline void dump_to_file(const ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace xdeval::jsonio
