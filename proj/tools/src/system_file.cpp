#include "system_file.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

#include "hjk/error.hpp"

namespace hjk::cli {

namespace {

using Value = std::variant<double, std::string, std::vector<std::string>>;

class LineError : public InputError {
 public:
  LineError(const std::string& path, int line, const std::string& msg)
      : InputError(path + ":" + std::to_string(line) + ": " + msg) {}
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Reads a quoted string starting at s[pos] == '"'; advances pos past the closing quote.
std::string read_quoted(std::string_view s, std::size_t& pos) {
  std::string out;
  ++pos;
  while (pos < s.size() && s[pos] != '"') {
    if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
    out += s[pos++];
  }
  if (pos >= s.size()) throw InputError("unterminated string");
  ++pos;
  return out;
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

Value parse_value(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw InputError("missing value");
  if (text.front() == '"') {
    std::size_t pos = 0;
    std::string s = read_quoted(text, pos);
    if (!trim(text.substr(pos)).empty()) throw InputError("unexpected text after string");
    return s;
  }
  if (text.front() == '[') {
    std::vector<std::string> items;
    std::size_t pos = 1;
    auto skip = [&] {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    skip();
    if (pos < text.size() && text[pos] == ']') {
      ++pos;
    } else {
      for (;;) {
        skip();
        if (pos >= text.size() || text[pos] != '"') throw InputError("expected a quoted string in list");
        items.push_back(read_quoted(text, pos));
        skip();
        if (pos < text.size() && text[pos] == ',') {
          ++pos;
          continue;
        }
        if (pos < text.size() && text[pos] == ']') {
          ++pos;
          break;
        }
        throw InputError("expected ',' or ']' in list");
      }
    }
    if (!trim(text.substr(pos)).empty()) throw InputError("unexpected text after list");
    return items;
  }
  double x = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw InputError("value must be a number, a quoted string or a list");
  }
  return x;
}

}  // namespace

SystemFile parse_system_file(const std::string& text, const std::string& path) {
  SystemFile f;
  f.path = path;
  std::optional<std::string> lagrangian;
  std::optional<std::string> hamiltonian;
  std::map<int, std::pair<Interval, int>> axes;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw LineError(path, line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw LineError(path, line_no, "missing key");
    if (f.lines.count(key)) throw LineError(path, line_no, "duplicate key '" + key + "'");
    f.lines[key] = line_no;

    Value value;
    try {
      value = parse_value(line.substr(eq + 1));
    } catch (const InputError& e) {
      throw LineError(path, line_no, e.what());
    }

    auto need_string = [&]() -> std::string {
      if (const auto* s = std::get_if<std::string>(&value)) return *s;
      throw LineError(path, line_no, "'" + key + "' expects a quoted string");
    };
    auto need_list = [&]() -> std::vector<std::string> {
      if (const auto* v = std::get_if<std::vector<std::string>>(&value)) return *v;
      throw LineError(path, line_no, "'" + key + "' expects a list of quoted strings");
    };
    if (key != "dof" && f.dof == 0) throw LineError(path, line_no, "'dof' must come before '" + key + "'");

    if (key == "dof") {
      const auto* d = std::get_if<double>(&value);
      if (!d || *d < 1 || *d != static_cast<double>(static_cast<int>(*d))) {
        throw LineError(path, line_no, "'dof' must be a positive integer");
      }
      f.dof = static_cast<int>(*d);
    } else if (key == "lagrangian") {
      lagrangian = need_string();
    } else if (key == "hamiltonian") {
      hamiltonian = need_string();
    } else if (key == "X") {
      f.x = need_list();
    } else if (key == "alpha") {
      f.alpha = need_list();
    } else if (key == "constraints") {
      f.constraints = need_list();
    } else if (key.rfind("grid.", 0) == 0) {
      int index = 0;
      const std::string_view digits = std::string_view(key).substr(5);
      const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec != std::errc() || end != digits.data() + digits.size() || index < 1 || index > f.dof) {
        throw LineError(path, line_no, "grid key must be grid.<i> with 1 <= i <= dof");
      }
      try {
        axes[index] = {SampleGrid::parse_axis(need_string()), line_no};
      } catch (const LineError&) {
        throw;
      } catch (const InputError& e) {
        throw LineError(path, line_no, e.what());
      }
    } else {
      throw LineError(path, line_no, "unknown key '" + key + "'");
    }
  }

  if (f.dof == 0) throw LineError(path, line_no, "missing 'dof'");
  if (!lagrangian) throw LineError(path, line_no, "missing 'lagrangian'");

  // Expressions are checked against dof and their allowed families here so
  // errors point at their line.
  auto check_expr = [&](const std::string& key, const std::string& text, bool v_ok, bool p_ok) {
    FamilySet fam;
    try {
      fam = Expr::parse(text, f.dof).families();
    } catch (const InputError& e) {
      throw LineError(path, f.lines.at(key), key + ": " + e.what());
    }
    if ((fam.v && !v_ok) || (fam.p && !p_ok)) {
      throw LineError(path, f.lines.at(key), key + ": '" + text + "' may not reference " + (fam.v && !v_ok ? "v" : "p"));
    }
  };
  check_expr("lagrangian", *lagrangian, true, false);
  if (hamiltonian) check_expr("hamiltonian", *hamiltonian, false, true);
  for (const auto& s : f.constraints) check_expr("constraints", s, false, true);
  auto check_list = [&](const std::string& key, const std::optional<std::vector<std::string>>& list) {
    if (!list) return;
    if (static_cast<int>(list->size()) != f.dof) {
      throw LineError(path, f.lines.at(key), "'" + key + "' needs " + std::to_string(f.dof) + " components");
    }
    for (const auto& s : *list) check_expr(key, s, false, false);
  };
  check_list("X", f.x);
  check_list("alpha", f.alpha);

  try {
    f.system = LagrangianSystem::parse(f.dof, *lagrangian, hamiltonian, f.constraints, path);
  } catch (const InputError& e) {
    throw LineError(path, f.lines.at("lagrangian"), e.what());
  }

  if (!axes.empty()) {
    if (static_cast<int>(axes.size()) != f.dof) {
      throw LineError(path, axes.begin()->second.second, "grid needs one grid.<i> entry per coordinate");
    }
    std::vector<Interval> list;
    for (const auto& [i, entry] : axes) list.push_back(entry.first);
    f.grid = SampleGrid(std::move(list));
  }
  return f;
}

SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open system file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system_file(buf.str(), path);
}

}  // namespace hjk::cli
