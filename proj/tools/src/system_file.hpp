#pragma once

// Line-oriented system description:
//
//   dof = 2
//   lagrangian = "0.5*v1^2 + q1*v2"
//   constraints = [ "p2 - q1" ]
//   grid.1 = "-1:1:11"     # one per coordinate
//
// Values are quoted strings, numbers or bracketed lists of quoted strings.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hjk/geometry.hpp"
#include "hjk/grid.hpp"

namespace hjk::cli {

struct SystemFile {
  std::string path;
  int dof = 0;
  std::optional<LagrangianSystem> system;  // always set after parsing
  std::optional<std::vector<std::string>> x;
  std::optional<std::vector<std::string>> alpha;
  std::vector<std::string> constraints;
  std::optional<SampleGrid> grid;
  /// Line of each key, for diagnostics.
  std::map<std::string, int> lines;
};

/// Throws InputError with "path:line: message" on any problem.
SystemFile parse_system_file(const std::string& text, const std::string& path);
SystemFile load_system_file(const std::string& path);

}  // namespace hjk::cli
