#pragma once

// Smoke-grammar checks over the emitted Verilog subset: balanced
// module/endmodule, identifiers declared before use, every wire assigned
// exactly once, every state element driven from exactly one clocked
// process. This is a lint for text this toolchain emits, not a general
// Verilog parser.

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fesi {

namespace detail {

inline const std::set<std::string>& verilog_keywords() {
  static const std::set<std::string> kw = {
      "module", "endmodule", "input",  "output", "wire", "reg",  "integer",
      "assign", "always",    "posedge", "begin", "end",  "if",   "else",
      "for",    "initial",   "timescale",
  };
  return kw;
}

// Strip comments, strings and sized literals (4'd0, 8'b1010) so the
// identifier scan does not trip over them.
inline std::string lint_scrub(const std::string& line) {
  std::string out;
  for (size_t i = 0; i < line.size();) {
    if (line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/') break;
    if (line[i] == '"') {
      ++i;
      while (i < line.size() && line[i] != '"') ++i;
      if (i < line.size()) ++i;
      continue;
    }
    if (line[i] == '\'') {
      // Sized literal tail: 'd123 / 'b0101; drop the base and digits.
      ++i;
      if (i < line.size() && std::isalpha(static_cast<unsigned char>(line[i]))) ++i;
      while (i < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
        ++i;
      continue;
    }
    if (line[i] == '$') {
      // System task name.
      ++i;
      while (i < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
        ++i;
      continue;
    }
    out += line[i++];
  }
  return out;
}

inline std::vector<std::string> lint_identifiers(const std::string& scrubbed) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < scrubbed.size();) {
    unsigned char c = scrubbed[i];
    if (std::isalpha(c) || c == '_') {
      size_t j = i;
      while (j < scrubbed.size() && (std::isalnum(static_cast<unsigned char>(scrubbed[j])) ||
                                     scrubbed[j] == '_'))
        ++j;
      ids.push_back(scrubbed.substr(i, j - i));
      i = j;
    } else {
      ++i;
    }
  }
  return ids;
}

}  // namespace detail

inline std::vector<std::string> verilog_lint(const std::string& text) {
  std::vector<std::string> problems;
  std::set<std::string> declared;
  std::set<std::string> wires;        // must be assigned exactly once
  std::set<std::string> state_elems;  // regs and regfiles
  std::map<std::string, int> assign_count;
  std::map<std::string, std::set<int>> clocked_blocks;  // state elem -> always blocks
  int module_depth = 0;
  int always_index = -1;
  bool in_always = false;

  std::istringstream in(text);
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::lint_scrub(raw);
    std::vector<std::string> ids = detail::lint_identifiers(line);
    if (ids.empty()) continue;

    auto complain = [&](const std::string& what) {
      problems.push_back("line " + std::to_string(lineno) + ": " + what);
    };

    // Declarations introduce names; everything else must resolve.
    size_t first_use = 0;
    if (ids[0] == "module") {
      ++module_depth;
      if (ids.size() > 1) declared.insert(ids[1]);
      first_use = ids.size();
    } else if (ids[0] == "endmodule") {
      --module_depth;
      first_use = 1;
    } else if (ids[0] == "input" || ids[0] == "output") {
      // input wire NAME / output wire NAME
      for (size_t k = 1; k < ids.size(); ++k) {
        if (ids[k] == "wire" || ids[k] == "reg") continue;
        declared.insert(ids[k]);
        if (ids[0] == "output") wires.insert(ids[k]);
      }
      first_use = ids.size();
    } else if (ids[0] == "wire" || ids[0] == "reg" || ids[0] == "integer") {
      for (size_t k = 1; k < ids.size(); ++k) declared.insert(ids[k]);
      if (ids[0] == "wire" && ids.size() > 1) wires.insert(ids.back());
      if (ids[0] == "reg" && ids.size() > 1) state_elems.insert(ids[1]);
      first_use = ids.size();
    } else if (ids[0] == "always") {
      ++always_index;
      in_always = true;
    } else if (ids[0] == "end" && raw == "  end") {
      in_always = false;
    }

    for (size_t k = first_use; k < ids.size(); ++k) {
      if (detail::verilog_keywords().count(ids[k])) continue;
      if (!declared.count(ids[k])) complain("identifier '" + ids[k] + "' used before declaration");
    }

    if (ids[0] == "assign" && ids.size() > 1) assign_count[ids[1]]++;

    if (line.find("<=") != std::string::npos && !ids.empty() && ids[0] != "input") {
      // Nonblocking assignment: must sit inside a clocked process, and the
      // target must be a state element (the RHS of `if (...)` lines also
      // contains <= for comparisons, so require a reg/rf target).
      std::string target = ids[0];
      if (ids[0] == "if" || ids[0] == "for" || ids[0] == "end" || ids[0] == "begin") {
        // comparison inside a condition, not an assignment
      } else if (state_elems.count(target)) {
        if (!in_always)
          complain("nonblocking assignment to '" + target + "' outside a clocked process");
        else
          clocked_blocks[target].insert(always_index);
      }
    }
  }

  if (module_depth != 0) problems.push_back("unbalanced module/endmodule");
  for (const auto& w : wires) {
    int n = assign_count.count(w) ? assign_count.at(w) : 0;
    if (n != 1)
      problems.push_back("wire '" + w + "' assigned " + std::to_string(n) + " times");
  }
  for (const auto& [elem, blocks] : clocked_blocks) {
    if (blocks.size() != 1)
      problems.push_back("state element '" + elem + "' driven from " +
                         std::to_string(blocks.size()) + " clocked processes");
  }
  return problems;
}

}  // namespace fesi
