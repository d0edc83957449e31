#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "resite/error.hpp"
#include "resite/lp.hpp"

namespace resite {

// Fixed-MPS names for every row and column of an LP.
struct MpsNames {
  std::string objective;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
};

namespace detail {

inline std::uint32_t fnv1a32(const std::string& s, std::uint32_t salt) {
  std::uint32_t h = 2166136261u ^ salt;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 16777619u;
  }
  return h;
}

inline bool fixed_name_ok(const std::string& s) {
  if (s.empty() || s.size() > 8 || s[0] == '$') return false;
  for (char ch : s)
    if (ch <= ' ' || ch > '~') return false;
  return true;
}

// Shortest decimal that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok[0] == '+') ++first;
  auto res = std::from_chars(first, tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw InvalidInput("bad number '" + tok + "' " + where);
  return v;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Fields at columns 2-3, 5-12, 15-22, 25-36 (1-based). Long numbers overflow field 4.
inline std::string mps_line(const std::string& type, const std::string& name1,
                            const std::string& name2 = {}, const std::string& number = {}) {
  std::string line = " " + pad(type, 2) + " " + pad(name1, 8);
  if (!name2.empty() || !number.empty()) line += "  " + pad(name2, 8);
  if (!number.empty()) line += "  " + number;
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

}  // namespace detail

// Names of 8 printable characters or fewer are kept; anything else, and any later
// duplicate, becomes 'X' followed by 7 hex digits of a salted FNV-1a hash.
inline MpsNames mangle_names(const CanonicalLp& lp) {
  std::set<std::string> used;
  auto take = [&](const std::string& s) {
    if (detail::fixed_name_ok(s) && !used.count(s)) {
      used.insert(s);
      return s;
    }
    for (std::uint32_t salt = 0;; ++salt) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "X%07x", detail::fnv1a32(s, salt) & 0x0fffffffu);
      if (!used.count(buf)) {
        used.insert(buf);
        return std::string(buf);
      }
    }
  };
  MpsNames n;
  n.objective = take(lp.objective_name);
  for (const auto& r : lp.row_names) n.rows.push_back(take(r));
  for (const auto& c : lp.col_names) n.cols.push_back(take(c));
  return n;
}

// Writes fixed-format MPS and, when any name had to change, a "<path>.names" file
// of "mangled original" lines. `comments` go first, each as a "*" line (also into
// the name table). Returns the names used in the file.
inline MpsNames export_mps(const CanonicalLp& lp, const std::string& path,
                           const std::vector<std::string>& comments = {}) {
  lp.validate();
  const MpsNames names = mangle_names(lp);
  std::ostringstream out;
  for (const auto& c : comments) out << "* " << c << "\n";
  std::string model = lp.name.empty() ? "RESITE" : lp.name;
  out << "NAME          " << model << "\n";
  out << "ROWS\n";
  out << detail::mps_line("N", names.objective) << "\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    out << detail::mps_line(std::string(1, static_cast<char>(lp.senses[i])), names.rows[i])
        << "\n";

  out << "COLUMNS\n";
  std::vector<std::vector<std::pair<std::size_t, double>>> by_col(lp.num_cols());
  for (const auto& t : lp.sorted_triplets()) by_col[t.col].emplace_back(t.row, t.value);
  bool in_int = false;
  std::size_t marker = 0;
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    if (lp.integer[j] != in_int) {
      char mk[16];
      std::snprintf(mk, sizeof(mk), "M%07zu", marker++);
      out << detail::mps_line("", mk, "'MARKER'") << "                 "
          << (lp.integer[j] ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = lp.integer[j];
    }
    const auto& cn = names.cols[j];
    // an empty column still needs one entry to exist in the file
    if (lp.objective[j] != 0.0 || by_col[j].empty())
      out << detail::mps_line("", cn, names.objective, detail::format_number(lp.objective[j]))
          << "\n";
    for (auto [r, v] : by_col[j])
      out << detail::mps_line("", cn, names.rows[r], detail::format_number(v)) << "\n";
  }
  if (in_int) {
    char mk[16];
    std::snprintf(mk, sizeof(mk), "M%07zu", marker++);
    out << detail::mps_line("", mk, "'MARKER'") << "                 'INTEND'\n";
  }

  out << "RHS\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    if (lp.rhs[i] != 0.0)
      out << detail::mps_line("", "RHS", names.rows[i], detail::format_number(lp.rhs[i])) << "\n";
  out << "RANGES\n";

  out << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    const double lo = lp.lower[j];
    const double up = lp.upper[j];
    const auto& cn = names.cols[j];
    auto emit = [&](const char* type, double v) {
      out << detail::mps_line(type, "BND", cn, detail::format_number(v)) << "\n";
    };
    auto emit_flag = [&](const char* type) { out << detail::mps_line(type, "BND", cn) << "\n"; };
    if (lo == up) {
      emit("FX", lo);
      continue;
    }
    if (lo == -kInf && up == kInf) {
      emit_flag("FR");
      continue;
    }
    if (lo == -kInf)
      emit_flag("MI");
    else if (lo != 0.0 || lp.integer[j] || up < 0.0)
      emit("LO", lo);
    if (up != kInf)
      emit("UP", up);
    else if (lp.integer[j])
      emit_flag("PL");
  }
  out << "ENDATA\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write MPS file '" + path + "'");
  f << out.str();
  if (!f) throw IoError("failed writing MPS file '" + path + "'");

  std::ostringstream side;
  for (const auto& c : comments) side << "* " << c << "\n";
  bool changed = names.objective != lp.objective_name;
  side << names.objective << " " << lp.objective_name << "\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    side << names.rows[i] << " " << lp.row_names[i] << "\n";
    changed |= names.rows[i] != lp.row_names[i];
  }
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    side << names.cols[j] << " " << lp.col_names[j] << "\n";
    changed |= names.cols[j] != lp.col_names[j];
  }
  const std::string side_path = path + ".names";
  if (changed) {
    std::ofstream s(side_path, std::ios::binary);
    if (!s) throw IoError("cannot write name table '" + side_path + "'");
    s << side.str();
  } else {
    std::remove(side_path.c_str());
  }
  return names;
}

// Reads an MPS file (fixed or whitespace-separated fields). Original names are
// restored from "<path>.names" when that file exists.
inline CanonicalLp import_mps(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read MPS file '" + path + "'");

  std::unordered_map<std::string, std::string> original;
  {
    std::ifstream s(path + ".names", std::ios::binary);
    std::string line;
    while (s && std::getline(s, line)) {
      if (!line.empty() && line[0] == '*') continue;
      const auto sp = line.find(' ');
      if (sp == std::string::npos) continue;
      original[line.substr(0, sp)] = line.substr(sp + 1);
    }
  }
  auto restore = [&](const std::string& n) {
    auto it = original.find(n);
    return it == original.end() ? n : it->second;
  };

  CanonicalLp lp;
  std::string obj_row;
  std::unordered_map<std::string, std::size_t> row_idx, col_idx;
  std::string section;
  bool in_int = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InvalidInput("MPS line " + std::to_string(lineno) + ": " + msg);
  };
  auto col_of = [&](const std::string& name) {
    auto it = col_idx.find(name);
    if (it == col_idx.end()) fail("unknown column '" + name + "'");
    return it->second;
  };

  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      section = tok[0];
      if (section == "NAME") lp.name = tok.size() > 1 ? tok[1] : "";
      else if (section == "ENDATA") break;
      else if (section != "ROWS" && section != "COLUMNS" && section != "RHS" &&
               section != "RANGES" && section != "BOUNDS")
        fail("unknown section '" + section + "'");
      continue;
    }
    const std::string where = "on line " + std::to_string(lineno);
    if (section == "ROWS") {
      if (tok.size() != 2) fail("expected '<type> <name>'");
      if (tok[0] == "N") {
        if (obj_row.empty()) {
          obj_row = tok[1];
          lp.objective_name = restore(tok[1]);
        }
        continue;
      }
      RowSense s;
      if (tok[0] == "L") s = RowSense::le;
      else if (tok[0] == "E") s = RowSense::eq;
      else if (tok[0] == "G") s = RowSense::ge;
      else fail("unknown row type '" + tok[0] + "'");
      row_idx[tok[1]] = lp.add_row(restore(tok[1]), s, 0.0);
    } else if (section == "COLUMNS") {
      if (tok.size() >= 3 && tok[1] == "'MARKER'") {
        if (tok[2] == "'INTORG'") in_int = true;
        else if (tok[2] == "'INTEND'") in_int = false;
        else fail("unknown marker " + tok[2]);
        continue;
      }
      if (tok.size() != 3 && tok.size() != 5) fail("expected column entries");
      std::size_t j;
      auto it = col_idx.find(tok[0]);
      if (it == col_idx.end()) {
        j = lp.add_column(restore(tok[0]), 0.0, 0.0, kInf, in_int);
        col_idx[tok[0]] = j;
      } else {
        j = it->second;
      }
      for (std::size_t p = 1; p + 1 < tok.size(); p += 2) {
        const double v = detail::parse_number(tok[p + 1], where);
        if (tok[p] == obj_row) {
          lp.objective[j] = v;
        } else {
          auto r = row_idx.find(tok[p]);
          if (r == row_idx.end()) fail("unknown row '" + tok[p] + "'");
          lp.add_coef(r->second, j, v);
        }
      }
    } else if (section == "RHS") {
      if (tok.size() != 3 && tok.size() != 5) fail("expected rhs entries");
      for (std::size_t p = 1; p + 1 < tok.size(); p += 2) {
        const double v = detail::parse_number(tok[p + 1], where);
        if (tok[p] == obj_row) continue;
        auto r = row_idx.find(tok[p]);
        if (r == row_idx.end()) fail("unknown row '" + tok[p] + "'");
        lp.rhs[r->second] = v;
      }
    } else if (section == "RANGES") {
      fail("RANGES entries are not supported");
    } else if (section == "BOUNDS") {
      if (tok.size() < 3) fail("expected '<type> <set> <column> [value]'");
      const std::size_t j = col_of(tok[2]);
      const std::string& type = tok[0];
      auto value = [&] {
        if (tok.size() < 4) fail("bound " + type + " needs a value");
        return detail::parse_number(tok[3], where);
      };
      if (type == "FX") lp.lower[j] = lp.upper[j] = value();
      else if (type == "LO") lp.lower[j] = value();
      else if (type == "UP") lp.upper[j] = value();
      else if (type == "MI") lp.lower[j] = -kInf;
      else if (type == "PL") lp.upper[j] = kInf;
      else if (type == "FR") {
        lp.lower[j] = -kInf;
        lp.upper[j] = kInf;
      } else if (type == "BV") {
        lp.lower[j] = 0.0;
        lp.upper[j] = 1.0;
        lp.integer[j] = true;
      } else fail("unsupported bound type '" + type + "'");
    } else {
      fail("data outside a section");
    }
  }
  lp.validate();
  return lp;
}

// Solution files: "# status <s>", "# objective <v>", then one "name value" per line.
inline void write_solution(const std::string& path, const std::vector<std::string>& names,
                           const LpSolution& sol) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write solution file '" + path + "'");
  char buf[64];
  f << "# status " << to_string(sol.status) << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", sol.objective);
  f << "# objective " << buf << "\n";
  for (std::size_t j = 0; j < names.size() && j < sol.primal.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g", sol.primal[j]);
    f << names[j] << " " << buf << "\n";
  }
  if (!f) throw IoError("failed writing solution file '" + path + "'");
}

struct ImportedSolution {
  LpSolution solution;
  std::vector<std::string> missing;  // expected names absent from the file (set to 0)
  std::vector<std::string> unknown;  // names in the file that match no column
};

inline ImportedSolution import_solution(const std::string& path,
                                        const std::vector<std::string>& names) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read solution file '" + path + "'");
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t j = 0; j < names.size(); ++j) idx[names[j]] = j;

  ImportedSolution out;
  out.solution.primal.assign(names.size(), 0.0);
  std::vector<bool> seen(names.size(), false);
  bool have_objective = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = "on solution line " + std::to_string(lineno);
    if (tok[0][0] == '#') {
      if (tok.size() == 3 && tok[0] == "#" && tok[1] == "status")
        out.solution.status = lp_status_from_string(tok[2]);
      else if (tok.size() == 3 && tok[0] == "#" && tok[1] == "objective") {
        out.solution.objective = detail::parse_number(tok[2], where);
        have_objective = true;
      }
      continue;
    }
    if (tok.size() != 2)
      throw InvalidInput("malformed solution line " + std::to_string(lineno) +
                         ": expected 'name value'");
    const double v = detail::parse_number(tok[1], where);
    auto it = idx.find(tok[0]);
    if (it == idx.end()) {
      out.unknown.push_back(tok[0]);
      continue;
    }
    out.solution.primal[it->second] = v;
    seen[it->second] = true;
  }
  for (std::size_t j = 0; j < names.size(); ++j)
    if (!seen[j]) out.missing.push_back(names[j]);
  if (!have_objective) out.solution.objective = 0.0;
  return out;
}

}  // namespace resite
