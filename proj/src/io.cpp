#include "laval/io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "laval/errors.h"

namespace laval {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  return out;
}

double parse_number(const std::string& s, const std::string& path, int line) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  std::ostringstream msg;
  msg << path << ":" << line << ": not a number: '" << s << "'";
  throw DomainError(msg.str());
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string subsonic_csv(const SubsonicField& f) {
  std::string s = "phi,psi,q\n";
  for (size_t i = 0; i < f.phi.size(); ++i) {
    for (size_t j = 0; j < f.psi.size(); ++j) {
      s += format_number(f.phi[i]) + "," + format_number(f.psi[j]) + "," +
           format_number(f.q(static_cast<int>(i), static_cast<int>(j))) + "\n";
    }
  }
  return s;
}

std::string supersonic_csv(const SupersonicField& f) {
  std::string s = "phi,psi,Q,W,Z\n";
  for (size_t i = 0; i < f.phi.size(); ++i) {
    for (size_t j = 0; j < f.psi.size(); ++j) {
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      s += format_number(f.phi[i]) + "," + format_number(f.psi[j]) + "," +
           format_number(f.Q(ii, jj)) + "," + format_number(f.W(ii, jj)) + "," +
           format_number(f.Z(ii, jj)) + "\n";
    }
  }
  return s;
}

std::string transonic_csv(const TransonicSolution& sol) {
  std::string s = "block,phi,psi,q,theta,x,y\n";
  auto emit = [&](const FieldBlock& b, const char* name, size_t first) {
    for (size_t i = first; i < b.phi.size(); ++i) {
      for (size_t j = 0; j < b.psi.size(); ++j) {
        const int ii = static_cast<int>(i), jj = static_cast<int>(j);
        auto opt = [&](const Field2D& f) { return f.empty() ? std::string("nan") : format_number(f(ii, jj)); };
        s += std::string(name) + "," + format_number(b.phi[i]) + "," + format_number(b.psi[j]) + "," +
             format_number(b.q(ii, jj)) + "," + opt(b.theta) + "," + opt(b.x) + "," + opt(b.y) + "\n";
      }
    }
  };
  emit(sol.sub, "sub", 0);
  emit(sol.sup, "sup", sol.sub.phi.empty() ? 0 : 1);
  return s;
}

std::string potential_csv(const PotentialField& f) {
  const bool theta = !f.theta.empty();
  std::string s = theta ? "phi,psi,q,theta\n" : "phi,psi,q\n";
  for (size_t i = 0; i < f.phi.size(); ++i) {
    for (size_t j = 0; j < f.psi.size(); ++j) {
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      s += format_number(f.phi[i]) + "," + format_number(f.psi[j]) + "," + format_number(f.q(ii, jj));
      if (theta) s += "," + format_number(f.theta(ii, jj));
      s += "\n";
    }
  }
  return s;
}

std::string block_vtk(const FieldBlock& b, const std::string& title) {
  if (b.x.empty() || b.y.empty()) throw std::invalid_argument("block_vtk: block has no physical coordinates");
  const size_t n0 = b.phi.size(), n1 = b.psi.size();
  std::ostringstream s;
  s << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_GRID\n";
  s << "DIMENSIONS " << n0 << " " << n1 << " 1\n";
  s << "POINTS " << n0 * n1 << " double\n";
  // VTK orders points with the first index fastest.
  for (size_t j = 0; j < n1; ++j) {
    for (size_t i = 0; i < n0; ++i) {
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      s << format_number(b.x(ii, jj)) << " " << format_number(b.y(ii, jj)) << " 0\n";
    }
  }
  s << "POINT_DATA " << n0 * n1 << "\n";
  auto scalar = [&](const char* name, auto value) {
    s << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (size_t j = 0; j < n1; ++j) {
      for (size_t i = 0; i < n0; ++i) s << format_number(value(static_cast<int>(i), static_cast<int>(j))) << "\n";
    }
  };
  scalar("q", [&](int i, int j) { return b.q(i, j); });
  if (!b.theta.empty()) scalar("theta", [&](int i, int j) { return b.theta(i, j); });
  scalar("phi", [&](int i, int) { return b.phi[i]; });
  scalar("psi", [&](int, int j) { return b.psi[j]; });
  return s.str();
}

PotentialField read_potential_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open field file " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError(path + ": empty file");
  const std::vector<std::string> head = split(line);
  std::map<std::string, int> col;
  for (size_t k = 0; k < head.size(); ++k) col[head[k]] = static_cast<int>(k);
  for (const char* need : {"phi", "psi", "q"}) {
    if (!col.count(need)) throw DomainError(path + ": missing column '" + std::string(need) + "'");
  }
  const bool has_theta = col.count("theta") > 0;
  struct Row { double phi, psi, q, theta; };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> c = split(line);
    if (c.size() < head.size()) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << head.size() << " columns";
      throw DomainError(msg.str());
    }
    Row r;
    r.phi = parse_number(c[col["phi"]], path, line_no);
    r.psi = parse_number(c[col["psi"]], path, line_no);
    r.q = parse_number(c[col["q"]], path, line_no);
    r.theta = has_theta ? parse_number(c[col["theta"]], path, line_no) : 0.0;
    rows.push_back(r);
  }
  if (rows.empty()) throw DomainError(path + ": no data rows");

  PotentialField f;
  for (const Row& r : rows) {
    f.phi.push_back(r.phi);
    f.psi.push_back(r.psi);
  }
  for (auto* v : {&f.phi, &f.psi}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  const size_t n0 = f.phi.size(), n1 = f.psi.size();
  if (n0 < 2 || n1 < 2 || rows.size() != n0 * n1) {
    std::ostringstream msg;
    msg << path << ": rows do not form a rectilinear grid (" << rows.size() << " rows, " << n0
        << " phi values, " << n1 << " psi values)";
    throw DomainError(msg.str());
  }
  f.q = Field2D(static_cast<int>(n0), static_cast<int>(n1), std::nan(""));
  if (has_theta) f.theta = Field2D(static_cast<int>(n0), static_cast<int>(n1), std::nan(""));
  for (const Row& r : rows) {
    const int i = static_cast<int>(std::lower_bound(f.phi.begin(), f.phi.end(), r.phi) - f.phi.begin());
    const int j = static_cast<int>(std::lower_bound(f.psi.begin(), f.psi.end(), r.psi) - f.psi.begin());
    if (!std::isnan(f.q(i, j))) throw DomainError(path + ": duplicate grid node");
    f.q(i, j) = r.q;
    if (has_theta) f.theta(i, j) = r.theta;
  }
  return f;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace laval
