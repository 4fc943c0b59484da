#pragma once

#include <string>

#include <json.hpp>

#include "laval/assembly.h"
#include "laval/subsonic.h"
#include "laval/supersonic.h"

namespace laval {

// Fixed-format number used in every text output ("%.17g"), so identical
// runs produce identical bytes.
std::string format_number(double v);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& j);

std::string subsonic_csv(const SubsonicField& f);      // phi,psi,q
std::string supersonic_csv(const SupersonicField& f);  // phi,psi,Q,W,Z
std::string transonic_csv(const TransonicSolution& s); // block,phi,psi,q,theta,x,y
std::string potential_csv(const PotentialField& f);    // phi,psi,q[,theta]

// Legacy VTK structured grid over (x, y) with q, theta, phi, psi point data.
std::string block_vtk(const FieldBlock& b, const std::string& title);

// Reads a CSV with at least the columns phi, psi, q (optional theta) on a
// rectilinear grid, rows in any order. Throws DomainError on a malformed file.
PotentialField read_potential_csv(const std::string& path);

// 64-bit FNV-1a of a file, as 16 hex digits; used in run manifests.
std::string file_digest(const std::string& path);

}  // namespace laval
