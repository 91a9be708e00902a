#pragma once

// Loading and saving of indexed triangle meshes: Wavefront OBJ, ASCII PLY
// and ASCII OFF. Polygonal faces are fan-triangulated from their first
// vertex. Output uses 17 significant digits so coordinates round-trip.

#include "hemiparam/mesh.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hemiparam {

enum class MeshFormat { obj, ply, off };

inline MeshFormat mesh_format_from_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = (dot == std::string::npos) ? "" : path.substr(dot + 1);
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(ch));
  if (ext == "obj") return MeshFormat::obj;
  if (ext == "ply") return MeshFormat::ply;
  if (ext == "off") return MeshFormat::off;
  throw MeshError("unrecognized mesh extension: '" + ext + "' (expected obj/ply/off)");
}

namespace detail {

inline void fan_triangulate(const std::vector<int>& poly,
                            std::vector<std::array<int, 3>>& tris,
                            const std::string& where) {
  if (poly.size() < 3) throw MeshError("face with fewer than 3 vertices " + where);
  for (size_t k = 1; k + 1 < poly.size(); ++k)
    tris.push_back({poly[0], poly[k], poly[k + 1]});
}

inline TriMesh finish_load(std::vector<Vec3>& verts,
                           std::vector<std::array<int, 3>>& tris) {
  Points3 V(static_cast<int>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) V.row(static_cast<int>(i)) = verts[i];
  FaceList F(static_cast<int>(tris.size()), 3);
  for (size_t f = 0; f < tris.size(); ++f)
    F.row(static_cast<int>(f)) << tris[f][0], tris[f][1], tris[f][2];
  return make_mesh(std::move(V), std::move(F));
}

inline TriMesh load_obj(std::istream& in) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw MeshError("OBJ parse failure at line " + std::to_string(lineno));
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        // token forms: i, i/t, i//n, i/t/n; only the vertex index matters
        int idx = 0;
        auto end = tok.find('/');
        auto sv = tok.substr(0, end);
        auto res = std::from_chars(sv.data(), sv.data() + sv.size(), idx);
        if (res.ec != std::errc())
          throw MeshError("OBJ parse failure at line " + std::to_string(lineno));
        if (idx < 0) idx = static_cast<int>(verts.size()) + idx + 1;  // negative = relative
        poly.push_back(idx - 1);
      }
      fan_triangulate(poly, tris, "at line " + std::to_string(lineno));
    }
    // vt/vn/usemtl/comments ignored
  }
  return finish_load(verts, tris);
}

inline TriMesh load_off(std::istream& in) {
  auto next_token_line = [&](std::string& out) {
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream probe(line);
      std::string t;
      if (probe >> t) {
        out = line;
        return true;
      }
    }
    return false;
  };
  std::string line;
  if (!next_token_line(line)) throw MeshError("OFF parse failure: empty file");
  std::istringstream hdr(line);
  std::string magic;
  hdr >> magic;
  long long nv = -1, nf = -1, ne = -1;
  if (magic == "OFF") {
    if (!(hdr >> nv >> nf >> ne)) {
      if (!next_token_line(line)) throw MeshError("OFF parse failure: missing counts");
      std::istringstream counts(line);
      if (!(counts >> nv >> nf >> ne)) throw MeshError("OFF parse failure: bad counts");
    }
  } else {
    // headerless variant: first line is the counts
    std::istringstream counts(line);
    if (!(counts >> nv >> nf >> ne)) throw MeshError("OFF parse failure: missing OFF header");
  }
  if (nv < 0 || nf < 0) throw MeshError("OFF parse failure: negative counts");
  std::vector<Vec3> verts;
  verts.reserve(static_cast<size_t>(nv));
  std::vector<std::array<int, 3>> tris;
  for (long long i = 0; i < nv; ++i) {
    if (!next_token_line(line)) throw MeshError("OFF parse failure: truncated vertices");
    std::istringstream vs(line);
    double x, y, z;
    if (!(vs >> x >> y >> z)) throw MeshError("OFF parse failure: bad vertex " + std::to_string(i));
    verts.emplace_back(x, y, z);
  }
  for (long long f = 0; f < nf; ++f) {
    if (!next_token_line(line)) throw MeshError("OFF parse failure: truncated faces");
    std::istringstream fs(line);
    int cnt;
    if (!(fs >> cnt) || cnt < 3) throw MeshError("OFF parse failure: bad face " + std::to_string(f));
    std::vector<int> poly(cnt);
    for (int k = 0; k < cnt; ++k)
      if (!(fs >> poly[k])) throw MeshError("OFF parse failure: bad face " + std::to_string(f));
    fan_triangulate(poly, tris, "in face " + std::to_string(f));
  }
  return finish_load(verts, tris);
}

inline TriMesh load_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw MeshError("PLY parse failure: missing magic");
  long long nv = -1, nf = -1;
  int xi = -1, yi = -1, zi = -1, vprops = 0;
  bool in_vertex = false, ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = (fmt == "ascii");
    } else if (tag == "element") {
      std::string what;
      long long cnt;
      ls >> what >> cnt;
      in_vertex = (what == "vertex");
      if (what == "vertex") nv = cnt;
      else if (what == "face") nf = cnt;
    } else if (tag == "property") {
      if (in_vertex) {
        std::string type, name;
        ls >> type >> name;
        if (type == "list") continue;
        if (name == "x") xi = vprops;
        if (name == "y") yi = vprops;
        if (name == "z") zi = vprops;
        ++vprops;
      }
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!ascii) throw MeshError("PLY parse failure: only ascii format supported");
  if (nv < 0 || nf < 0 || xi < 0 || yi < 0 || zi < 0)
    throw MeshError("PLY parse failure: incomplete header");
  std::vector<Vec3> verts;
  verts.reserve(static_cast<size_t>(nv));
  std::vector<std::array<int, 3>> tris;
  for (long long i = 0; i < nv; ++i) {
    if (!std::getline(in, line)) throw MeshError("PLY parse failure: truncated vertices");
    std::istringstream vs(line);
    std::vector<double> vals(vprops);
    for (int k = 0; k < vprops; ++k)
      if (!(vs >> vals[k])) throw MeshError("PLY parse failure: bad vertex " + std::to_string(i));
    verts.emplace_back(vals[xi], vals[yi], vals[zi]);
  }
  for (long long f = 0; f < nf; ++f) {
    if (!std::getline(in, line)) throw MeshError("PLY parse failure: truncated faces");
    std::istringstream fs(line);
    int cnt;
    if (!(fs >> cnt) || cnt < 3) throw MeshError("PLY parse failure: bad face " + std::to_string(f));
    std::vector<int> poly(cnt);
    for (int k = 0; k < cnt; ++k)
      if (!(fs >> poly[k])) throw MeshError("PLY parse failure: bad face " + std::to_string(f));
    fan_triangulate(poly, tris, "in face " + std::to_string(f));
  }
  return finish_load(verts, tris);
}

inline std::string fmt_coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline TriMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path);
  switch (format) {
    case MeshFormat::obj: return detail::load_obj(in);
    case MeshFormat::ply: return detail::load_ply(in);
    case MeshFormat::off: return detail::load_off(in);
  }
  throw MeshError("unknown format");
}

inline TriMesh load_mesh(const std::string& path) {
  return load_mesh(path, mesh_format_from_path(path));
}

inline void save_mesh(const TriMesh& mesh, const std::string& path,
                      MeshFormat format) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open file for writing: " + path);
  const int nv = mesh.num_vertices(), nf = mesh.num_faces();
  switch (format) {
    case MeshFormat::obj:
      for (int v = 0; v < nv; ++v)
        out << "v " << detail::fmt_coord(mesh.V(v, 0)) << ' '
            << detail::fmt_coord(mesh.V(v, 1)) << ' '
            << detail::fmt_coord(mesh.V(v, 2)) << '\n';
      for (int f = 0; f < nf; ++f)
        out << "f " << mesh.F(f, 0) + 1 << ' ' << mesh.F(f, 1) + 1 << ' '
            << mesh.F(f, 2) + 1 << '\n';
      break;
    case MeshFormat::ply:
      out << "ply\nformat ascii 1.0\nelement vertex " << nv
          << "\nproperty double x\nproperty double y\nproperty double z\n"
             "element face " << nf
          << "\nproperty list uchar int vertex_indices\nend_header\n";
      for (int v = 0; v < nv; ++v)
        out << detail::fmt_coord(mesh.V(v, 0)) << ' '
            << detail::fmt_coord(mesh.V(v, 1)) << ' '
            << detail::fmt_coord(mesh.V(v, 2)) << '\n';
      for (int f = 0; f < nf; ++f)
        out << "3 " << mesh.F(f, 0) << ' ' << mesh.F(f, 1) << ' ' << mesh.F(f, 2) << '\n';
      break;
    case MeshFormat::off:
      out << "OFF\n" << nv << ' ' << nf << " 0\n";
      for (int v = 0; v < nv; ++v)
        out << detail::fmt_coord(mesh.V(v, 0)) << ' '
            << detail::fmt_coord(mesh.V(v, 1)) << ' '
            << detail::fmt_coord(mesh.V(v, 2)) << '\n';
      for (int f = 0; f < nf; ++f)
        out << "3 " << mesh.F(f, 0) << ' ' << mesh.F(f, 1) << ' ' << mesh.F(f, 2) << '\n';
      break;
  }
  if (!out) throw MeshError("write failure: " + path);
}

inline void save_mesh(const TriMesh& mesh, const std::string& path) {
  save_mesh(mesh, path, mesh_format_from_path(path));
}

}  // namespace hemiparam
