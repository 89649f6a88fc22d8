#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "loopfact/integrable.hpp"

// Text file formats: loops and grid frames as JSON, surface samples as CSV
// and OBJ point clouds. Writers are atomic (temp file plus rename) and
// byte-stable for a fixed build, so repeated seeded runs diff clean.

namespace loopfact {

using Json = nlohmann::ordered_json;

// Forms addressable from files and the command line. "un+"/"un-" are the
// unitary loop groups with rotation +1/-1 on size n; "so-curved-flat" is the
// block form on size n + k + 1 carrying the second-kind symmetry.
inline RealForm named_form(const std::string& name, int n, int k) {
  if (name == "un+") return unitary_form(n, 1.0);
  if (name == "un-") return unitary_form(n, -1.0);
  if (name == "so-curved-flat") return curved_flat_form(n, k);
  throw IoError("unknown form name: " + name);
}

namespace detail {

inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

inline Json parse_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

// Shortest round-trip decimal, fixed across runs of the same build.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loops. One JSON object per loop: the matrix size and a list of terms, each
// a degree with separate real and imaginary n x n coefficient arrays.

inline Json loop_to_json(const LaurentLoop& x) {
  Json terms = Json::array();
  for (int d = x.d_min(); d <= x.d_max(); ++d) {
    const Mat& c = x.coeff(d);
    Json re = Json::array(), im = Json::array();
    for (int i = 0; i < x.size(); ++i) {
      Json rrow = Json::array(), irow = Json::array();
      for (int j = 0; j < x.size(); ++j) {
        rrow.push_back(c(i, j).real());
        irow.push_back(c(i, j).imag());
      }
      re.push_back(std::move(rrow));
      im.push_back(std::move(irow));
    }
    terms.push_back(
        Json{{"degree", d}, {"real", std::move(re)}, {"imag", std::move(im)}});
  }
  return Json{{"size", x.size()}, {"terms", std::move(terms)}};
}

inline LaurentLoop loop_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("size") || !j.contains("terms"))
    throw IoError("loop object needs 'size' and 'terms'");
  const int n = j.at("size").get<int>();
  if (n < 1) throw IoError("loop size must be positive");
  LaurentLoop x = LaurentLoop::zero(n);
  for (const Json& t : j.at("terms")) {
    const int d = t.at("degree").get<int>();
    const Json& re = t.at("real");
    const Json& im = t.at("imag");
    if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
      throw IoError("coefficient rows do not match the loop size");
    Mat c(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(re.at(i).size()) != n ||
          static_cast<int>(im.at(i).size()) != n)
        throw IoError("coefficient columns do not match the loop size");
      for (int q = 0; q < n; ++q)
        c(i, q) = Complex(re.at(i).at(q).get<double>(),
                          im.at(i).at(q).get<double>());
    }
    x.set_coeff(d, c);
  }
  return x;
}

inline void write_loop_file(const std::filesystem::path& path,
                            const LaurentLoop& x) {
  detail::atomic_write_text(path, loop_to_json(x).dump(2) + "\n");
}

inline LaurentLoop read_loop_file(const std::filesystem::path& path) {
  try {
    return loop_from_json(detail::parse_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad loop file " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Grid frames. The header names the form and block sizes; values follow in
// row-major grid order.

inline Json frame_to_json(const GridFrame& frame) {
  Json grid{{"origin", frame.grid.origin},
            {"spacing", frame.grid.spacing},
            {"counts", frame.grid.counts}};
  Json values = Json::array();
  for (const LaurentLoop& v : frame.values) values.push_back(loop_to_json(v));
  return Json{{"form", frame.form.name},
              {"n", frame.block_n},
              {"k", frame.block_k},
              {"grid", std::move(grid)},
              {"values", std::move(values)}};
}

inline GridFrame frame_from_json(const Json& j) {
  GridFrame frame;
  frame.block_n = j.at("n").get<int>();
  frame.block_k = j.at("k").get<int>();
  frame.form =
      named_form(j.at("form").get<std::string>(), frame.block_n, frame.block_k);
  const Json& g = j.at("grid");
  frame.grid.origin = g.at("origin").get<std::vector<double>>();
  frame.grid.spacing = g.at("spacing").get<double>();
  frame.grid.counts = g.at("counts").get<std::vector<int>>();
  frame.grid.validate();
  for (const Json& v : j.at("values")) {
    frame.values.push_back(loop_from_json(v));
    if (frame.values.back().size() != frame.form.size)
      throw IoError("frame value size does not match the form");
  }
  if (frame.values.size() != static_cast<std::size_t>(frame.grid.total()))
    throw IoError("frame values do not cover the grid");
  return frame;
}

inline void write_frame_file(const std::filesystem::path& path,
                             const GridFrame& frame) {
  detail::atomic_write_text(path, frame_to_json(frame).dump(2) + "\n");
}

inline GridFrame read_frame_file(const std::filesystem::path& path) {
  try {
    return frame_from_json(detail::parse_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad frame file " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Surface samples. CSV rows pair grid coordinates with ambient coordinates;
// the circle branch stores real and imaginary parts per coordinate. The OBJ
// writer emits a point cloud of the first three ambient coordinates.

inline std::string surface_to_csv(const SurfaceSample& s) {
  std::ostringstream out;
  const int dim = s.grid.dim();
  for (int a = 0; a < dim; ++a) out << (a ? "," : "") << "x" << (a + 1);
  if (s.sphere) {
    for (int i = 0; i < s.ambient; ++i) out << ",p" << (i + 1);
    out << "\n";
    for (long p = 0; p < s.grid.total(); ++p) {
      const std::vector<double> x = s.grid.point(p);
      for (int a = 0; a < dim; ++a)
        out << (a ? "," : "") << detail::fmt(x[static_cast<std::size_t>(a)]);
      const Eigen::VectorXd& v = s.points[static_cast<std::size_t>(p)];
      for (int i = 0; i < s.ambient; ++i) out << "," << detail::fmt(v(i));
      out << "\n";
    }
  } else {
    for (int i = 0; i < s.ambient; ++i)
      out << ",p" << (i + 1) << "_re,p" << (i + 1) << "_im";
    out << "\n";
    for (long p = 0; p < s.grid.total(); ++p) {
      const std::vector<double> x = s.grid.point(p);
      for (int a = 0; a < dim; ++a)
        out << (a ? "," : "") << detail::fmt(x[static_cast<std::size_t>(a)]);
      const Eigen::VectorXcd& v = s.columns[static_cast<std::size_t>(p)];
      for (int i = 0; i < s.ambient; ++i)
        out << "," << detail::fmt(v(i).real()) << ","
            << detail::fmt(v(i).imag());
      out << "\n";
    }
  }
  return std::move(out).str();
}

inline void write_surface_csv(const std::filesystem::path& path,
                              const SurfaceSample& s) {
  detail::atomic_write_text(path, surface_to_csv(s));
}

inline void write_surface_obj(const std::filesystem::path& path,
                              const SurfaceSample& s) {
  if (!s.sphere)
    throw IoError("OBJ export needs the real branch of the sample");
  if (s.ambient < 3) throw IoError("OBJ export needs at least 3 coordinates");
  std::ostringstream out;
  for (const Eigen::VectorXd& v : s.points)
    out << "v " << detail::fmt(v(0)) << " " << detail::fmt(v(1)) << " "
        << detail::fmt(v(2)) << "\n";
  detail::atomic_write_text(path, std::move(out).str());
}

}  // namespace loopfact
