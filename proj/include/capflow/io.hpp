#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "capflow/grid.hpp"

namespace capflow {

/// Malformed or mismatching input file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary PGM (P5). In 2D one image, top row = highest cells. In 3D one image
/// per horizontal slab, bottom slab first, concatenated in a single stream.
/// Pixels: 255 in the set, 0 outside.
inline void write_pgm(std::ostream& os, const SetMask& m) {
  const HalfSpaceGrid& g = m.grid();
  const int w = g.extent(0);
  const int hgt = g.extent(1);
  const int slabs = g.dim() == 2 ? 1 : g.extent(2);
  std::ostringstream ext;
  ext << g.extent(0);
  for (int a = 1; a < g.dim(); ++a) ext << ',' << g.extent(a);
  for (int z = 0; z < slabs; ++z) {
    os << "P5\n";
    os.precision(17);
    os << "# capflow h=" << g.spacing() << " extents=" << ext.str();
    if (g.dim() == 3) os << " slab=" << z;
    os << "\n" << w << " " << hgt << "\n255\n";
    std::string row(static_cast<std::size_t>(w), '\0');
    for (int r = 0; r < hgt; ++r) {
      for (int x = 0; x < w; ++x) {
        const Cell c = g.dim() == 2 ? Cell{x, hgt - 1 - r, 0} : Cell{x, r, z};
        row[x] = static_cast<char>(m.test(c) ? 255 : 0);
      }
      os.write(row.data(), w);
    }
  }
}

namespace detail {

inline std::string pgm_token(std::istream& is) {
  std::string tok;
  while (true) {
    const int ch = is.peek();
    if (ch == EOF) break;
    if (ch == '#') {
      std::string line;
      std::getline(is, line);
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      is.get();
      continue;
    }
    tok.push_back(static_cast<char>(is.get()));
  }
  return tok;
}

}  // namespace detail

/// Reads a mask previously written by write_pgm onto `grid`; any size
/// mismatch is a FormatError.
inline SetMask read_pgm(std::istream& is, const HalfSpaceGrid& grid) {
  SetMask m(grid);
  const int slabs = grid.dim() == 2 ? 1 : grid.extent(2);
  for (int z = 0; z < slabs; ++z) {
    if (detail::pgm_token(is) != "P5") throw FormatError("pgm: missing P5 header");
    const std::string ws = detail::pgm_token(is), hs = detail::pgm_token(is), ms = detail::pgm_token(is);
    int w = 0, h = 0, maxval = 0;
    try {
      w = std::stoi(ws);
      h = std::stoi(hs);
      maxval = std::stoi(ms);
    } catch (const std::exception&) {
      throw FormatError("pgm: malformed header");
    }
    if (maxval <= 0 || maxval > 255) throw FormatError("pgm: unsupported maxval");
    if (w != grid.extent(0) || h != grid.extent(1)) {
      throw FormatError("pgm: image is " + std::to_string(w) + "x" + std::to_string(h) + ", grid expects " +
                        std::to_string(grid.extent(0)) + "x" + std::to_string(grid.extent(1)));
    }
    is.get();  // single whitespace after maxval
    std::string row(static_cast<std::size_t>(w), '\0');
    for (int r = 0; r < h; ++r) {
      if (!is.read(row.data(), w)) throw FormatError("pgm: truncated pixel data");
      for (int x = 0; x < w; ++x) {
        const Cell c = grid.dim() == 2 ? Cell{x, h - 1 - r, 0} : Cell{x, r, z};
        m.set(c, static_cast<unsigned char>(row[x]) * 2 > static_cast<unsigned>(maxval));
      }
    }
  }
  if (grid.dim() == 3 && !detail::pgm_token(is).empty()) {
    throw FormatError("pgm: more slabs than the grid has layers");
  }
  return m;
}

inline void save_pgm(const std::string& path, const SetMask& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::ios_base::failure("cannot open " + path + " for writing");
  write_pgm(os, m);
  if (!os) throw std::ios_base::failure("write failed: " + path);
}

inline SetMask load_pgm(const std::string& path, const HalfSpaceGrid& grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::ios_base::failure("cannot open " + path);
  return read_pgm(is, grid);
}

/// Scalar field as CSV rows "i,j,k,value" (k = 0 in 2D).
inline void write_field_csv(std::ostream& os, const ScalarField& f) {
  const HalfSpaceGrid& g = f.grid();
  os << "i,j,k,value\n";
  os.precision(17);
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const Cell c = g.cell(idx);
    const Cell out = g.dim() == 2 ? Cell{c[0], c[1], 0} : c;
    os << out[0] << ',' << out[1] << ',' << out[2] << ',';
    if (std::isinf(f[idx])) {
      os << (f[idx] > 0 ? "inf" : "-inf");
    } else {
      os << f[idx];
    }
    os << '\n';
  }
}

/// Per-column beta samples: one value per non-comment line, in column order;
/// when a line has several comma-separated fields the last one is the value.
inline std::vector<double> read_beta_csv(std::istream& is) {
  std::vector<double> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find_last_of(',');
    const std::string field = pos == std::string::npos ? line : line.substr(pos + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(field, &used);
      out.push_back(v);
    } catch (const std::exception&) {
      if (out.empty()) continue;  // header line
      throw FormatError("beta csv: cannot parse '" + line + "'");
    }
  }
  return out;
}

}  // namespace capflow
