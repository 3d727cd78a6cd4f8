#include "torus/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace torus {

void write_field(const std::string& path, const SpectralField& u) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_field: cannot open " + path);
  std::fprintf(f, "# cutoff=%.17g real=%d\n", u.cutoff(), u.real_symmetric() ? 1 : 0);
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    std::fprintf(f, "%d %d %d %.17g %.17g %.17g %.17g %.17g %.17g\n", k.k1, k.k2, k.k3,
                 v[0].real(), v[0].imag(), v[1].real(), v[1].imag(), v[2].real(), v[2].imag());
  });
  std::fclose(f);
}

SpectralField read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_field: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("read_field: empty file " + path);

  double cutoff = 0.0;
  int real_flag = 0;
  if (std::sscanf(header.c_str(), "# cutoff=%lf real=%d", &cutoff, &real_flag) != 2)
    throw std::runtime_error("read_field: bad header in " + path + ": " + header);

  SpectralField u(cutoff, real_flag != 0);
  std::string line;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    WaveVector k;
    double re1, im1, re2, im2, re3, im3;
    if (!(ls >> k.k1 >> k.k2 >> k.k3 >> re1 >> im1 >> re2 >> im2 >> re3 >> im3))
      throw std::runtime_error("read_field: malformed line " + std::to_string(line_no) + " in " +
                               path);
    if (k.is_zero())
      throw std::runtime_error("read_field: k=0 entry at line " + std::to_string(line_no));
    if (!u.within_cutoff(k))
      throw std::runtime_error("read_field: mode " + to_string(k) + " outside cutoff at line " +
                               std::to_string(line_no));
    if (u.occupied(k))
      throw std::runtime_error("read_field: duplicate mode " + to_string(k) + " at line " +
                               std::to_string(line_no));
    u.set(k, Vec3c{Complex{re1, im1}, Complex{re2, im2}, Complex{re3, im3}});
  }
  u.modes();  // finalize iteration order before sharing
  return u;
}

}  // namespace torus
