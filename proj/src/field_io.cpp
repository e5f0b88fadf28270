#include "sns/field_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sns {

void write_field_csv(std::ostream& os, const Field& u) {
  os << "k1,k2,re,im\n" << std::setprecision(17);
  for (Index i = 0; i < u.size(); ++i) {
    const Wavevector& k = u.grid().mode(i);
    os << k.x() << ',' << k.y() << ',' << u.amps()[i].real() << ',' << u.amps()[i].imag() << '\n';
  }
}

Field read_field_csv(std::istream& is, const GridPtr& grid) {
  Field out(grid);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line.rfind("k1", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    int k1 = 0, k2 = 0;
    double re = 0, im = 0;
    if (!(row >> k1 >> k2 >> re >> im)) {
      throw std::runtime_error("field csv: malformed row " + std::to_string(line_no));
    }
    const auto loc = grid->locate(Wavevector(k1, k2));
    if (!loc) throw std::runtime_error("field csv: mode outside truncation on row " +
                                       std::to_string(line_no));
    const std::complex<double> a(re, im);
    out.amps()[loc->half] = loc->negated ? -std::conj(a) : a;
  }
  return out;
}

Field read_field_csv(const std::string& path, const GridPtr& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field file " + path);
  return read_field_csv(in, grid);
}

}  // namespace sns
