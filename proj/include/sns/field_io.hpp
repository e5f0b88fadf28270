#ifndef SNS_FIELD_IO_HPP
#define SNS_FIELD_IO_HPP

#include "sns/spectral.hpp"

#include <iosfwd>
#include <string>

namespace sns {

/// Writes rows (k1, k2, Re a_k, Im a_k) in grid order with a header line.
void write_field_csv(std::ostream& os, const Field& u);

/// Reads the format of write_field_csv. Rows may come in any order; modes
/// not listed are zero. Wavevectors outside the truncation are an error.
Field read_field_csv(std::istream& is, const GridPtr& grid);

Field read_field_csv(const std::string& path, const GridPtr& grid);

}  // namespace sns

#endif  // SNS_FIELD_IO_HPP
