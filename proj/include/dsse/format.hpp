#ifndef DSSE_FORMAT_HPP_
#define DSSE_FORMAT_HPP_

#include <string>

namespace dsse {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace dsse

#endif  // DSSE_FORMAT_HPP_
