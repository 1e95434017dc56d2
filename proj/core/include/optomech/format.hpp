#pragma once

#include <string>

namespace optomech {

/// 17 significant digits, '.' decimal, locale independent; round-trips.
std::string format_double(double value);

}  // namespace optomech
