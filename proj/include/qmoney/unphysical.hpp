#pragma once

// Operations that violate no-cloning or read amplitudes directly. Only games
// and tests should include this header.

#include "qmoney/qsim.hpp"

namespace qmoney::qsim {

inline UnphysicalAccess grant_unphysical_access() { return {}; }

}  // namespace qmoney::qsim
