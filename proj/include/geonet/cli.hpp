#pragma once

#include <iosfwd>

namespace geonet {

/// Entry point of the geonet tool. Returns 0 on success, 1 on usage or
/// configuration errors and 2 on runtime or data errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geonet
