#pragma once

// Fast built-in checks (< 60 s) behind `affdim selftest`. Tolerances can be
// overridden through AFFDIM_TOL_<NAME> environment variables, mainly so a
// deliberately corrupted tolerance demonstrably fails the run.

#include <string>
#include <vector>

namespace affdim {

struct SelftestCheck {
    std::string name;
    double tolerance = 0.0;
    double deviation = 0.0;
    bool pass = false;
};

std::vector<SelftestCheck> run_selftest();

}  // namespace affdim
