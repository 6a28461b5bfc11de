#pragma once

#include <stdexcept>
#include <string>

namespace uowc {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct pole_error : error { using error::error; };
struct contour_infeasible : error { using error::error; };
struct non_convergence : error { using error::error; };
struct dimension_too_high : error { using error::error; };
struct out_of_range : error { using error::error; };
struct size_limit : error { using error::error; };
struct precondition_violation : error { using error::error; };
struct config_error : error { using error::error; };

}  // namespace uowc
