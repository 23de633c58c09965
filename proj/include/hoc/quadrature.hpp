#pragma once

#include <functional>

#include "hoc/core.hpp"

namespace hoc {

// Double-exponential (tanh-sinh) rule on [0,1]. The integrand receives both u and
// 1-u so that endpoint singularities can be evaluated without cancellation.
real tanh_sinh(const std::function<real(real u, real one_minus_u)>& f, real rel_tol = 1e-17L,
               int max_level = 10);

}  // namespace hoc
