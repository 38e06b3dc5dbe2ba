#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logan/params.hpp"
#include "logan/tensor.hpp"

namespace logan {

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    std::int64_t worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    bool all_pass = true;
};

// Central-difference oracle over every entry of every named parameter.
// `loss_fn` rebuilds the scalar loss from current parameter values and must
// be deterministic. Failures are reported, never thrown.
//
// Relative error uses max(|analytic|, |numeric|, 1e-6) as denominator so
// near-zero gradients are compared on an absolute scale.
GradCheckReport finite_diff_check(const std::function<Tensor(ParamStore&)>& loss_fn,
                                  ParamStore& params, double h, double tol);

}  // namespace logan
