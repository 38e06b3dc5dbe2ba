#include "logan/gradcheck.hpp"

#include <cmath>

#include "logan/errors.hpp"

namespace logan {

GradCheckReport finite_diff_check(const std::function<Tensor(ParamStore&)>& loss_fn,
                                  ParamStore& params, double h, double tol) {
    if (h <= 0.0) throw ContractError("finite_diff_check: h must be positive");

    params.zero_grad();
    Tensor loss = loss_fn(params);
    backward(loss);

    // Snapshot analytic grads before the perturbation sweeps rebuild graphs.
    std::map<std::string, std::vector<double>> analytic;
    for (const auto& [name, t] : params.entries()) {
        auto g = t.grad();
        analytic[name].assign(g.begin(), g.end());
        analytic[name].resize(static_cast<std::size_t>(t.numel()), 0.0);
    }

    GradCheckReport report;
    for (const auto& [name, t] : params.entries()) {
        Tensor tensor = t;
        auto values = tensor.mutable_values();
        GradCheckEntry entry;
        entry.name = name;
        const auto& ana = analytic[name];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            const double up = loss_fn(params).item();
            values[i] = saved - h;
            const double down = loss_fn(params).item();
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double denom = std::max({std::fabs(ana[i]), std::fabs(numeric), 1e-6});
            const double rel = std::fabs(ana[i] - numeric) / denom;
            if (rel > entry.max_rel_err) {
                entry.max_rel_err = rel;
                entry.worst_index = static_cast<std::int64_t>(i);
                entry.analytic = ana[i];
                entry.numeric = numeric;
            }
        }
        entry.pass = entry.max_rel_err <= tol;
        report.all_pass = report.all_pass && entry.pass;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace logan
