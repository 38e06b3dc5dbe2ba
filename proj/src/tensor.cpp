#include "logan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "logan/errors.hpp"
#include "logan/kernels.hpp"

namespace logan {

namespace {

std::shared_ptr<TensorNode> make_node(std::vector<std::int64_t> shape, const char* op,
                                      std::vector<std::shared_ptr<TensorNode>> inputs) {
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->op = op;
    node->values.resize(static_cast<std::size_t>(node->numel()));
    node->inputs = std::move(inputs);
    for (const auto& in : node->inputs) {
        if (in->requires_grad) {
            node->requires_grad = true;
            break;
        }
    }
    return node;
}

void require_rank2(const Tensor& t, const char* op) {
    if (t.shape().size() != 2)
        throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                             shape_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                             " vs " + shape_string(b.shape()));
}

// dst[i] += a[i] * b[i]
void accumulate_mul(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

}  // namespace

std::string shape_string(const std::vector<std::int64_t>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

double* TensorNode::grad_data() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
    return grad.data();
}

// --- Tensor handle ----------------------------------------------------------

Tensor Tensor::leaf(std::vector<std::int64_t> shape, std::vector<double> values,
                    bool requires_grad) {
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    std::int64_t n = node->numel();
    if (static_cast<std::int64_t>(values.size()) != n)
        throw DimensionError("leaf: " + std::to_string(values.size()) +
                             " values for shape " + shape_string(node->shape));
    node->values = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape, bool requires_grad) {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return leaf(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0),
                requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return leaf({1}, {value}, requires_grad);
}

const std::vector<std::int64_t>& Tensor::shape() const { return node_->shape; }
std::int64_t Tensor::numel() const { return node_->numel(); }

std::int64_t Tensor::rows() const {
    require_rank2(*this, "rows");
    return node_->shape[0];
}

std::int64_t Tensor::cols() const {
    require_rank2(*this, "cols");
    return node_->shape[1];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

std::span<const double> Tensor::values() const { return {node_->values}; }

std::span<double> Tensor::mutable_values() {
    if (node_->backprop)
        throw ContractError("mutable_values: op outputs are immutable");
    return {node_->values};
}

std::span<const double> Tensor::grad() const { return {node_->grad}; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }

void Tensor::zero_grad() { node_->grad.clear(); }

double Tensor::item() const {
    if (numel() != 1)
        throw ContractError("item: tensor has " + std::to_string(numel()) + " elements");
    return node_->values[0];
}

// --- ops --------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    const std::int64_t m = a.shape()[0], k = a.shape()[1];
    const std::int64_t k2 = b.shape()[0], n = b.shape()[1];
    if (k != k2)
        throw DimensionError("matmul: inner dimensions differ: " + shape_string(a.shape()) +
                             " x " + shape_string(b.shape()));

    auto node = make_node({m, n}, "matmul", {a.ptr(), b.ptr()});
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* pc = node->values.data();
    std::fill(node->values.begin(), node->values.end(), 0.0);
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t kk = 0; kk < k; ++kk) {
            kernels::axpy(pc + i * n, pa[i * k + kk], pb + kk * n, static_cast<std::size_t>(n));
        }
    }
    if (node->requires_grad) {
        node->backprop = [m, n, k](TensorNode& self) {
            auto& na = *self.inputs[0];
            auto& nb = *self.inputs[1];
            const double* g = self.grad.data();
            if (na.requires_grad) {
                double* ga = na.grad_data();
                const double* pb2 = nb.values.data();
                for (std::int64_t i = 0; i < m; ++i)
                    for (std::int64_t kk = 0; kk < k; ++kk)
                        ga[i * k + kk] += kernels::dot(g + i * n, pb2 + kk * n,
                                                       static_cast<std::size_t>(n));
            }
            if (nb.requires_grad) {
                double* gb = nb.grad_data();
                const double* pa2 = na.values.data();
                for (std::int64_t i = 0; i < m; ++i)
                    for (std::int64_t kk = 0; kk < k; ++kk)
                        kernels::axpy(gb + kk * n, pa2[i * k + kk], g + i * n,
                                      static_cast<std::size_t>(n));
            }
        };
    }
    return Tensor(std::move(node));
}

Tensor transpose(const Tensor& a) {
    require_rank2(a, "transpose");
    const std::int64_t m = a.shape()[0], n = a.shape()[1];
    auto node = make_node({n, m}, "transpose", {a.ptr()});
    const double* pa = a.values().data();
    double* po = node->values.data();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) po[j * m + i] = pa[i * n + j];
    if (node->requires_grad) {
        node->backprop = [m, n](TensorNode& self) {
            double* ga = self.inputs[0]->grad_data();
            const double* g = self.grad.data();
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
        };
    }
    return Tensor(std::move(node));
}

Tensor row_softmax(const Tensor& s, Axis axis) {
    require_rank2(s, "row_softmax");
    for (double x : s.values())
        if (std::isnan(x)) throw NumericError("row_softmax: NaN input");

    const std::int64_t m = s.shape()[0], n = s.shape()[1];
    auto node = make_node({m, n}, "row_softmax", {s.ptr()});
    const double* ps = s.values().data();
    double* py = node->values.data();

    if (axis == Axis::rows) {
        for (std::int64_t i = 0; i < m; ++i) {
            const double* row = ps + i * n;
            double mx = kernels::reduce_max(row, static_cast<std::size_t>(n));
            double z = 0.0;
            for (std::int64_t j = 0; j < n; ++j) {
                py[i * n + j] = std::exp(row[j] - mx);
                z += py[i * n + j];
            }
            kernels::scale(py + i * n, py + i * n, 1.0 / z, static_cast<std::size_t>(n));
        }
    } else {
        for (std::int64_t j = 0; j < n; ++j) {
            double mx = ps[j];
            for (std::int64_t i = 1; i < m; ++i) mx = std::max(mx, ps[i * n + j]);
            double z = 0.0;
            for (std::int64_t i = 0; i < m; ++i) {
                py[i * n + j] = std::exp(ps[i * n + j] - mx);
                z += py[i * n + j];
            }
            for (std::int64_t i = 0; i < m; ++i) py[i * n + j] /= z;
        }
    }
    if (node->requires_grad) {
        node->backprop = [m, n, axis](TensorNode& self) {
            double* gx = self.inputs[0]->grad_data();
            const double* g = self.grad.data();
            const double* y = self.values.data();
            if (axis == Axis::rows) {
                for (std::int64_t i = 0; i < m; ++i) {
                    double dot = kernels::dot(g + i * n, y + i * n, static_cast<std::size_t>(n));
                    for (std::int64_t j = 0; j < n; ++j)
                        gx[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
                }
            } else {
                for (std::int64_t j = 0; j < n; ++j) {
                    double dot = 0.0;
                    for (std::int64_t i = 0; i < m; ++i) dot += g[i * n + j] * y[i * n + j];
                    for (std::int64_t i = 0; i < m; ++i)
                        gx[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
                }
            }
        };
    }
    return Tensor(std::move(node));
}

namespace {

std::vector<double> row_norms(const double* p, std::int64_t rows, std::int64_t d) {
    std::vector<double> out(static_cast<std::size_t>(rows));
    for (std::int64_t i = 0; i < rows; ++i)
        out[static_cast<std::size_t>(i)] =
            std::sqrt(kernels::dot(p + i * d, p + i * d, static_cast<std::size_t>(d)));
    return out;
}

}  // namespace

Tensor cosine_matrix(const Tensor& v, const Tensor& w) {
    require_rank2(v, "cosine_matrix");
    require_rank2(w, "cosine_matrix");
    const std::int64_t nv = v.shape()[0], d = v.shape()[1];
    const std::int64_t nw = w.shape()[0];
    if (w.shape()[1] != d)
        throw DimensionError("cosine_matrix: feature dims differ: " + shape_string(v.shape()) +
                             " vs " + shape_string(w.shape()));

    auto node = make_node({nv, nw}, "cosine_matrix", {v.ptr(), w.ptr()});
    const double* pv = v.values().data();
    const double* pw = w.values().data();
    double* ps = node->values.data();
    auto normv = row_norms(pv, nv, d);
    auto normw = row_norms(pw, nw, d);
    for (std::int64_t i = 0; i < nv; ++i)
        for (std::int64_t j = 0; j < nw; ++j)
            ps[i * nw + j] =
                kernels::dot(pv + i * d, pw + j * d, static_cast<std::size_t>(d)) /
                (normv[i] * normw[j] + kCosineEpsilon);

    if (node->requires_grad) {
        node->backprop = [nv, nw, d, normv = std::move(normv),
                          normw = std::move(normw)](TensorNode& self) {
            auto& vn = *self.inputs[0];
            auto& wn = *self.inputs[1];
            const double* g = self.grad.data();
            const double* s = self.values.data();
            const double* pv2 = vn.values.data();
            const double* pw2 = wn.values.data();
            if (vn.requires_grad) {
                double* gv = vn.grad_data();
                for (std::int64_t i = 0; i < nv; ++i) {
                    double self_coef = 0.0;
                    for (std::int64_t j = 0; j < nw; ++j) {
                        double denom = normv[i] * normw[j] + kCosineEpsilon;
                        double gij = g[i * nw + j];
                        if (gij == 0.0) continue;
                        kernels::axpy(gv + i * d, gij / denom, pw2 + j * d,
                                      static_cast<std::size_t>(d));
                        self_coef -= gij * s[i * nw + j] * normw[j] / denom;
                    }
                    if (normv[i] > 0.0)
                        kernels::axpy(gv + i * d, self_coef / normv[i], pv2 + i * d,
                                      static_cast<std::size_t>(d));
                }
            }
            if (wn.requires_grad) {
                double* gw = wn.grad_data();
                for (std::int64_t j = 0; j < nw; ++j) {
                    double self_coef = 0.0;
                    for (std::int64_t i = 0; i < nv; ++i) {
                        double denom = normv[i] * normw[j] + kCosineEpsilon;
                        double gij = g[i * nw + j];
                        if (gij == 0.0) continue;
                        kernels::axpy(gw + j * d, gij / denom, pv2 + i * d,
                                      static_cast<std::size_t>(d));
                        self_coef -= gij * s[i * nw + j] * normv[i] / denom;
                    }
                    if (normw[j] > 0.0)
                        kernels::axpy(gw + j * d, self_coef / normw[j], pw2 + j * d,
                                      static_cast<std::size_t>(d));
                }
            }
        };
    }
    return Tensor(std::move(node));
}

Tensor cosine_pairs(const Tensor& a, const Tensor& b) {
    require_rank2(a, "cosine_pairs");
    require_rank2(b, "cosine_pairs");
    require_same_shape(a, b, "cosine_pairs");
    const std::int64_t n = a.shape()[0], d = a.shape()[1];

    auto node = make_node({n}, "cosine_pairs", {a.ptr(), b.ptr()});
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* pr = node->values.data();
    auto norma = row_norms(pa, n, d);
    auto normb = row_norms(pb, n, d);
    for (std::int64_t k = 0; k < n; ++k)
        pr[k] = kernels::dot(pa + k * d, pb + k * d, static_cast<std::size_t>(d)) /
                (norma[k] * normb[k] + kCosineEpsilon);

    if (node->requires_grad) {
        node->backprop = [n, d, norma = std::move(norma), normb = std::move(normb)](
                             TensorNode& self) {
            auto& an = *self.inputs[0];
            auto& bn = *self.inputs[1];
            const double* g = self.grad.data();
            const double* r = self.values.data();
            const double* pa2 = an.values.data();
            const double* pb2 = bn.values.data();
            for (std::int64_t k = 0; k < n; ++k) {
                if (g[k] == 0.0) continue;
                double denom = norma[k] * normb[k] + kCosineEpsilon;
                if (an.requires_grad) {
                    double* ga = an.grad_data();
                    kernels::axpy(ga + k * d, g[k] / denom, pb2 + k * d,
                                  static_cast<std::size_t>(d));
                    if (norma[k] > 0.0)
                        kernels::axpy(ga + k * d, -g[k] * r[k] * normb[k] / (denom * norma[k]),
                                      pa2 + k * d, static_cast<std::size_t>(d));
                }
                if (bn.requires_grad) {
                    double* gb = bn.grad_data();
                    kernels::axpy(gb + k * d, g[k] / denom, pa2 + k * d,
                                  static_cast<std::size_t>(d));
                    if (normb[k] > 0.0)
                        kernels::axpy(gb + k * d, -g[k] * r[k] * norma[k] / (denom * normb[k]),
                                      pb2 + k * d, static_cast<std::size_t>(d));
                }
            }
        };
    }
    return Tensor(std::move(node));
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    auto node = make_node(a.shape(), "add", {a.ptr(), b.ptr()});
    kernels::add(node->values.data(), a.values().data(), b.values().data(),
                 node->values.size());
    if (node->requires_grad) {
        node->backprop = [](TensorNode& self) {
            for (auto& in : self.inputs)
                if (in->requires_grad)
                    kernels::axpy(in->grad_data(), 1.0, self.grad.data(), self.grad.size());
        };
    }
    return Tensor(std::move(node));
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    auto node = make_node(a.shape(), "mul", {a.ptr(), b.ptr()});
    kernels::mul(node->values.data(), a.values().data(), b.values().data(),
                 node->values.size());
    if (node->requires_grad) {
        node->backprop = [](TensorNode& self) {
            auto& an = *self.inputs[0];
            auto& bn = *self.inputs[1];
            if (an.requires_grad)
                accumulate_mul(an.grad_data(), self.grad.data(), bn.values.data(),
                               self.grad.size());
            if (bn.requires_grad)
                accumulate_mul(bn.grad_data(), self.grad.data(), an.values.data(),
                               self.grad.size());
        };
    }
    return Tensor(std::move(node));
}

Tensor scale(const Tensor& a, double alpha) {
    auto node = make_node(a.shape(), "scale", {a.ptr()});
    kernels::scale(node->values.data(), a.values().data(), alpha, node->values.size());
    if (node->requires_grad) {
        node->backprop = [alpha](TensorNode& self) {
            kernels::axpy(self.inputs[0]->grad_data(), alpha, self.grad.data(),
                          self.grad.size());
        };
    }
    return Tensor(std::move(node));
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
    require_rank2(m, "add_rowvec");
    const std::int64_t rows = m.shape()[0], d = m.shape()[1];
    if (v.numel() != d)
        throw DimensionError("add_rowvec: vector " + shape_string(v.shape()) +
                             " does not match columns of " + shape_string(m.shape()));
    auto node = make_node({rows, d}, "add_rowvec", {m.ptr(), v.ptr()});
    const double* pm = m.values().data();
    const double* pv = v.values().data();
    double* po = node->values.data();
    for (std::int64_t i = 0; i < rows; ++i)
        kernels::add(po + i * d, pm + i * d, pv, static_cast<std::size_t>(d));
    if (node->requires_grad) {
        node->backprop = [rows, d](TensorNode& self) {
            auto& mn = *self.inputs[0];
            auto& vn = *self.inputs[1];
            const double* g = self.grad.data();
            if (mn.requires_grad)
                kernels::axpy(mn.grad_data(), 1.0, g, self.grad.size());
            if (vn.requires_grad) {
                double* gv = vn.grad_data();
                for (std::int64_t i = 0; i < rows; ++i)
                    kernels::axpy(gv, 1.0, g + i * d, static_cast<std::size_t>(d));
            }
        };
    }
    return Tensor(std::move(node));
}

Tensor concat_lastdim(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != b.shape().size())
        throw DimensionError("concat_lastdim: rank mismatch " + shape_string(a.shape()) +
                             " vs " + shape_string(b.shape()));
    if (a.shape().size() == 1) {
        const std::int64_t p = a.shape()[0], q = b.shape()[0];
        auto node = make_node({p + q}, "concat_lastdim", {a.ptr(), b.ptr()});
        std::copy(a.values().begin(), a.values().end(), node->values.begin());
        std::copy(b.values().begin(), b.values().end(), node->values.begin() + p);
        if (node->requires_grad) {
            node->backprop = [p, q](TensorNode& self) {
                const double* g = self.grad.data();
                if (self.inputs[0]->requires_grad)
                    kernels::axpy(self.inputs[0]->grad_data(), 1.0, g,
                                  static_cast<std::size_t>(p));
                if (self.inputs[1]->requires_grad)
                    kernels::axpy(self.inputs[1]->grad_data(), 1.0, g + p,
                                  static_cast<std::size_t>(q));
            };
        }
        return Tensor(std::move(node));
    }
    require_rank2(a, "concat_lastdim");
    if (a.shape()[0] != b.shape()[0])
        throw DimensionError("concat_lastdim: row counts differ: " + shape_string(a.shape()) +
                             " vs " + shape_string(b.shape()));
    const std::int64_t rows = a.shape()[0], p = a.shape()[1], q = b.shape()[1];
    auto node = make_node({rows, p + q}, "concat_lastdim", {a.ptr(), b.ptr()});
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* po = node->values.data();
    for (std::int64_t i = 0; i < rows; ++i) {
        std::copy(pa + i * p, pa + (i + 1) * p, po + i * (p + q));
        std::copy(pb + i * q, pb + (i + 1) * q, po + i * (p + q) + p);
    }
    if (node->requires_grad) {
        node->backprop = [rows, p, q](TensorNode& self) {
            const double* g = self.grad.data();
            if (self.inputs[0]->requires_grad) {
                double* ga = self.inputs[0]->grad_data();
                for (std::int64_t i = 0; i < rows; ++i)
                    kernels::axpy(ga + i * p, 1.0, g + i * (p + q),
                                  static_cast<std::size_t>(p));
            }
            if (self.inputs[1]->requires_grad) {
                double* gb = self.inputs[1]->grad_data();
                for (std::int64_t i = 0; i < rows; ++i)
                    kernels::axpy(gb + i * q, 1.0, g + i * (p + q) + p,
                                  static_cast<std::size_t>(q));
            }
        };
    }
    return Tensor(std::move(node));
}

Tensor concat_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ContractError("concat_rows: no rows");
    const std::int64_t d = rows[0].numel();
    std::vector<std::shared_ptr<TensorNode>> inputs;
    inputs.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.numel() != d)
            throw DimensionError("concat_rows: row widths differ: " +
                                 shape_string(rows[0].shape()) + " vs " +
                                 shape_string(r.shape()));
        inputs.push_back(r.ptr());
    }
    const std::int64_t k = static_cast<std::int64_t>(rows.size());
    auto node = make_node({k, d}, "concat_rows", std::move(inputs));
    double* po = node->values.data();
    for (std::int64_t i = 0; i < k; ++i)
        std::copy(rows[static_cast<std::size_t>(i)].values().begin(),
                  rows[static_cast<std::size_t>(i)].values().end(), po + i * d);
    if (node->requires_grad) {
        node->backprop = [d](TensorNode& self) {
            const double* g = self.grad.data();
            for (std::size_t i = 0; i < self.inputs.size(); ++i)
                if (self.inputs[i]->requires_grad)
                    kernels::axpy(self.inputs[i]->grad_data(), 1.0,
                                  g + static_cast<std::int64_t>(i) * d,
                                  static_cast<std::size_t>(d));
        };
    }
    return Tensor(std::move(node));
}

Tensor relu(const Tensor& a) {
    auto node = make_node(a.shape(), "relu", {a.ptr()});
    const double* pa = a.values().data();
    double* po = node->values.data();
    for (std::size_t i = 0; i < node->values.size(); ++i) po[i] = pa[i] > 0.0 ? pa[i] : 0.0;
    if (node->requires_grad) {
        node->backprop = [](TensorNode& self) {
            double* ga = self.inputs[0]->grad_data();
            const double* x = self.inputs[0]->values.data();
            const double* g = self.grad.data();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                if (x[i] > 0.0) ga[i] += g[i];
        };
    }
    return Tensor(std::move(node));
}

Tensor tanh_op(const Tensor& a) {
    auto node = make_node(a.shape(), "tanh", {a.ptr()});
    const double* pa = a.values().data();
    double* po = node->values.data();
    for (std::size_t i = 0; i < node->values.size(); ++i) po[i] = std::tanh(pa[i]);
    if (node->requires_grad) {
        node->backprop = [](TensorNode& self) {
            double* ga = self.inputs[0]->grad_data();
            const double* y = self.values.data();
            const double* g = self.grad.data();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                ga[i] += g[i] * (1.0 - y[i] * y[i]);
        };
    }
    return Tensor(std::move(node));
}

Tensor sigmoid(const Tensor& a) {
    auto node = make_node(a.shape(), "sigmoid", {a.ptr()});
    const double* pa = a.values().data();
    double* po = node->values.data();
    for (std::size_t i = 0; i < node->values.size(); ++i) po[i] = 1.0 / (1.0 + std::exp(-pa[i]));
    if (node->requires_grad) {
        node->backprop = [](TensorNode& self) {
            double* ga = self.inputs[0]->grad_data();
            const double* y = self.values.data();
            const double* g = self.grad.data();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                ga[i] += g[i] * y[i] * (1.0 - y[i]);
        };
    }
    return Tensor(std::move(node));
}

Tensor sum(const Tensor& a) {
    auto node = make_node({1}, "sum", {a.ptr()});
    node->values[0] = kernels::reduce_sum(a.values().data(), a.values().size());
    if (node->requires_grad) {
        node->backprop = [](TensorNode& self) {
            double* ga = self.inputs[0]->grad_data();
            const double g = self.grad[0];
            for (std::size_t i = 0; i < self.inputs[0]->values.size(); ++i) ga[i] += g;
        };
    }
    return Tensor(std::move(node));
}

Tensor gather_rows(const Tensor& table, const std::vector<std::int64_t>& ids) {
    require_rank2(table, "gather_rows");
    const std::int64_t v = table.shape()[0], d = table.shape()[1];
    for (auto id : ids)
        if (id < 0 || id >= v)
            throw DataError("gather_rows: row " + std::to_string(id) + " outside table " +
                            shape_string(table.shape()));
    const std::int64_t q = static_cast<std::int64_t>(ids.size());
    auto node = make_node({q, d}, "gather_rows", {table.ptr()});
    const double* pt = table.values().data();
    double* po = node->values.data();
    for (std::int64_t i = 0; i < q; ++i)
        std::copy(pt + ids[static_cast<std::size_t>(i)] * d,
                  pt + (ids[static_cast<std::size_t>(i)] + 1) * d, po + i * d);
    if (node->requires_grad) {
        node->backprop = [ids, d](TensorNode& self) {
            double* gt = self.inputs[0]->grad_data();
            const double* g = self.grad.data();
            for (std::size_t i = 0; i < ids.size(); ++i)
                kernels::axpy(gt + ids[i] * d, 1.0, g + static_cast<std::int64_t>(i) * d,
                              static_cast<std::size_t>(d));
        };
    }
    return Tensor(std::move(node));
}

Tensor lse_span(const Tensor& r, std::int64_t begin, std::int64_t end, double lambda) {
    if (r.shape().size() != 1)
        throw DimensionError("lse_span: expected rank-1 tensor, got " + shape_string(r.shape()));
    const std::int64_t n = r.shape()[0];
    if (begin < 0 || end > n || begin >= end)
        throw ContractError("lse_span: empty or out-of-range span [" + std::to_string(begin) +
                            "," + std::to_string(end) + ") over " + std::to_string(n) +
                            " entries");
    if (lambda <= 0.0) throw ContractError("lse_span: lambda must be positive");

    auto node = make_node({1}, "lse_span", {r.ptr()});
    const double* pr = r.values().data();
    const std::size_t len = static_cast<std::size_t>(end - begin);
    double mx = kernels::reduce_max(pr + begin, len);
    double z = 0.0;
    for (std::size_t k = 0; k < len; ++k) z += std::exp(lambda * (pr[begin + static_cast<std::int64_t>(k)] - mx));
    node->values[0] = mx + std::log(z) / lambda;
    if (node->requires_grad) {
        node->backprop = [begin, len, lambda, mx, z](TensorNode& self) {
            double* gr = self.inputs[0]->grad_data();
            const double* x = self.inputs[0]->values.data();
            const double g = self.grad[0];
            for (std::size_t k = 0; k < len; ++k) {
                std::int64_t idx = begin + static_cast<std::int64_t>(k);
                gr[idx] += g * std::exp(lambda * (x[idx] - mx)) / z;
            }
        };
    }
    return Tensor(std::move(node));
}

// --- backward ----------------------------------------------------------------

void backward(const Tensor& loss) {
    if (!loss.defined()) throw ContractError("backward: undefined tensor");
    if (loss.numel() != 1)
        throw ContractError("backward: loss must be scalar, got " + shape_string(loss.shape()));
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS; reversed it yields every consumer before the
    // node it feeds, so grads are complete when a node's backprop runs.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> visited;
    struct Frame {
        TensorNode* node;
        std::size_t next_input;
    };
    std::vector<Frame> stack;
    stack.push_back({loss.node(), 0});
    visited.insert(loss.node());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_input < f.node->inputs.size()) {
            TensorNode* in = f.node->inputs[f.next_input++].get();
            if (in->requires_grad && !visited.count(in)) {
                visited.insert(in);
                stack.push_back({in, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    loss.node()->grad_data()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* node = *it;
        if (node->backprop && !node->grad.empty()) node->backprop(*node);
    }
}

}  // namespace logan
