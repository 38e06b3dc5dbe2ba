#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace logan {

struct TensorNode;

// Value-semantic handle to a node in the reverse-mode tape. Values are
// written once by the producing op; backward() fills grads.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

    static Tensor leaf(std::vector<std::int64_t> shape, std::vector<double> values,
                       bool requires_grad = false);
    static Tensor zeros(std::vector<std::int64_t> shape, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<std::int64_t>& shape() const;
    std::int64_t numel() const;
    std::int64_t rows() const;  // rank-2 only
    std::int64_t cols() const;  // rank-2 only
    bool requires_grad() const;

    std::span<const double> values() const;
    // Leaf mutation hook for the optimizer; never call on op outputs.
    std::span<double> mutable_values();
    std::span<const double> grad() const;
    bool has_grad() const;
    void zero_grad();

    double item() const;  // numel()==1 only

    TensorNode* node() const { return node_.get(); }
    const std::shared_ptr<TensorNode>& ptr() const { return node_; }

private:
    std::shared_ptr<TensorNode> node_;
};

struct TensorNode {
    std::vector<std::int64_t> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until backward touches this node
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<TensorNode>> inputs;
    // Propagates this node's grad into inputs' grads (accumulating).
    std::function<void(TensorNode&)> backprop;

    std::int64_t numel() const {
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }
    double* grad_data();  // allocates zeros on first use
};

enum class Axis { rows, cols };

// --- graph ops -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Softmax along the chosen axis of a rank-2 tensor, max-stabilized.
Tensor row_softmax(const Tensor& s, Axis axis);

// cosine(v_i, w_j) for every row pair; epsilon-guarded norms, the epsilon is
// constant for the gradient.
Tensor cosine_matrix(const Tensor& v, const Tensor& w);
// Row-wise cosine of two [n x d] tensors -> [n].
Tensor cosine_pairs(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double alpha);
// m[i,:] + v for every row.
Tensor add_rowvec(const Tensor& m, const Tensor& v);
Tensor concat_lastdim(const Tensor& a, const Tensor& b);
// Stacks [1 x d] rows into [k x d].
Tensor concat_rows(const std::vector<Tensor>& rows);
Tensor relu(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor sum(const Tensor& a);
// Embedding-style row gather; backward scatter-adds into the table.
Tensor gather_rows(const Tensor& table, const std::vector<std::int64_t>& ids);
// (1/lambda) * log sum_{k in [begin,end)} exp(lambda * r[k]) over a rank-1 r.
Tensor lse_span(const Tensor& r, std::int64_t begin, std::int64_t end, double lambda);

// Reverse-mode sweep from a scalar loss. Accumulates into .grad of every
// reachable requires_grad node; caller owns zeroing between steps.
void backward(const Tensor& loss);

std::string shape_string(const std::vector<std::int64_t>& shape);

constexpr double kCosineEpsilon = 1e-8;

}  // namespace logan
