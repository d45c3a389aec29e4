#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace rplan::model {

using Mat = Eigen::MatrixXd;

// Reverse-mode tape over dense matrices. Nodes are created in topological
// order by construction; backward() walks the tape in reverse. One tape per
// training step.
class Tape {
 public:
  int leaf(Mat value, bool needs_grad = false);

  const Mat& val(int i) const { return nodes_[static_cast<size_t>(i)].value; }
  const Mat& grad_of(int i) const { return nodes_[static_cast<size_t>(i)].grad; }

  // seeds d(root)/d(root) = 1; root must be 1x1
  void backward(int root);

  void accum(int i, const Mat& g);

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // ---- ops -------------------------------------------------------------
  int matmul(int a, int b);     // A * B
  int matmul_nt(int a, int b);  // A * B^T
  int add(int a, int b);
  int sub(int a, int b);
  int add_rowvec(int a, int rv);        // A.rowwise() + rv
  int mul_rowvec(int a, int rv);        // A.array().rowwise() * rv
  int scale(int a, double s);
  int add_scaled(int a, int b, double alpha);  // A + alpha * B
  int cwise_mul(int a, int b);
  int gelu(int a);     // tanh approximation (smooth)
  int sigmoid(int a);
  int layer_norm(int a, int gain, int bias);  // rowwise; gain/bias are 1 x cols
  // rowwise softmax of (A + add_mask); mask entries are 0 or -inf
  int softmax_rows(int a, const Mat* add_mask);
  int slice_cols(int a, int c0, int n);
  int slice_rows(int a, int r0, int n);
  int concat_rows(const std::vector<int>& parts);
  int concat_cols(const std::vector<int>& parts);
  int gather_rows(int table, std::vector<int> row_ids);
  int add_const(int a, const Mat& c);
  // sum_i [logsumexp(logits_i) - logits_i[target_i]], numerically stable; 1x1
  int cross_entropy_sum(int logits, std::vector<int> targets);
  int sqdist(int a, int b);  // squared Frobenius distance, 1x1
  int hinge(int a);          // elementwise max(0, x)
  int add_scalars(const std::vector<int>& parts);  // 1x1 sum

 private:
  struct Node {
    Mat value;
    Mat grad;  // sized on first accumulation
    std::function<void(Tape&)> back;
  };
  int push(Mat value, std::function<void(Tape&)> back = nullptr);
  std::vector<Node> nodes_;
};

// Named parameter tensors with gradient accumulators.
class ParamStore {
 public:
  int add(const std::string& name, Mat init);
  int index_of(const std::string& name) const;  // -1 when absent

  Mat& value(int i) { return entries_[static_cast<size_t>(i)].value; }
  const Mat& value(int i) const { return entries_[static_cast<size_t>(i)].value; }
  Mat& grad(int i) { return entries_[static_cast<size_t>(i)].grad; }
  const std::string& name(int i) const { return entries_[static_cast<size_t>(i)].name; }
  int count() const { return static_cast<int>(entries_.size()); }

  void zero_grads();
  void sgd_step(double lr);  // plain gradient descent
  std::uint64_t value_hash() const;
  double grad_norm() const;

 private:
  struct Entry {
    std::string name;
    Mat value;
    Mat grad;
  };
  std::vector<Entry> entries_;
};

// Per-forward binding of parameters onto a tape. Leaves are created lazily;
// harvest_grads copies tape gradients back into the store.
class Bind {
 public:
  Bind(Tape& tape, ParamStore& store) : tape_(&tape), store_(&store) {}
  int operator()(int param_index);
  void harvest_grads();

 private:
  Tape* tape_;
  ParamStore* store_;
  std::vector<int> node_of_;
};

Mat randn(int rows, int cols, std::uint64_t seed, double stddev);

}  // namespace rplan::model
