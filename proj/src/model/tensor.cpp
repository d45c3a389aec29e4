#include "rplan/model/tensor.hpp"

#include <cmath>
#include <random>

#include "rplan/util/rng.hpp"

namespace rplan::model {

namespace {
constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

int Tape::push(Mat value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), Mat(), std::move(back)});
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Mat value, bool /*needs_grad*/) { return push(std::move(value)); }

void Tape::accum(int i, const Mat& g) {
  Mat& dst = nodes_[static_cast<size_t>(i)].grad;
  if (dst.size() == 0)
    dst = g;
  else
    dst += g;
}

void Tape::backward(int root) {
  Node& r = nodes_[static_cast<size_t>(root)];
  r.grad = Mat::Ones(1, 1);
  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.grad.size() != 0 && n.back) n.back(*this);
  }
}

int Tape::matmul(int a, int b) {
  Mat out = val(a) * val(b);
  int idx = push(std::move(out));
  nodes_.back().back = [a, b, idx](Tape& t) {
    const Mat& g = t.grad_of(idx);
    t.accum(a, g * t.val(b).transpose());
    t.accum(b, t.val(a).transpose() * g);
  };
  return idx;
}

int Tape::matmul_nt(int a, int b) {
  Mat out = val(a) * val(b).transpose();
  int idx = push(std::move(out));
  nodes_.back().back = [a, b, idx](Tape& t) {
    const Mat& g = t.grad_of(idx);
    t.accum(a, g * t.val(b));
    t.accum(b, g.transpose() * t.val(a));
  };
  return idx;
}

int Tape::add(int a, int b) {
  int idx = push(val(a) + val(b));
  nodes_.back().back = [a, b, idx](Tape& t) {
    t.accum(a, t.grad_of(idx));
    t.accum(b, t.grad_of(idx));
  };
  return idx;
}

int Tape::sub(int a, int b) {
  int idx = push(val(a) - val(b));
  nodes_.back().back = [a, b, idx](Tape& t) {
    t.accum(a, t.grad_of(idx));
    t.accum(b, -t.grad_of(idx));
  };
  return idx;
}

int Tape::add_rowvec(int a, int rv) {
  Mat out = val(a);
  out.rowwise() += val(rv).row(0);
  int idx = push(std::move(out));
  nodes_.back().back = [a, rv, idx](Tape& t) {
    const Mat& g = t.grad_of(idx);
    t.accum(a, g);
    t.accum(rv, g.colwise().sum());
  };
  return idx;
}

int Tape::mul_rowvec(int a, int rv) {
  Mat out = val(a).array().rowwise() * val(rv).row(0).array();
  int idx = push(std::move(out));
  nodes_.back().back = [a, rv, idx](Tape& t) {
    const Mat& g = t.grad_of(idx);
    t.accum(a, g.array().rowwise() * t.val(rv).row(0).array());
    t.accum(rv, (g.array() * t.val(a).array()).colwise().sum());
  };
  return idx;
}

int Tape::scale(int a, double s) {
  int idx = push(val(a) * s);
  nodes_.back().back = [a, s, idx](Tape& t) { t.accum(a, t.grad_of(idx) * s); };
  return idx;
}

int Tape::add_scaled(int a, int b, double alpha) {
  int idx = push(val(a) + alpha * val(b));
  nodes_.back().back = [a, b, alpha, idx](Tape& t) {
    t.accum(a, t.grad_of(idx));
    t.accum(b, alpha * t.grad_of(idx));
  };
  return idx;
}

int Tape::cwise_mul(int a, int b) {
  int idx = push(val(a).cwiseProduct(val(b)));
  nodes_.back().back = [a, b, idx](Tape& t) {
    t.accum(a, t.grad_of(idx).cwiseProduct(t.val(b)));
    t.accum(b, t.grad_of(idx).cwiseProduct(t.val(a)));
  };
  return idx;
}

int Tape::gelu(int a) {
  const Mat& x = val(a);
  Mat u = kGeluC * (x.array() + kGeluA * x.array().cube());
  Mat th = u.array().tanh();
  Mat out = 0.5 * x.array() * (1.0 + th.array());
  int idx = push(std::move(out));
  nodes_.back().back = [a, idx, th = std::move(th)](Tape& t) {
    const Mat& x = t.val(a);
    Mat du = kGeluC * (1.0 + 3.0 * kGeluA * x.array().square());
    Mat dx = 0.5 * (1.0 + th.array()) +
             0.5 * x.array() * (1.0 - th.array().square()) * du.array();
    t.accum(a, t.grad_of(idx).cwiseProduct(dx));
  };
  return idx;
}

int Tape::sigmoid(int a) {
  Mat out = (1.0 / (1.0 + (-val(a).array()).exp()));
  int idx = push(out);
  nodes_.back().back = [a, idx, s = std::move(out)](Tape& t) {
    Mat ds = s.array() * (1.0 - s.array());
    t.accum(a, t.grad_of(idx).cwiseProduct(ds));
  };
  return idx;
}

int Tape::layer_norm(int a, int gain, int bias) {
  const Mat& x = val(a);
  Eigen::VectorXd mean = x.rowwise().mean();
  Mat centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.array().square().rowwise().mean();
  Eigen::VectorXd inv_std = (var.array() + kLnEps).rsqrt();
  Mat xhat = centered.array().colwise() * inv_std.array();
  Mat out = (xhat.array().rowwise() * val(gain).row(0).array()).rowwise() +
            val(bias).row(0).array();
  int idx = push(std::move(out));
  nodes_.back().back = [a, gain, bias, idx, xhat = std::move(xhat),
                        inv_std = std::move(inv_std)](Tape& t) {
    const Mat& g = t.grad_of(idx);
    t.accum(bias, g.colwise().sum());
    t.accum(gain, (g.array() * xhat.array()).colwise().sum());
    Mat dxhat = g.array().rowwise() * t.val(gain).row(0).array();
    Eigen::VectorXd m1 = dxhat.rowwise().mean();
    Eigen::VectorXd m2 = (dxhat.array() * xhat.array()).rowwise().mean();
    Mat dx = dxhat;
    dx.colwise() -= m1;
    dx.array() -= xhat.array().colwise() * m2.array();
    dx.array().colwise() *= inv_std.array();
    t.accum(a, dx);
  };
  return idx;
}

int Tape::softmax_rows(int a, const Mat* add_mask) {
  Mat z = val(a);
  if (add_mask) z += *add_mask;
  Eigen::VectorXd mx = z.rowwise().maxCoeff();
  Mat e = (z.colwise() - mx).array().exp();
  Eigen::VectorXd sums = e.rowwise().sum();
  Mat out = e.array().colwise() / sums.array();
  int idx = push(out);
  nodes_.back().back = [a, idx, s = std::move(out)](Tape& t) {
    const Mat& g = t.grad_of(idx);
    Eigen::VectorXd dot = (g.array() * s.array()).rowwise().sum();
    Mat dx = s.array() * (g.array().colwise() - dot.array());
    t.accum(a, dx);
  };
  return idx;
}

int Tape::slice_cols(int a, int c0, int n) {
  int rows = static_cast<int>(val(a).rows());
  int cols = static_cast<int>(val(a).cols());
  int idx = push(val(a).middleCols(c0, n));
  nodes_.back().back = [a, c0, n, rows, cols, idx](Tape& t) {
    Mat g = Mat::Zero(rows, cols);
    g.middleCols(c0, n) = t.grad_of(idx);
    t.accum(a, g);
  };
  return idx;
}

int Tape::slice_rows(int a, int r0, int n) {
  int rows = static_cast<int>(val(a).rows());
  int cols = static_cast<int>(val(a).cols());
  int idx = push(val(a).middleRows(r0, n));
  nodes_.back().back = [a, r0, n, rows, cols, idx](Tape& t) {
    Mat g = Mat::Zero(rows, cols);
    g.middleRows(r0, n) = t.grad_of(idx);
    t.accum(a, g);
  };
  return idx;
}

int Tape::concat_rows(const std::vector<int>& parts) {
  int rows = 0;
  const int cols = static_cast<int>(val(parts.front()).cols());
  for (int p : parts) rows += static_cast<int>(val(p).rows());
  Mat out(rows, cols);
  int r = 0;
  for (int p : parts) {
    out.middleRows(r, val(p).rows()) = val(p);
    r += static_cast<int>(val(p).rows());
  }
  int idx = push(std::move(out));
  nodes_.back().back = [parts, idx](Tape& t) {
    int r = 0;
    for (int p : parts) {
      const int n = static_cast<int>(t.val(p).rows());
      t.accum(p, t.grad_of(idx).middleRows(r, n));
      r += n;
    }
  };
  return idx;
}

int Tape::concat_cols(const std::vector<int>& parts) {
  int cols = 0;
  const int rows = static_cast<int>(val(parts.front()).rows());
  for (int p : parts) cols += static_cast<int>(val(p).cols());
  Mat out(rows, cols);
  int c = 0;
  for (int p : parts) {
    out.middleCols(c, val(p).cols()) = val(p);
    c += static_cast<int>(val(p).cols());
  }
  int idx = push(std::move(out));
  nodes_.back().back = [parts, idx](Tape& t) {
    int c = 0;
    for (int p : parts) {
      const int n = static_cast<int>(t.val(p).cols());
      t.accum(p, t.grad_of(idx).middleCols(c, n));
      c += n;
    }
  };
  return idx;
}

int Tape::gather_rows(int table, std::vector<int> row_ids) {
  const Mat& tab = val(table);
  Mat out(static_cast<int>(row_ids.size()), tab.cols());
  for (size_t i = 0; i < row_ids.size(); ++i) out.row(static_cast<int>(i)) = tab.row(row_ids[i]);
  int idx = push(std::move(out));
  nodes_.back().back = [table, idx, ids = std::move(row_ids)](Tape& t) {
    Mat g = Mat::Zero(t.val(table).rows(), t.val(table).cols());
    for (size_t i = 0; i < ids.size(); ++i)
      g.row(ids[i]) += t.grad_of(idx).row(static_cast<int>(i));
    t.accum(table, g);
  };
  return idx;
}

int Tape::add_const(int a, const Mat& c) {
  int idx = push(val(a) + c);
  nodes_.back().back = [a, idx](Tape& t) { t.accum(a, t.grad_of(idx)); };
  return idx;
}

int Tape::cross_entropy_sum(int logits, std::vector<int> targets) {
  const Mat& l = val(logits);
  Eigen::VectorXd mx = l.rowwise().maxCoeff();
  Mat e = (l.colwise() - mx).array().exp();
  Eigen::VectorXd sums = e.rowwise().sum();
  double loss = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    const int r = static_cast<int>(i);
    loss += std::log(sums(r)) + mx(r) - l(r, targets[i]);
  }
  Mat softmax = e.array().colwise() / sums.array();
  int idx = push(Mat::Constant(1, 1, loss));
  nodes_.back().back = [logits, idx, sm = std::move(softmax), ts = std::move(targets)](Tape& t) {
    const double g = t.grad_of(idx)(0, 0);
    Mat d = sm;
    for (size_t i = 0; i < ts.size(); ++i) d(static_cast<int>(i), ts[i]) -= 1.0;
    t.accum(logits, g * d);
  };
  return idx;
}

int Tape::sqdist(int a, int b) {
  Mat diff = val(a) - val(b);
  int idx = push(Mat::Constant(1, 1, diff.squaredNorm()));
  nodes_.back().back = [a, b, idx, diff = std::move(diff)](Tape& t) {
    const double g = t.grad_of(idx)(0, 0);
    t.accum(a, 2.0 * g * diff);
    t.accum(b, -2.0 * g * diff);
  };
  return idx;
}

int Tape::hinge(int a) {
  Mat out = val(a).cwiseMax(0.0);
  int idx = push(std::move(out));
  nodes_.back().back = [a, idx](Tape& t) {
    Mat mask = (t.val(a).array() > 0.0).cast<double>();
    t.accum(a, t.grad_of(idx).cwiseProduct(mask));
  };
  return idx;
}

int Tape::add_scalars(const std::vector<int>& parts) {
  double s = 0.0;
  for (int p : parts) s += val(p)(0, 0);
  int idx = push(Mat::Constant(1, 1, s));
  nodes_.back().back = [parts, idx](Tape& t) {
    for (int p : parts) t.accum(p, t.grad_of(idx));
  };
  return idx;
}

int ParamStore::add(const std::string& name, Mat init) {
  entries_.push_back(Entry{name, std::move(init), Mat()});
  Entry& e = entries_.back();
  e.grad = Mat::Zero(e.value.rows(), e.value.cols());
  return static_cast<int>(entries_.size()) - 1;
}

int ParamStore::index_of(const std::string& name) const {
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return static_cast<int>(i);
  return -1;
}

void ParamStore::zero_grads() {
  for (auto& e : entries_) e.grad.setZero();
}

void ParamStore::sgd_step(double lr) {
  for (auto& e : entries_) e.value -= lr * e.grad;
}

std::uint64_t ParamStore::value_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& e : entries_) {
    h = fnv1a(e.name, h);
    const auto* bytes = reinterpret_cast<const char*>(e.value.data());
    h = fnv1a(std::string_view(bytes, sizeof(double) * static_cast<size_t>(e.value.size())), h);
  }
  return h;
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.grad.squaredNorm();
  return std::sqrt(s);
}

int Bind::operator()(int param_index) {
  if (node_of_.size() < static_cast<size_t>(store_->count())) node_of_.resize(store_->count(), -1);
  int& node = node_of_[static_cast<size_t>(param_index)];
  if (node < 0) node = tape_->leaf(store_->value(param_index), true);
  return node;
}

void Bind::harvest_grads() {
  for (size_t i = 0; i < node_of_.size(); ++i) {
    if (node_of_[i] < 0) continue;
    const Mat& g = tape_->grad_of(node_of_[i]);
    if (g.size() != 0) store_->grad(static_cast<int>(i)) += g;
  }
}

Mat randn(int rows, int cols, std::uint64_t seed, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

}  // namespace rplan::model
