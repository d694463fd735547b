#include "pqrl/tape.hpp"

#include <cmath>

namespace pqrl {

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluAlpha = 0.044715;
}  // namespace

double gelu_scalar(double x) {
  double u = kGeluC * (x + kGeluAlpha * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad_scalar(double x) {
  double u = kGeluC * (x + kGeluAlpha * x * x * x);
  double t = std::tanh(u);
  double du = kGeluC * (1.0 + 3.0 * kGeluAlpha * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(Mat v) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(v);
  return push(std::move(n));
}

NodeId Tape::param(ParamTensor& p) {
  Node n;
  n.op = Op::kLeaf;
  n.value = p.value;
  n.bound = &p;
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kMatMul;
  n.a = a;
  n.b = b;
  n.value = pqrl::matmul(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kMatMulNT;
  n.a = a;
  n.b = b;
  n.value = pqrl::matmul_nt(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  if (!at(a).value.same_shape(at(b).value))
    throw ShapeError("add: shape " + at(a).value.shape_str() + " vs " + at(b).value.shape_str());
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = pqrl::add(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.scalar = s;
  n.value = pqrl::scale(at(a).value, s);
  return push(std::move(n));
}

NodeId Tape::row_softmax(NodeId a) {
  const Mat& x = at(a).value;
  Mat y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double m = x(i, 0);
    for (std::size_t j = 1; j < x.cols(); ++j) m = std::max(m, x(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      y(i, j) = std::exp(x(i, j) - m);
      z += y(i, j);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) /= z;
  }
  Node n;
  n.op = Op::kRowSoftmax;
  n.a = a;
  n.value = std::move(y);
  return push(std::move(n));
}

NodeId Tape::layer_norm(NodeId x, NodeId gain, NodeId bias) {
  const Mat& v = at(x).value;
  if (v.cols() < 2)
    throw ShapeError("layer_norm: degenerate width " + v.shape_str() + ", need d >= 2");
  const Mat& g = at(gain).value;
  const Mat& b = at(bias).value;
  if (g.rows() != 1 || g.cols() != v.cols() || b.rows() != 1 || b.cols() != v.cols())
    throw ShapeError("layer_norm: affine params must be 1x" + std::to_string(v.cols()));
  Mat xhat(v.rows(), v.cols());
  Mat inv_std(v.rows(), 1);
  Mat y(v.rows(), v.cols());
  double d = static_cast<double>(v.cols());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < v.cols(); ++j) mu += v(i, j);
    mu /= d;
    double var = 0.0;
    for (std::size_t j = 0; j < v.cols(); ++j) {
      double c = v(i, j) - mu;
      var += c * c;
    }
    var /= d;
    double is = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std(i, 0) = is;
    for (std::size_t j = 0; j < v.cols(); ++j) {
      xhat(i, j) = (v(i, j) - mu) * is;
      y(i, j) = g(0, j) * xhat(i, j) + b(0, j);
    }
  }
  Node n;
  n.op = Op::kLayerNorm;
  n.a = x;
  n.b = gain;
  n.c = bias;
  n.value = std::move(y);
  n.aux = std::move(xhat);
  n.aux2 = std::move(inv_std);
  return push(std::move(n));
}

NodeId Tape::gelu(NodeId a) {
  const Mat& x = at(a).value;
  Mat y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.at_flat(i) = gelu_scalar(x.at_flat(i));
  Node n;
  n.op = Op::kGelu;
  n.a = a;
  n.value = std::move(y);
  return push(std::move(n));
}

NodeId Tape::mean_pool_rows(NodeId a) {
  const Mat& x = at(a).value;
  Mat y(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y(0, j) += x(i, j);
  double inv = 1.0 / static_cast<double>(x.rows());
  y *= inv;
  Node n;
  n.op = Op::kMeanPoolRows;
  n.a = a;
  n.value = std::move(y);
  return push(std::move(n));
}

NodeId Tape::broadcast_row_add(NodeId x, NodeId row) {
  const Mat& v = at(x).value;
  const Mat& r = at(row).value;
  if (r.rows() != 1 || r.cols() != v.cols())
    throw ShapeError("broadcast_row_add: row " + r.shape_str() + " vs matrix " + v.shape_str());
  Mat y = v;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) y(i, j) += r(0, j);
  Node n;
  n.op = Op::kBroadcastRowAdd;
  n.a = x;
  n.b = row;
  n.value = std::move(y);
  return push(std::move(n));
}

NodeId Tape::hstack(NodeId a, NodeId b) {
  const Mat& x = at(a).value;
  const Mat& y = at(b).value;
  if (x.rows() != y.rows())
    throw ShapeError("hstack: row counts differ, " + x.shape_str() + " vs " + y.shape_str());
  Mat z(x.rows(), x.cols() + y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) z(i, j) = x(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) z(i, x.cols() + j) = y(i, j);
  }
  Node n;
  n.op = Op::kHStack;
  n.a = a;
  n.b = b;
  n.value = std::move(z);
  return push(std::move(n));
}

NodeId Tape::convex_blend(NodeId w, NodeId a, NodeId b) {
  const Mat& wm = at(w).value;
  const Mat& x = at(a).value;
  const Mat& y = at(b).value;
  if (wm.rows() != 1 || wm.cols() != 2)
    throw ShapeError("convex_blend: weights must be 1x2, got " + wm.shape_str());
  if (!x.same_shape(y))
    throw ShapeError("convex_blend: operand shapes differ, " + x.shape_str() + " vs " +
                     y.shape_str());
  Mat z = pqrl::add(pqrl::scale(x, wm(0, 0)), pqrl::scale(y, wm(0, 1)));
  Node n;
  n.op = Op::kConvexBlend;
  n.a = w;
  n.b = a;
  n.c = b;
  n.value = std::move(z);
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  const Mat& x = at(a).value;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x.at_flat(i);
  Node n;
  n.op = Op::kSum;
  n.a = a;
  n.value = Mat(1, 1, s);
  return push(std::move(n));
}

NodeId Tape::sum_squares(NodeId a) {
  const Mat& x = at(a).value;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x.at_flat(i) * x.at_flat(i);
  Node n;
  n.op = Op::kSumSquares;
  n.a = a;
  n.value = Mat(1, 1, s);
  return push(std::move(n));
}

void Tape::backward(NodeId root) {
  Node& r = at(root);
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw ContractError("backward: root must be scalar (1x1), got " + r.value.shape_str());
  for (auto& n : nodes_) {
    n.grad = Mat(n.value.rows(), n.value.cols());
  }
  r.grad(0, 0) = 1.0;

  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    Node& n = nodes_[idx];
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
        if (n.bound != nullptr) n.bound->grad += g;
        break;
      case Op::kMatMul:
        at(n.a).grad += pqrl::matmul_nt(g, at(n.b).value);
        at(n.b).grad += pqrl::matmul_tn(at(n.a).value, g);
        break;
      case Op::kMatMulNT:
        at(n.a).grad += pqrl::matmul(g, at(n.b).value);
        at(n.b).grad += pqrl::matmul_tn(g, at(n.a).value);
        break;
      case Op::kAdd:
        at(n.a).grad += g;
        at(n.b).grad += g;
        break;
      case Op::kScale:
        at(n.a).grad += pqrl::scale(g, n.scalar);
        break;
      case Op::kRowSoftmax: {
        const Mat& s = n.value;
        Mat& ga = at(n.a).grad;
        for (std::size_t i = 0; i < s.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < s.cols(); ++j) dot += g(i, j) * s(i, j);
          for (std::size_t j = 0; j < s.cols(); ++j) ga(i, j) += s(i, j) * (g(i, j) - dot);
        }
        break;
      }
      case Op::kLayerNorm: {
        const Mat& xhat = n.aux;
        const Mat& inv_std = n.aux2;
        const Mat& gain = at(n.b).value;
        Mat& gx = at(n.a).grad;
        Mat& gg = at(n.b).grad;
        Mat& gb = at(n.c).grad;
        double d = static_cast<double>(xhat.cols());
        for (std::size_t i = 0; i < xhat.rows(); ++i) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < xhat.cols(); ++j) {
            double dxh = g(i, j) * gain(0, j);
            m1 += dxh;
            m2 += dxh * xhat(i, j);
          }
          m1 /= d;
          m2 /= d;
          for (std::size_t j = 0; j < xhat.cols(); ++j) {
            double dxh = g(i, j) * gain(0, j);
            gx(i, j) += inv_std(i, 0) * (dxh - m1 - xhat(i, j) * m2);
            gg(0, j) += g(i, j) * xhat(i, j);
            gb(0, j) += g(i, j);
          }
        }
        break;
      }
      case Op::kGelu: {
        const Mat& x = at(n.a).value;
        Mat& ga = at(n.a).grad;
        for (std::size_t i = 0; i < x.size(); ++i)
          ga.at_flat(i) += g.at_flat(i) * gelu_grad_scalar(x.at_flat(i));
        break;
      }
      case Op::kMeanPoolRows: {
        Mat& ga = at(n.a).grad;
        double inv = 1.0 / static_cast<double>(ga.rows());
        for (std::size_t i = 0; i < ga.rows(); ++i)
          for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j) * inv;
        break;
      }
      case Op::kBroadcastRowAdd: {
        at(n.a).grad += g;
        Mat& gr = at(n.b).grad;
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
        break;
      }
      case Op::kHStack: {
        Mat& ga = at(n.a).grad;
        Mat& gb = at(n.b).grad;
        for (std::size_t i = 0; i < ga.rows(); ++i) {
          for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(i, j);
          for (std::size_t j = 0; j < gb.cols(); ++j) gb(i, j) += g(i, ga.cols() + j);
        }
        break;
      }
      case Op::kConvexBlend: {
        const Mat& w = at(n.a).value;
        const Mat& x = at(n.b).value;
        const Mat& y = at(n.c).value;
        Mat& gw = at(n.a).grad;
        gw(0, 0) += frobenius_dot(g, x);
        gw(0, 1) += frobenius_dot(g, y);
        at(n.b).grad += pqrl::scale(g, w(0, 0));
        at(n.c).grad += pqrl::scale(g, w(0, 1));
        break;
      }
      case Op::kSum: {
        Mat& ga = at(n.a).grad;
        double gs = g(0, 0);
        for (std::size_t i = 0; i < ga.size(); ++i) ga.at_flat(i) += gs;
        break;
      }
      case Op::kSumSquares: {
        Mat& ga = at(n.a).grad;
        const Mat& x = at(n.a).value;
        double gs = g(0, 0);
        for (std::size_t i = 0; i < ga.size(); ++i) ga.at_flat(i) += 2.0 * gs * x.at_flat(i);
        break;
      }
    }
  }
}

}  // namespace pqrl
