// SPDX-License-Identifier: Apache-2.0
#include "atkse/surrogate.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>

#include "atkse/errors.hpp"
#include "atkse/rng.hpp"

namespace atkse {

namespace {

std::atomic<std::uint64_t> g_gradient_evaluations{0};

Matrix activate(const Matrix& h, Activation a) {
  switch (a) {
    case Activation::relu:
      return h.cwiseMax(0.0);
    case Activation::tanh:
      return h.array().tanh().matrix();
    case Activation::identity:
      return h;
  }
  return h;
}

// Derivative expressed through the pre-activation h and its image z = act(h).
// ReLU'(0) is 0.
Matrix activation_derivative(const Matrix& h, const Matrix& z, Activation a) {
  switch (a) {
    case Activation::relu:
      return (h.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - z.array().square()).matrix();
    case Activation::identity:
      return Matrix::Ones(h.rows(), h.cols());
  }
  return Matrix::Ones(h.rows(), h.cols());
}

Matrix row_softmax(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

void check_dims(const SurrogateParams& params, const Matrix& adjacency, const Matrix& features) {
  if (adjacency.rows() != adjacency.cols()) throw InvalidArgument("adjacency is not square");
  if (features.rows() != adjacency.rows()) throw InvalidArgument("feature rows do not match adjacency");
  if (params.w0.rows() != features.cols()) {
    throw InvalidArgument("W0 expects " + std::to_string(params.w0.rows()) + " features, got " +
                          std::to_string(features.cols()));
  }
  if (params.w1.rows() != params.w0.cols()) throw InvalidArgument("W0/W1 hidden dimensions disagree");
}

void check_node_set(std::span<const int> labels, std::span<const NodeId> node_set, Eigen::Index n,
                    Eigen::Index classes) {
  if (node_set.empty()) throw InvalidArgument("attack loss needs a nonempty node set");
  for (NodeId i : node_set) {
    if (i < 0 || i >= n) throw InvalidArgument("node " + std::to_string(i) + " out of range");
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= classes) throw InvalidArgument("label of node " + std::to_string(i) + " out of range");
  }
}

Matrix glorot(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  const double limit = scale * std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = dist(rng);
  }
  return w;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

SurrogateParams train_surrogate(const Graph& graph, const TrainConfig& config,
                                std::vector<double>* loss_history) {
  if (config.epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (config.hidden_dim < 1) throw InvalidArgument("hidden_dim must be positive");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw InvalidArgument("momentum must be in [0,1)");
  if (!(config.weight_decay >= 0.0)) throw InvalidArgument("weight_decay must be nonnegative");
  const auto& train = graph.split.train;
  if (train.empty()) throw InvalidArgument("train split is empty");

  const Eigen::Index n = graph.num_nodes();
  const Eigen::Index f = graph.num_features();
  const Eigen::Index c = graph.num_classes;

  Rng rng = make_rng(config.seed, "train-init");
  SurrogateParams params;
  params.activation = config.activation;
  params.w0 = glorot(f, config.hidden_dim, config.init_scale, rng);
  params.w1 = glorot(config.hidden_dim, c, config.init_scale, rng);

  const Matrix a_hat = normalize_adjacency(graph.adjacency);
  const Matrix ax = a_hat * graph.features;
  // Targets scaled so that the gradient of the mean cross-entropy is P - T.
  Matrix target = Matrix::Zero(n, c);
  Matrix mask = Matrix::Zero(n, c);
  const double inv_m = 1.0 / static_cast<double>(train.size());
  for (NodeId i : train) {
    target(i, graph.labels[static_cast<std::size_t>(i)]) = inv_m;
    mask.row(i).setConstant(inv_m);
  }

  Matrix v0 = Matrix::Zero(params.w0.rows(), params.w0.cols());
  Matrix v1 = Matrix::Zero(params.w1.rows(), params.w1.cols());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Matrix h1 = ax * params.w0;
    const Matrix z1 = activate(h1, params.activation);
    const Matrix az1 = a_hat * z1;
    const Matrix probs = row_softmax(az1 * params.w1);

    double ce = 0.0;
    for (NodeId i : train) ce -= std::log(probs(i, graph.labels[static_cast<std::size_t>(i)]));
    ce *= inv_m;
    const double l2 = 0.5 * config.weight_decay * (params.w0.squaredNorm() + params.w1.squaredNorm());
    const double loss = ce + l2;
    if (!std::isfinite(loss)) {
      throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) +
                           " (learning rate too large?)");
    }
    if (loss_history) loss_history->push_back(loss);

    const Matrix g2 = probs.cwiseProduct(mask) - target;
    const Matrix g_w1 = az1.transpose() * g2 + config.weight_decay * params.w1;
    const Matrix g_z1 = a_hat.transpose() * (g2 * params.w1.transpose());
    const Matrix g_h1 = g_z1.cwiseProduct(activation_derivative(h1, z1, params.activation));
    const Matrix g_w0 = ax.transpose() * g_h1 + config.weight_decay * params.w0;

    v0 = config.momentum * v0 + g_w0;
    v1 = config.momentum * v1 + g_w1;
    params.w0 -= config.learning_rate * v0;
    params.w1 -= config.learning_rate * v1;
  }
  if (!params.w0.allFinite() || !params.w1.allFinite()) throw NumericalError("non-finite weights after training");
  return params;
}

Matrix forward(const SurrogateParams& params, const Matrix& adjacency, const Matrix& features) {
  check_dims(params, adjacency, features);
  const Matrix a_hat = normalize_adjacency(adjacency);
  const Matrix z1 = activate(a_hat * (features * params.w0), params.activation);
  return row_softmax(a_hat * (z1 * params.w1));
}

std::vector<int> predict(const SurrogateParams& params, const Matrix& adjacency, const Matrix& features) {
  const Matrix probs = forward(params, adjacency, features);
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < probs.cols(); ++k) {
      if (probs(i, k) > probs(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double attack_loss(const Matrix& probs, std::span<const int> labels, std::span<const NodeId> node_set) {
  check_node_set(labels, node_set, probs.rows(), probs.cols());
  double sum = 0.0;
  for (NodeId i : node_set) sum += std::log(probs(i, labels[static_cast<std::size_t>(i)]));
  return sum / static_cast<double>(node_set.size());
}

Matrix adjacency_gradient(const SurrogateParams& params, const Matrix& adjacency, const Matrix& features,
                          std::span<const int> labels, std::span<const NodeId> node_set) {
  check_dims(params, adjacency, features);
  check_node_set(labels, node_set, adjacency.rows(), params.w1.cols());
  g_gradient_evaluations.fetch_add(1, std::memory_order_relaxed);

  const Eigen::Index n = adjacency.rows();
  const Eigen::VectorXd degree = adjacency.rowwise().sum().array() + 1.0;
  if ((degree.array() <= 0.0).any()) throw InvalidArgument("non-positive degree in normalization");
  const Eigen::VectorXd s = degree.array().rsqrt();
  Matrix a_tilde = adjacency + Matrix::Identity(n, n);
  const Matrix a_hat = s.asDiagonal() * a_tilde * s.asDiagonal();

  const Matrix xw = features * params.w0;
  const Matrix h1 = a_hat * xw;
  const Matrix z1 = activate(h1, params.activation);
  const Matrix m = z1 * params.w1;
  const Matrix probs = row_softmax(a_hat * m);

  // d(mean log P_y)/d logits = (onehot - P) / |S| on the node set rows.
  Matrix g2 = Matrix::Zero(n, params.w1.cols());
  const double inv = 1.0 / static_cast<double>(node_set.size());
  for (NodeId i : node_set) {
    g2.row(i) -= inv * probs.row(i);
    g2(i, labels[static_cast<std::size_t>(i)]) += inv;
  }

  // Gradient with respect to Â, from both layers.
  Matrix g_hat = g2 * m.transpose();
  const Matrix g_z1 = (a_hat.transpose() * g2) * params.w1.transpose();
  const Matrix g_h1 = g_z1.cwiseProduct(activation_derivative(h1, z1, params.activation));
  g_hat.noalias() += g_h1 * xw.transpose();

  // Â_ij = Ã_ij s_i s_j with s = d^{-1/2} and d_i = 1 + sum_j A_ij, so A_uv
  // moves Ã_uv directly and s_u through the row-u degree.
  const Matrix weighted = g_hat.cwiseProduct(a_tilde);
  const Eigen::VectorXd g_s = weighted * s + weighted.transpose() * s;
  const Eigen::VectorXd g_d = (-0.5 * g_s.array() * s.array().cube()).matrix();

  Matrix grad = (s * s.transpose()).cwiseProduct(g_hat);
  grad.colwise() += g_d;
  Matrix sym = grad + grad.transpose();
  sym.diagonal().setZero();
  if (!sym.allFinite()) throw NumericalError("non-finite adjacency gradient");
  return sym;
}

std::uint64_t adjacency_gradient_evaluations() {
  return g_gradient_evaluations.load(std::memory_order_relaxed);
}

std::vector<double> finite_diff_adjacency_gradient(const SurrogateParams& params, const Matrix& adjacency,
                                                   const Matrix& features, std::span<const int> labels,
                                                   std::span<const NodeId> node_set, double h,
                                                   std::span<const std::pair<NodeId, NodeId>> entries) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  check_dims(params, adjacency, features);
  const auto n = static_cast<NodeId>(adjacency.rows());
  std::vector<double> out;
  out.reserve(entries.size());
  Matrix work = adjacency;
  for (const auto& [u, v] : entries) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw InvalidArgument("entry out of range");
    if (u == v) throw InvalidArgument("finite difference on diagonal entry (" + std::to_string(u) + ")");
    const double base_uv = work(u, v);
    const double base_vu = work(v, u);
    const double plus = base_uv + h;
    const double minus = base_uv - h;
    if (plus == base_uv || minus == base_uv) {
      throw NumericalError("step " + std::to_string(h) + " vanishes against weight " + std::to_string(base_uv));
    }
    work(u, v) = plus;
    work(v, u) = base_vu + h;
    const double l_plus = attack_loss(forward(params, work, features), labels, node_set);
    work(u, v) = minus;
    work(v, u) = base_vu - h;
    const double l_minus = attack_loss(forward(params, work, features), labels, node_set);
    work(u, v) = base_uv;
    work(v, u) = base_vu;
    out.push_back((l_plus - l_minus) / (plus - minus));
  }
  return out;
}

bool crosses_activation_kink(const SurrogateParams& params, const Matrix& adjacency, const Matrix& features,
                             NodeId u, NodeId v, double h) {
  if (params.activation != Activation::relu) return false;
  check_dims(params, adjacency, features);
  const Matrix xw = features * params.w0;
  auto pre = [&](double delta) {
    Matrix a = adjacency;
    a(u, v) += delta;
    a(v, u) += delta;
    return Matrix(normalize_adjacency(a) * xw);
  };
  const Matrix base = pre(0.0);
  for (double delta : {h, -h}) {
    const Matrix moved = pre(delta);
    for (Eigen::Index j = 0; j < base.cols(); ++j) {
      for (Eigen::Index i = 0; i < base.rows(); ++i) {
        if ((base(i, j) > 0.0) != (moved(i, j) > 0.0)) return true;
      }
    }
  }
  return false;
}

void save_params(const SurrogateParams& params, std::uint64_t seed, const std::filesystem::path& path) {
  auto rows = [](const Matrix& w) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < w.cols(); ++j) row.push_back(w(i, j));
      out.push_back(std::move(row));
    }
    return out;
  };
  nlohmann::json doc = {
      {"num_features", params.w0.rows()},
      {"hidden_dim", params.w0.cols()},
      {"num_classes", params.w1.cols()},
      {"activation", std::string(to_string(params.activation))},
      {"seed", seed},
      {"w0", rows(params.w0)},
      {"w1", rows(params.w1)},
  };
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

SurrogateParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto f = doc.at("num_features").get<Eigen::Index>();
    const auto h = doc.at("hidden_dim").get<Eigen::Index>();
    const auto c = doc.at("num_classes").get<Eigen::Index>();
    auto read = [](const nlohmann::json& rows, Eigen::Index r, Eigen::Index k) {
      if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != r) throw IoError("weight shape mismatch");
      Matrix w(r, k);
      for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != k) throw IoError("weight shape mismatch");
        for (Eigen::Index j = 0; j < k; ++j) w(i, j) = row[static_cast<std::size_t>(j)].get<double>();
      }
      return w;
    };
    SurrogateParams p;
    p.activation = parse_activation(doc.at("activation").get<std::string>());
    p.w0 = read(doc.at("w0"), f, h);
    p.w1 = read(doc.at("w1"), h, c);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace atkse
