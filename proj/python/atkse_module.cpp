// SPDX-License-Identifier: Apache-2.0
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "atkse/attack.hpp"
#include "atkse/baselines.hpp"
#include "atkse/bundle.hpp"
#include "atkse/errors.hpp"
#include "atkse/eval.hpp"
#include "atkse/sbm.hpp"
#include "atkse/surrogate.hpp"

namespace py = pybind11;
using namespace atkse;

namespace {

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["method"] = r.method;
  d["budget_rate"] = r.budget_rate;
  d["trials"] = r.trials;
  d["clean_mean"] = r.clean.mean;
  d["clean_std"] = r.clean.std;
  d["attacked_mean"] = r.attacked.mean;
  d["attacked_std"] = r.attacked.std;
  d["clean_per_trial"] = r.clean_per_trial;
  d["attacked_per_trial"] = r.attacked_per_trial;
  return d;
}

py::tuple attack_tuple(const AttackResult& r) {
  return py::make_tuple(r.perturbed, to_jsonl(r.log), r.completed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gray-box graph structure poisoning (AtkSE) with a dense GCN surrogate";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<InfeasibleConfig>(m, "InfeasibleConfig", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DegenerateGradient>(m, "DegenerateGradient", PyExc_RuntimeError);

  py::class_<Graph>(m, "Graph")
      .def(py::init<>())
      .def_readwrite("adjacency", &Graph::adjacency)
      .def_readwrite("features", &Graph::features)
      .def_readwrite("labels", &Graph::labels)
      .def_readwrite("num_classes", &Graph::num_classes)
      .def_property(
          "train", [](const Graph& g) { return g.split.train; },
          [](Graph& g, std::vector<NodeId> ids) { g.split.train = std::move(ids); })
      .def_property(
          "test", [](const Graph& g) { return g.split.test; },
          [](Graph& g, std::vector<NodeId> ids) { g.split.test = std::move(ids); })
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("num_edges", [](const Graph& g) { return count_edges(g.adjacency); })
      .def("validate", &Graph::validate)
      .def("__eq__", &Graph::operator==);

  m.def(
      "generate_sbm",
      [](int num_nodes, int num_classes, double p_in, double p_out, int num_features, double feature_shift,
         std::uint64_t seed) {
        SbmConfig c;
        c.num_nodes = num_nodes;
        c.num_classes = num_classes;
        c.p_in = p_in;
        c.p_out = p_out;
        c.num_features = num_features;
        c.feature_shift = feature_shift;
        c.seed = seed;
        return generate_sbm(c);
      },
      py::arg("num_nodes") = 100, py::arg("num_classes") = 2, py::arg("p_in") = 0.1, py::arg("p_out") = 0.01,
      py::arg("num_features") = 20, py::arg("feature_shift") = 0.5, py::arg("seed") = 0);
  m.def("load_graph_bundle", &load_graph_bundle, py::arg("path"));
  m.def("save_graph_bundle", &save_graph_bundle, py::arg("graph"), py::arg("path"));
  m.def("normalize_adjacency", &normalize_adjacency, py::arg("adjacency"));
  m.def("flip_edge", &flip_edge, py::arg("adjacency"), py::arg("u"), py::arg("v"));
  m.def(
      "edge_budget", [](const Graph& g, double rate) { return edge_budget(g, rate).delta; }, py::arg("graph"),
      py::arg("rate"));

  py::enum_<Activation>(m, "Activation")
      .value("relu", Activation::relu)
      .value("tanh", Activation::tanh)
      .value("identity", Activation::identity);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_static("surrogate_defaults", &TrainConfig::surrogate_defaults)
      .def_static("victim_defaults", &TrainConfig::victim_defaults)
      .def_readwrite("hidden_dim", &TrainConfig::hidden_dim)
      .def_readwrite("activation", &TrainConfig::activation)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("momentum", &TrainConfig::momentum)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("init_scale", &TrainConfig::init_scale)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<SurrogateParams>(m, "SurrogateParams")
      .def(py::init<>())
      .def_readwrite("w0", &SurrogateParams::w0)
      .def_readwrite("w1", &SurrogateParams::w1)
      .def_readwrite("activation", &SurrogateParams::activation);

  m.def(
      "train_surrogate", [](const Graph& g, const TrainConfig& c) { return train_surrogate(g, c); },
      py::arg("graph"), py::arg("config") = TrainConfig::surrogate_defaults());
  m.def("forward", &forward, py::arg("params"), py::arg("adjacency"), py::arg("features"));
  m.def(
      "attack_loss",
      [](const Matrix& probs, const std::vector<int>& labels, const std::vector<NodeId>& nodes) {
        return attack_loss(probs, labels, nodes);
      },
      py::arg("probs"), py::arg("labels"), py::arg("node_set"));
  m.def(
      "adjacency_gradient",
      [](const SurrogateParams& p, const Matrix& a, const Matrix& x, const std::vector<int>& labels,
         const std::vector<NodeId>& nodes) { return adjacency_gradient(p, a, x, labels, nodes); },
      py::arg("params"), py::arg("adjacency"), py::arg("features"), py::arg("labels"), py::arg("node_set"));
  m.def(
      "finite_diff_adjacency_gradient",
      [](const SurrogateParams& p, const Matrix& a, const Matrix& x, const std::vector<int>& labels,
         const std::vector<NodeId>& nodes, double h, const std::vector<std::pair<NodeId, NodeId>>& entries) {
        return finite_diff_adjacency_gradient(p, a, x, labels, nodes, h, entries);
      },
      py::arg("params"), py::arg("adjacency"), py::arg("features"), py::arg("labels"), py::arg("node_set"),
      py::arg("h"), py::arg("entries"));

  py::class_<AttackConfig>(m, "AttackConfig")
      .def(py::init<>())
      .def_property(
          "budget", [](const AttackConfig& c) { return c.budget.delta; },
          [](AttackConfig& c, int delta) { c.budget.delta = delta; })
      .def_readwrite("lambda_", &AttackConfig::lambda)
      .def_readwrite("num_candidates", &AttackConfig::num_candidates)
      .def_readwrite("batch_size", &AttackConfig::batch_size)
      .def_readwrite("momentum", &AttackConfig::momentum)
      .def_readwrite("si_samples", &AttackConfig::si_samples)
      .def_readwrite("si_sigma", &AttackConfig::si_sigma)
      .def_readwrite("seed", &AttackConfig::seed);

  m.def(
      "run_atkse",
      [](const Graph& g, const AttackConfig& c, const TrainConfig& tc) { return attack_tuple(run_atkse(g, c, tc)); },
      py::arg("graph"), py::arg("config"), py::arg("train_config") = TrainConfig::surrogate_defaults(),
      "Returns (perturbed graph, JSON Lines log, completed flag).");
  m.def(
      "random_attack",
      [](const Graph& g, int delta, std::uint64_t seed) {
        Rng rng = make_rng(seed, "baseline");
        return attack_tuple(random_attack(g, Budget{delta, 0.0}, rng));
      },
      py::arg("graph"), py::arg("budget"), py::arg("seed") = 0);
  m.def(
      "dice_attack",
      [](const Graph& g, int delta, std::uint64_t seed) {
        TrainConfig tc = TrainConfig::surrogate_defaults();
        tc.seed = seed;
        const auto labels = attacker_labels(g, tc);
        Rng rng = make_rng(seed, "baseline");
        return attack_tuple(dice_attack(g, Budget{delta, 0.0}, labels, rng));
      },
      py::arg("graph"), py::arg("budget"), py::arg("seed") = 0);

  m.def("evaluate_accuracy", &evaluate_accuracy, py::arg("params"), py::arg("graph"));
  m.def(
      "run_trials",
      [](const Graph& clean, const Graph& perturbed, const TrainConfig& vc, int trials, std::uint64_t seed) {
        return report_dict(run_trials(clean, perturbed, vc, trials, seed));
      },
      py::arg("clean"), py::arg("perturbed"), py::arg("victim_config") = TrainConfig::victim_defaults(),
      py::arg("trials") = 10, py::arg("seed") = 0);
}
