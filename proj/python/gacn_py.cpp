#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "gacn/config.hpp"
#include "gacn/dataset.hpp"
#include "gacn/error.hpp"
#include "gacn/eval.hpp"
#include "gacn/generator.hpp"
#include "gacn/trainer.hpp"

namespace py = pybind11;
using namespace gacn;

namespace {

py::dict to_dict(const MetricsRecord& r) {
  py::dict metrics, tags;
  for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
  for (const auto& [k, v] : r.tags) tags[py::str(k)] = v;
  py::dict d;
  d["task"] = r.task;
  d["metrics"] = metrics;
  d["tags"] = tags;
  d["seed"] = r.seed;
  d["config_hash"] = r.config_hash;
  d["wall_time"] = r.wall_time;
  return d;
}

py::dict to_dict(const StepRecord& r) {
  py::dict d;
  d["phase"] = r.phase;
  d["iter"] = r.iter;
  for (const auto& [k, v] : r.values) d[py::str(k)] = v;
  return d;
}

SplitPart parse_part(const std::string& s) {
  if (s == "val") return SplitPart::val;
  if (s == "test") return SplitPart::test;
  throw ConfigError("part must be 'val' or 'test', got '" + s + "'");
}

SplitKind parse_split(const std::string& s) {
  if (s == "auto") return SplitKind::automatic;
  if (s == "edges") return SplitKind::edges;
  if (s == "nodes") return SplitKind::nodes;
  if (s == "none") return SplitKind::none;
  throw ConfigError("split must be auto, edges, nodes or none, got '" + s + "'");
}

// Keyword values go through the same text parser as config files.
std::string config_text(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  return py::str(v).cast<std::string>();
}

TrainConfig make_config(const py::kwargs& kw) {
  TrainConfig c;
  for (const auto& [k, v] : kw) set_config_value(c, k.cast<std::string>(), config_text(v));
  validate(c);
  return c;
}

}  // namespace

PYBIND11_MODULE(_gacn, m) {
  m.doc() = "GACN graph contrastive learning core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<Graph>(m, "Graph")
      .def(py::init([](std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
             std::vector<Edge> e;
             e.reserve(edges.size());
             for (auto [u, v] : edges) e.push_back({u, v});
             return Graph(n, std::move(e));
           }),
           py::arg("n_nodes"), py::arg("edges"))
      .def_property_readonly("n_nodes", &Graph::n_nodes)
      .def_property_readonly("n_edges", &Graph::n_edges)
      .def_property_readonly("edges",
                             [](const Graph& g) {
                               std::vector<std::pair<NodeId, NodeId>> out;
                               for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v);
                               return out;
                             })
      .def_property_readonly("labels", [](const Graph& g) { return g.labels(); })
      .def_property_readonly("features", [](const Graph& g) { return g.features(); })
      .def_property_readonly("id_map", &Graph::id_map)
      .def_property_readonly("has_edge_split", [](const Graph& g) { return g.edge_split().has_value(); })
      .def_property_readonly("has_node_split", [](const Graph& g) { return g.node_split().has_value(); })
      .def("has_edge", &Graph::has_edge)
      .def("degree", &Graph::degree)
      .def("train_graph", &Graph::train_graph)
      .def("with_labels", &Graph::with_labels)
      .def("__repr__", [](const Graph& g) {
        return "<Graph n_nodes=" + std::to_string(g.n_nodes()) + " n_edges=" + std::to_string(g.n_edges()) + ">";
      });

  m.def(
      "load_edge_list",
      [](const std::string& path, bool numeric_ids) {
        IngestOptions o;
        o.numeric_ids = numeric_ids;
        return load_edge_list(path, o);
      },
      py::arg("path"), py::arg("numeric_ids") = true);
  m.def(
      "split_edges",
      [](const Graph& g, double train, double val, double test, std::uint64_t seed) {
        return split_edges(g, {train, val, test}, seed);
      },
      py::arg("graph"), py::arg("train") = 0.8, py::arg("val") = 0.1, py::arg("test") = 0.1, py::arg("seed") = 0);
  m.def("split_nodes", &split_nodes, py::arg("graph"), py::arg("train_per_class") = 20, py::arg("n_val") = 500,
        py::arg("n_test") = 1000, py::arg("seed") = 0);

  m.def(
      "ingest",
      [](const std::string& edges, const std::string& labels, const std::string& features, const std::string& content,
         const std::string& split, std::uint64_t split_seed, bool numeric_ids, const std::string& out) {
        IngestRequest r;
        r.edges = edges;
        r.labels = labels;
        r.features = features;
        r.content = content;
        r.split = parse_split(split);
        r.split_seed = split_seed;
        r.options.numeric_ids = numeric_ids;
        Dataset ds = ingest(r);
        if (!out.empty()) save_dataset(ds, out);
        return ds.graph;
      },
      py::arg("edges"), py::arg("labels") = "", py::arg("features") = "", py::arg("content") = "",
      py::arg("split") = "auto", py::arg("split_seed") = 0, py::arg("numeric_ids") = true, py::arg("out") = "",
      "Reads raw files into a graph; with `out` the dataset directory is written too.");
  m.def(
      "load_dataset", [](const std::string& dir) { return load_dataset(dir).graph; }, py::arg("dir"));
  m.def("dataset_fingerprint", &dataset_fingerprint);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init(&make_config))
      .def("get", [](const TrainConfig& c, const std::string& key) { return get_config_value(c, key); })
      .def("set",
           [](TrainConfig& c, const std::string& key, const py::object& v) {
             set_config_value(c, key, config_text(v));
             validate(c);
           })
      .def("to_text", [](const TrainConfig& c) { return to_text(c); })
      .def_property_readonly("hash", [](const TrainConfig& c) { return config_hash(c); })
      .def_static("from_text", [](const std::string& t) { return parse_config(t); })
      .def_static("keys", [] {
        std::vector<std::string> out;
        for (const auto& k : config_keys()) out.push_back(k.name);
        return out;
      });
  m.def(
      "apply_variant", [](const TrainConfig& c, const std::string& v) { return apply_variant(c, parse_variant(v)); },
      py::arg("config"), py::arg("variant"));

  py::class_<Trainer>(m, "Trainer")
      .def(py::init<const Graph&, const TrainConfig&>(), py::arg("graph"), py::arg("config"), py::keep_alive<1, 2>())
      .def("g_step", [](Trainer& t) { return to_dict(t.g_step()); })
      .def("d_step", [](Trainer& t) { return to_dict(t.d_step()); })
      .def("e_step", [](Trainer& t) { return to_dict(t.e_step()); })
      .def(
          "train",
          [](Trainer& t, const std::string& checkpoint_dir) {
            TrainResult r;
            {
              py::gil_scoped_release release;
              r = t.train({}, checkpoint_dir);
            }
            py::list history;
            for (const auto& s : r.history) history.append(to_dict(s));
            py::dict d;
            d["embeddings"] = r.embeddings;
            d["history"] = history;
            d["iterations"] = r.iterations;
            return d;
          },
          py::arg("checkpoint_dir") = "")
      .def("embeddings", &Trainer::embeddings)
      .def_property_readonly("iteration", &Trainer::iteration)
      .def("expected_mass", [](const Trainer& t) {
        const ViewMass v = expected_view_mass(t.generator());
        return py::make_tuple(v.existing, v.candidate);
      });

  m.def(
      "run_experiment",
      [](const Graph& g, const TrainConfig& cfg, std::size_t probe_inits, const std::string& variant) {
        ExperimentOptions opt;
        opt.probe_inits = probe_inits;
        ExperimentOutcome o;
        {
          py::gil_scoped_release release;
          o = run_experiment(g, apply_variant(cfg, parse_variant(variant)), opt);
        }
        py::dict d = to_dict(o.record);
        d["embeddings"] = o.train.embeddings;
        return d;
      },
      py::arg("graph"), py::arg("config"), py::arg("probe_inits") = 10, py::arg("variant") = "full",
      "Trains, then scores the test part with the task implied by the graph's split.");
  m.def(
      "link_rank",
      [](const Matrix& emb, const Graph& g, const std::vector<int>& ks, const std::string& part, std::uint64_t seed) {
        LinkRankOptions o;
        o.ks = ks;
        o.part = parse_part(part);
        o.seed = seed;
        return to_dict(link_rank(emb, g, o));
      },
      py::arg("embeddings"), py::arg("graph"), py::arg("ks") = std::vector<int>{20, 50, 100}, py::arg("part") = "test",
      py::arg("seed") = 0);
  m.def(
      "linear_probe",
      [](const Matrix& emb, const Graph& g, std::size_t n_inits, const std::string& part, std::uint64_t seed) {
        ProbeOptions o;
        o.seed = seed;
        return to_dict(linear_probe(emb, g, n_inits, o, parse_part(part)));
      },
      py::arg("embeddings"), py::arg("graph"), py::arg("n_inits") = 10, py::arg("part") = "test", py::arg("seed") = 0);
}
