#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "seqfuzz/campaign.hpp"
#include "seqfuzz/corpus_gen.hpp"
#include "seqfuzz/coverage.hpp"
#include "seqfuzz/error.hpp"
#include "seqfuzz/mock_sut.hpp"
#include "seqfuzz/mutation.hpp"
#include "seqfuzz/reporting.hpp"
#include "seqfuzz/scheduler.hpp"

namespace py = pybind11;
using namespace seqfuzz;

namespace {

struct Generator {
  ApiSpec spec;
  DependencyGraph graph;
};

std::vector<std::string> serialize_all(const std::vector<RequestSequence>& seqs) {
  std::vector<std::string> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(serialize_sequence(s));
  return out;
}

py::dict stats_dict(const CampaignStats& s) {
  py::dict verdicts;
  for (const auto& [v, n] : s.verdicts) verdicts[py::str(std::string(to_string(v)))] = n;
  py::dict d;
  d["sequences_executed"] = s.sequences_executed;
  d["requests_sent"] = s.requests_sent;
  d["verdicts"] = verdicts;
  d["findings"] = s.findings;
  d["warnings"] = s.warnings;
  d["response_coverage"] = py::make_tuple(s.response_coverage.covered, s.response_coverage.denominator);
  d["line_bits"] = py::make_tuple(s.line_bits_set, s.line_bits_total);
  d["corpus_size"] = s.corpus_size;
  d["rng_seed"] = s.rng_seed;
  return d;
}

} // namespace

PYBIND11_MODULE(_seqfuzz, m) {
  m.doc() = "Bindings for the seqfuzz stateful REST API fuzzer";

  static py::handle error_type = py::exception<Error>(m, "SeqfuzzError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<Generator>(m, "Spec")
      .def_static(
          "load", [](const std::string& path) {
            Generator g{load_spec_file(path), {}};
            g.graph = build_dependency_graph(g.spec);
            return g;
          },
          py::arg("path"))
      .def_static(
          "parse", [](const std::string& text) {
            Generator g{parse_spec(text), {}};
            g.graph = build_dependency_graph(g.spec);
            return g;
          },
          py::arg("text"))
      .def_property_readonly("base_url", [](const Generator& g) { return g.spec.base_url; })
      .def_property_readonly("operations",
                             [](const Generator& g) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& op : g.spec.operations)
                                 out.emplace_back(std::string(to_string(op.method)), op.path);
                               return out;
                             })
      .def_property_readonly("edges",
                             [](const Generator& g) {
                               std::vector<py::tuple> out;
                               for (const auto& e : g.graph.edges)
                                 out.push_back(py::make_tuple(g.graph.nodes[e.producer].label(),
                                                              g.graph.nodes[e.consumer].label(), e.field, e.param));
                               return out;
                             })
      .def("expected_statuses",
           [](const Generator& g, const std::string& path, const std::string& method) {
             ExpectedStatuses st = expected_statuses(g.spec, path, parse_method(method));
             return py::make_tuple(std::vector<int>(st.codes.begin(), st.codes.end()), st.wildcard);
           })
      .def("generate_corpus",
           [](const Generator& g, std::uint64_t seed) {
             Rng rng(seed);
             return serialize_all(generate_corpus(g.spec, g.graph, rng).sequences);
           },
           py::arg("seed") = 1)
      .def("mutate",
           [](const Generator& g, const std::string& sequence, std::uint64_t seed) {
             Rng rng(seed);
             MutationTrace trace;
             RequestSequence out = mutate(parse_sequence(sequence), g.spec, g.graph, rng, &trace);
             std::vector<std::string> names;
             for (auto k : trace.applied) names.emplace_back(to_string(k));
             return py::make_tuple(serialize_sequence(out), names);
           },
           py::arg("sequence"), py::arg("seed"))
      .def("dependency_graph_markdown", [](const Generator& g) { return render_dependency_graph_markdown(g.graph); });

  m.def("mutator_names", [] {
    std::vector<std::string> out;
    for (auto k : all_mutators()) out.emplace_back(to_string(k));
    return out;
  });

  m.def(
      "energy",
      [](const std::string& schedule, double alpha, std::uint64_t s, std::uint64_t f, double mu, std::uint32_t cap) {
        return compute_energy(parse_schedule(schedule), alpha, s, f, mu, cap);
      },
      py::arg("schedule"), py::arg("alpha"), py::arg("s"), py::arg("f"), py::arg("mu") = 0.0,
      py::arg("cap") = kMaxEnergy);

  m.def(
      "decode_coverage",
      [](const std::string& payload) {
        LineCoverageMap map = parse_coverage_payload(payload);
        return py::make_tuple(map.total_bits(), map.set_indices());
      },
      py::arg("payload"));
  m.def(
      "encode_coverage",
      [](std::size_t total_bits, const std::vector<std::size_t>& set) {
        LineCoverageMap map(total_bits);
        for (auto i : set) map.set(i);
        return make_coverage_payload(map);
      },
      py::arg("total_bits"), py::arg("set_bits"));

  m.def("strip_timing", [](const std::string& line) { return strip_timing(line); });
  m.def("mermaid_id", [](const std::string& text) { return mermaid_id(text); });

  py::class_<MockSut>(m, "MockSut")
      .def(py::init<>())
      .def("start", &MockSut::start, py::arg("api_port") = 0, py::arg("agent_port") = 0, py::arg("rng_seed") = 0,
           py::call_guard<py::gil_scoped_release>())
      .def("stop", &MockSut::stop, py::call_guard<py::gil_scoped_release>())
      .def("reset_state", &MockSut::reset_state)
      .def_property_readonly("base_url", &MockSut::base_url)
      .def_property_readonly("agent_url", &MockSut::agent_url)
      .def("coverage", [](const MockSut& s) { return s.coverage().set_indices(); })
      .def("__enter__", [](MockSut& s) -> MockSut& {
        s.start();
        return s;
      }, py::return_value_policy::reference)
      .def("__exit__", [](MockSut& s, py::args) { s.stop(); });

  m.def(
      "fuzz",
      [](const std::filesystem::path& config_path, const std::filesystem::path& spec_path, py::kwargs overrides) {
        CampaignConfig c = load_config_file(config_path);
        c.spec_path = spec_path;
        for (auto [key, value] : overrides) {
          const std::string k = py::str(key);
          if (k == "seed") c.rng_seed = value.cast<std::uint64_t>();
          else if (k == "budget") c.time_budget = value.cast<double>();
          else if (k == "target") c.client.base_url = value.cast<std::string>();
          else if (k == "agent") c.agent_url = value.cast<std::string>();
          else if (k == "report") c.report_dir = value.cast<std::string>();
          else if (k == "corpus") c.corpus_dir = value.cast<std::string>();
          else if (k == "schedule") c.schedule = parse_schedule(value.cast<std::string>());
          else if (k == "checker") c.checker = parse_checker_mode(value.cast<std::string>());
          else if (k == "max_sequences") c.max_sequences = value.cast<std::uint64_t>();
          else throw Error(ErrorCode::ConfigError, "unknown override: " + k);
        }
        CampaignStats stats;
        {
          py::gil_scoped_release release;
          stats = run_campaign(c);
        }
        return stats_dict(stats);
      },
      py::arg("config"), py::arg("spec"));

  m.def("report", &regenerate_reports, py::arg("spec"), py::arg("events"), py::arg("report_dir"),
        py::call_guard<py::gil_scoped_release>());
}
