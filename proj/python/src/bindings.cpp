// JSON-level bindings. Artifacts cross the boundary as JSON text in the CLI schemas.
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relaxforge/cli.hpp"
#include "relaxforge/conic.hpp"
#include "relaxforge/error.hpp"
#include "relaxforge/gamma2.hpp"
#include "relaxforge/io.hpp"
#include "relaxforge/kw.hpp"
#include "relaxforge/qphp.hpp"
#include "relaxforge/quantum_lab.hpp"

namespace py = pybind11;
using namespace relaxforge;
using io::json;

namespace {

std::tuple<int, std::string, std::string> run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string pretty(const json& j) { return j.dump(1); }

std::string qphp_problem(int p, int h, bool relaxed) {
  auto prob = php_negation_hqfp(p, h);
  return pretty(io::problem(relaxed ? relax(prob) : prob));
}

std::string qphp_dual(int p, int h) { return pretty(io::dual(qphp_dual_witness(p, h))); }

std::string verify_dual_json(const std::string& problem, const std::string& dual) {
  auto prob = io::problem_from(io::parse(problem));
  auto rep = verify_dual(prob, io::dual_from(io::parse(dual)));
  json j{{"schema", io::kSchema},
         {"kind", "dual-report"},
         {"accepted", rep.accepted},
         {"value", io::rational(rep.value)},
         {"psd", certifies_psd(rep.certificate)},
         {"rank", rep.rank},
         {"reason", rep.reason}};
  return pretty(j);
}

std::string verify_primal_json(const std::string& problem, const std::string& solution) {
  auto prob = io::problem_from(io::parse(problem));
  return pretty(io::report(verify_primal(prob, io::primal_from(io::parse(solution)))));
}

std::string protocol_hqfp_json(const std::string& relation, const std::string& structure) {
  auto r = io::relation_from(io::parse(relation));
  auto s = io::structure_from(io::parse(structure));
  return pretty(io::problem(protocol_hqfp(r, s)));
}

std::string equality_protocol_json(int l, int d) { return pretty(io::gamma2(equality_protocol(l, d))); }
std::string equality_relation_json(int d) { return pretty(io::relation(equality_relation(d))); }

std::string verify_gamma2_json(const std::string& protocol, const std::string& relation) {
  auto pi = io::gamma2_from(io::parse(protocol));
  return pretty(io::report(verify_gamma2(pi, io::relation_from(io::parse(relation)))));
}

std::size_t one_leaves(const std::string& protocol, const std::string& relation) {
  auto pi = io::gamma2_from(io::parse(protocol));
  auto mf = mf_decomposition_check(pi, io::relation_from(io::parse(relation)));
  if (!mf.holds) throw Error(ErrorKind::UnverifiedProtocol, "decomposition does not hold");
  return mf.one_leaves;
}

std::string disc_uniform_str(const std::vector<std::vector<int>>& f) { return disc_uniform(f).str(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact verifiers behind the relaxforge command line";

  static py::exception<Error> error(m, "RelaxforgeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object inst = exc(std::string(kind_name(e.kind())) + ": " + e.what());
      inst.attr("kind") = kind_name(e.kind());
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def("run", &run, py::arg("args"), "Dispatch a command line; returns (exit code, stdout, stderr).");
  m.def("qphp_problem", &qphp_problem, py::arg("p"), py::arg("h"), py::arg("relaxed") = true);
  m.def("qphp_dual", &qphp_dual, py::arg("p"), py::arg("h"));
  m.def("verify_dual", &verify_dual_json, py::arg("problem"), py::arg("dual"));
  m.def("verify_primal", &verify_primal_json, py::arg("problem"), py::arg("solution"));
  m.def("protocol_hqfp", &protocol_hqfp_json, py::arg("relation"), py::arg("structure"));
  m.def("equality_protocol", &equality_protocol_json, py::arg("l"), py::arg("d"));
  m.def("equality_relation", &equality_relation_json, py::arg("d"));
  m.def("verify_gamma2", &verify_gamma2_json, py::arg("protocol"), py::arg("relation"));
  m.def("one_leaves", &one_leaves, py::arg("protocol"), py::arg("relation"));
  m.def("disc_uniform", &disc_uniform_str, py::arg("f"));
  m.attr("SCHEMA") = io::kSchema;
}
