#pragma once

#include <string>

#include "json.hpp"

#include "relaxforge/conic.hpp"
#include "relaxforge/gamma2.hpp"
#include "relaxforge/protocol.hpp"
#include "relaxforge/qphp.hpp"
#include "relaxforge/quantum_lab.hpp"
#include "relaxforge/report.hpp"

namespace relaxforge::io {

using nlohmann::json;

inline constexpr int kSchema = 1;

// Throws Parse with the byte offset on malformed text.
json parse(const std::string& text);
json read_file(const std::string& path);
// Checks "schema" and "kind" of a top-level artifact.
void expect_kind(const json& j, const std::string& kind);

json rational(const Rational& q);
Rational rational_from(const json& j);
// Rational scalars are plain strings; irrational ones list [coefficient, radicand] terms.
json scalar(const Scalar& s);
Scalar scalar_from(const json& j);
// Exact canonical string plus a decimal annotation.
json scalar_report(const Scalar& s);

json space(const InnerProductSpace& sp);
SpacePtr space_from(const json& j);
json vec(const Vec& v);
Vec vec_from(const json& j, const SpacePtr& sp);

json structure(const ProtocolStructure& s);
ProtocolStructure structure_from(const json& j);
json relation(const RelationSpec& r);
RelationSpec relation_from(const json& j);

json problem(const FeasibilityProblem& p);
FeasibilityProblem problem_from(const json& j);
json dual(const DualWitness& w);
DualWitness dual_from(const json& j);
json primal(const PrimalSolution& s);
PrimalSolution primal_from(const json& j);
json sos(const Degree2SoSCert& c);
Degree2SoSCert sos_from(const json& j);
json family(const PigeonFamily& f);
PigeonFamily family_from(const json& j);

json gamma2(const Gamma2Protocol& pi);
Gamma2Protocol gamma2_from(const json& j);
json qlab(const QLabProtocol& pi);
QLabProtocol qlab_from(const json& j);

json report(const VerificationReport& r);
VerificationReport report_from(const json& j);

}  // namespace relaxforge::io
