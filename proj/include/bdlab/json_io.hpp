#pragma once

#include <string>

#include <json.hpp>

#include "bdlab/counterexample.hpp"
#include "bdlab/dichotomy.hpp"
#include "bdlab/factorization.hpp"
#include "bdlab/l1_geometry.hpp"
#include "bdlab/measure.hpp"
#include "bdlab/operator.hpp"
#include "bdlab/random_ops.hpp"

// JSON encodings of inputs (spaces, operators, random-matrix specs) and of
// every certificate the CLI reports.  Decoding failures raise
// Error(usage) so the CLI maps them to exit code 2.
namespace bdlab::json_io {

using Json = nlohmann::json;

Json read_file(const std::string& path);
Json parse(const std::string& text);
void write_file(const std::string& path, const Json& value);

Json to_json(const AtomSpace& space);
AtomSpace atom_space_from_json(const Json& j);
Json to_json(const L1Fun& f);
L1Fun l1fun_from_json(const Json& j);
Json to_json(const AtomSet& set);
AtomSet atom_set_from_json(const Json& j);
Json to_json(const DomainShape& shape);
DomainShape domain_from_json(const Json& j);
Json to_json(const FiniteOperator& op);
FiniteOperator operator_from_json(const Json& j);
Json to_json(const ExtremePoint& point);
Json to_json(const SymmetricDistribution& law);
SymmetricDistribution distribution_from_json(const Json& j);
Json to_json(const SymmetricRandomMatrixSpec& spec);
SymmetricRandomMatrixSpec random_spec_from_json(const Json& j);

Json to_json(const NormResult& r);
Json to_json(const L1EquivalenceCert& c);
Json to_json(const LatticeBoundCert& c);
Json to_json(const DisjointFamily& f);
Json to_json(const EscapeTrace& t);
Json to_json(const EscapeResult& r);
Json to_json(const SelectionResult& r);
Json to_json(const ConflictBound& c);
Json to_json(const JamesResult& r);
Json to_json(const ProjectionCert& c);
Json to_json(const FactorizationCert& c);
Json to_json(const Pi2Lower& p);
Json to_json(const ColumnFunction& f);
Json to_json(const CaseSplit& c);
Json to_json(const DisjointifyResult& d);
Json to_json(const HjResult& r);
Json to_json(const LevyResult& r);
Json to_json(const KhintchineResult& r);
Json to_json(const SquareFunctionResult& r);
Json to_json(const counterexample::TxLower& t);
Json to_json(const counterexample::AdmissibleMax& a);
Json to_json(const counterexample::PerturbationGap& g);
Json to_json(const counterexample::DiagGap& g);
Json to_json(const counterexample::BinomReport& b);

}  // namespace bdlab::json_io
