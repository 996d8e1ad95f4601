#pragma once

#include <json.hpp>

#include "metvol/cocycles.hpp"
#include "metvol/met.hpp"
#include "metvol/spectral.hpp"

namespace metvol {

using Json = nlohmann::json;

// Matrices serialize row-major as arrays of rows; +-inf round-trips as the
// strings "inf" / "-inf".

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json extended_to_json(double x);
double extended_from_json(const Json& j);

Json to_json(const NormSpec& n);
NormSpec norm_from_json(const Json& j);

Json to_json(const AmbientSpace& s);
AmbientSpace space_from_json(const Json& j);

Json to_json(const Subspace& s);
Subspace subspace_from_json(const Json& j);

Json to_json(const VolumeEstimate& v);
VolumeEstimate volume_from_json(const Json& j);

Json to_json(const ExponentReport& r);
ExponentReport report_from_json(const Json& j);

Json to_json(const Filtration& f);
Json to_json(const SingularProfile& p);

Json to_json(const ScalarLaw& law);
ScalarLaw law_from_json(const Json& j);

Json to_json(const CocycleSpec& spec);
CocycleSpec cocycle_from_json(const Json& j);

}  // namespace metvol
