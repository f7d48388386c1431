#pragma once

#include <iosfwd>
#include <string>

#include "gencont/bvp1d.hpp"
#include "gencont/constitutive.hpp"
#include "gencont/modes.hpp"

namespace gencont {

/// Reads a `name = value` parameter file ('#' starts a comment). Exactly the
/// thirteen moduli keys must appear: mu_e, lambda_e, mu_micro, lambda_micro,
/// mu_c, mu, L_c, a1, a2, a3, alpha1, alpha2, alpha3. Unknown, duplicate, or
/// missing keys raise IoError naming the offender.
IsotropicModuli read_params(const std::string& path);
IsotropicModuli parse_params(std::istream& in, const std::string& origin);
void write_params(std::ostream& os, const IsotropicModuli& p);

/// Returns `path` if it exists; otherwise, when $GENCONT_PARAMS_DIR is set
/// and contains the file, the resolved location inside that directory.
std::string resolve_params_path(const std::string& path);

/// Shortest representation that round trips a double (17 significant digits).
std::string format_full(double v);

/// CSV with header model,test,bc,L_c,stiffness and one row per length.
void write_curve_csv(std::ostream& os, const StiffnessCurve& curve);

/// CSV with header x2,<profile names> and one row per node.
void write_profiles_csv(std::ostream& os, const Solution1D& sol);

/// Serialized JSON reports (pretty printed, stable key order).
std::string mode_report_json(const ModeReport& rep);
std::string redundancy_json(const RedundancyReport& rep);

}  // namespace gencont
