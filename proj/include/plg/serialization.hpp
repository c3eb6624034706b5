#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "plg/ce_learn.hpp"
#include "plg/lds.hpp"
#include "plg/plg_model.hpp"

namespace plg {

/// Malformed input file or document.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decimal with 17 significant digits; parses back to the same double.
std::string format_real(double value);

/// {"n", "mu0", "Sigma0" (row-major), "g", "C", "sigma2"}
std::string plg_to_json(const PlgParams& params);
PlgParams plg_from_json(const std::string& text);

/// {"n", "A" (row-major), "H", "Q", "R", "x1hat", "P1"}
std::string lds_to_json(const LdsParams& params);
LdsParams lds_from_json(const std::string& text);

/// {"gamma_condition", "umt_ok", "psd_violation"}; an infinite condition number
/// is written as null.
std::string diagnostics_to_json(const CeDiagnostics& diag);

using Model = std::variant<PlgParams, LdsParams>;

/// Dispatches on the keys present: "A" means an LDS, "g" a PLG.
Model model_from_json(const std::string& text);

/// Header `trace,t,y`, one row per observation, sorted by (trace, t);
/// trace counts from 0 and t from 1.
void write_traces_csv(std::ostream& out, const std::vector<Trace>& traces);
std::vector<Trace> read_traces_csv(std::istream& in);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace plg
