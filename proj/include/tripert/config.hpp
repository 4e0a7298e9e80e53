#pragma once

#include "tripert/model.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <string>

namespace tripert {

/// A parsed model file.
///
/// Format: one `key=value` per line, `#` starts a comment. Keys:
///
///   name                  free text
///   a.family              lognormal | constant | discrete | shifted_square
///     lognormal           a.mu, a.sigma2
///     constant            a.c
///     discrete            a.values, a.probs (comma separated)
///     shifted_square      a.lambda, a.shift        (a = lambda Z^2 + shift)
///   y.family              constant | gaussian | affine_log_a
///     constant            y.c
///     gaussian            y.mean, y.var
///     affine_log_a        y.lambda, y.offset       (offset may be `rho`)
///   b1.family, b2.family  constant | gaussian | exponential
///     constant            bK.c
///     gaussian            bK.mean, bK.var
///     exponential         bK.rate
///   b.symmetrize          true | false (default false)
///
/// Unknown keys, keys that do not belong to the selected family, duplicate
/// keys and missing keys are all ConfigError.
struct ModelConfig {
    std::string name;
    CoefficientLaw law;
};

/// The shared `key=value` reader: comments stripped, blank lines skipped,
/// duplicate keys rejected.
std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& source);

ModelConfig parse_model(std::istream& in, const std::string& source = "<input>");
ModelConfig parse_model_string(const std::string& text);
ModelConfig load_model(const std::filesystem::path& path);

/// Inverse of parse_model for built-in families. Throws ConfigError for
/// custom a families, which have no file representation.
std::string to_config(const CoefficientLaw& law, const std::string& name = "");

}  // namespace tripert
