#pragma once

#include "tpmoe/kernel.hpp"

#include <filesystem>
#include <string>

namespace tpmoe
{

/// Which CSV columns hold the input (time) and the output.
struct CsvSchema
{
    std::string time_column = "t";
    std::string value_column = "y";
};

/// Affine map applied to a dataset: standardized = (raw - mean) / scale.
struct Standardization
{
    Vector x_mean;
    Vector x_scale;
    double y_mean = 0.0;
    double y_scale = 1.0;

    static Standardization identity(Eigen::Index dim);
};

struct Dataset
{
    std::string name;
    InputMatrix X;
    Vector y;
    Standardization transform = Standardization::identity(1);

    Eigen::Index size() const noexcept { return y.size(); }
    Eigen::Index dim() const noexcept { return X.cols(); }

    /// Undo the recorded standardization.
    Dataset restored() const;
};

/// Parse a headed CSV (UTF-8, LF or CRLF). Row order is preserved. Errors
/// name the offending row (the header is row 1) and column.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Same, from in-memory text.
Dataset parse_csv(const std::string& text, const CsvSchema& schema,
                  const std::string& name = "inline");

/// Shift and scale every column to mean 0 and population variance 1, using
/// all rows. Requires N >= 2; a constant column is an InputError.
Dataset standardize(const Dataset& ds);

/// Standardize using only the first `prefix` rows' statistics, so no later
/// observation influences the transform.
Dataset standardize_prefix(const Dataset& ds, Eigen::Index prefix);

}  // namespace tpmoe
