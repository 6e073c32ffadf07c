#include "tpmoe/dataset.hpp"

#include "tpmoe/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace tpmoe
{

Standardization Standardization::identity(Eigen::Index dim)
{
    return {Vector::Zero(dim), Vector::Ones(dim), 0.0, 1.0};
}

Dataset Dataset::restored() const
{
    Dataset out = *this;
    for (Eigen::Index d = 0; d < X.cols(); ++d)
        out.X.col(d) = X.col(d).array() * transform.x_scale(d)
                       + transform.x_mean(d);
    out.y = y.array() * transform.y_scale + transform.y_mean;
    out.transform = Standardization::identity(X.cols());
    return out;
}

namespace
{

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        s = s.substr(1, s.size() - 2);
    return s;
}

double parse_number(const std::string& cell, std::size_t row,
                    const std::string& column)
{
    const std::string text = trim(cell);
    if (text.empty())
    {
        std::ostringstream msg;
        msg << "row " << row << ", column '" << column << "': empty cell";
        throw InputError(msg.str());
    }
    double value = 0.0;
    const char* first = text.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()
        || !std::isfinite(value))
    {
        std::ostringstream msg;
        msg << "row " << row << ", column '" << column
            << "': not a number: '" << text << "'";
        throw InputError(msg.str());
    }
    return value;
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvSchema& schema,
                  const std::string& name)
{
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;

    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line()) throw InputError("CSV '" + name + "' is empty");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const std::vector<std::string> header = split_line(line);
    std::ptrdiff_t t_col = -1, y_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c)
    {
        const std::string h = trim(header[c]);
        if (h == schema.time_column) t_col = static_cast<std::ptrdiff_t>(c);
        if (h == schema.value_column) y_col = static_cast<std::ptrdiff_t>(c);
    }
    if (t_col < 0)
        throw InputError("CSV '" + name + "': no column named '"
                         + schema.time_column + "'");
    if (y_col < 0)
        throw InputError("CSV '" + name + "': no column named '"
                         + schema.value_column + "'");

    std::vector<double> ts, ys;
    while (next_line())
    {
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
        {
            std::ostringstream msg;
            msg << "row " << row << ": expected " << header.size()
                << " cells, found " << cells.size();
            throw InputError(msg.str());
        }
        ts.push_back(parse_number(cells[static_cast<std::size_t>(t_col)], row,
                                  schema.time_column));
        ys.push_back(parse_number(cells[static_cast<std::size_t>(y_col)], row,
                                  schema.value_column));
    }

    Dataset ds;
    ds.name = name;
    const auto n = static_cast<Eigen::Index>(ys.size());
    ds.X = Eigen::Map<const Vector>(ts.data(), n);
    ds.y = Eigen::Map<const Vector>(ys.data(), n);
    ds.transform = Standardization::identity(1);
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open data file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), schema, path.stem().string());
}

namespace
{

std::pair<double, double> mean_and_sd(const Eigen::Ref<const Vector>& v,
                                      const char* what)
{
    const double mean = v.mean();
    const double var = (v.array() - mean).square().mean();
    if (!(var > 0.0))
        throw InputError(std::string("standardize: ") + what
                         + " has zero variance");
    return {mean, std::sqrt(var)};
}

Dataset apply(const Dataset& ds, const Standardization& t)
{
    Dataset out = ds;
    for (Eigen::Index d = 0; d < ds.dim(); ++d)
        out.X.col(d) = (ds.X.col(d).array() - t.x_mean(d)) / t.x_scale(d);
    out.y = (ds.y.array() - t.y_mean) / t.y_scale;
    // Compose with whatever was applied before.
    Standardization composed = t;
    for (Eigen::Index d = 0; d < ds.dim(); ++d)
    {
        composed.x_mean(d) = ds.transform.x_mean(d)
                             + ds.transform.x_scale(d) * t.x_mean(d);
        composed.x_scale(d) = ds.transform.x_scale(d) * t.x_scale(d);
    }
    composed.y_mean = ds.transform.y_mean + ds.transform.y_scale * t.y_mean;
    composed.y_scale = ds.transform.y_scale * t.y_scale;
    out.transform = composed;
    return out;
}

Dataset standardize_rows(const Dataset& ds, Eigen::Index rows)
{
    if (rows < 2)
        throw InputError("standardize: need at least two observations");
    Standardization t = Standardization::identity(ds.dim());
    for (Eigen::Index d = 0; d < ds.dim(); ++d)
        std::tie(t.x_mean(d), t.x_scale(d))
            = mean_and_sd(ds.X.col(d).head(rows), "input column");
    std::tie(t.y_mean, t.y_scale) = mean_and_sd(ds.y.head(rows), "output column");
    return apply(ds, t);
}

}  // namespace

Dataset standardize(const Dataset& ds)
{
    return standardize_rows(ds, ds.size());
}

Dataset standardize_prefix(const Dataset& ds, Eigen::Index prefix)
{
    return standardize_rows(ds, std::min(prefix, ds.size()));
}

}  // namespace tpmoe
