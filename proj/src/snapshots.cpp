#include "fastsvd/snapshots.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fastsvd/rng.hpp"

namespace fastsvd {

Grid2D::Grid2D(std::size_t nx_, std::size_t ny_, double x_min_, double x_max_, double y_min_,
               double y_max_)
    : nx(nx_), ny(ny_), x_min(x_min_), x_max(x_max_), y_min(y_min_), y_max(y_max_) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("Grid2D: nx and ny must be >= 2");
    if (!(x_max > x_min) || !(y_max > y_min)) {
        throw std::invalid_argument("Grid2D: degenerate bounds");
    }
    const double hx = (x_max - x_min) / static_cast<double>(nx - 1);
    const double hy = (y_max - y_min) / static_cast<double>(ny - 1);
    if (std::fabs(hx - hy) > 1e-12 * std::max(hx, hy)) {
        throw std::invalid_argument("Grid2D: spacing must be uniform in both directions");
    }
}

double Grid2D::spacing() const { return (x_max - x_min) / static_cast<double>(nx - 1); }

std::vector<double> cd_analytic_field(const Grid2D& grid, double vx, double vy, double t) {
    if (t < 0.0) throw std::invalid_argument("cd_analytic_field: t must be >= 0");
    const double denom = 1.0 + 4.0 * t;
    const double amp = 1.0 / denom;
    const double cx = vx * t + 0.5;
    const double cy = vy * t + 0.5;
    std::vector<double> field(grid.node_count());
    const double h = grid.spacing();
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y_min + h * static_cast<double>(iy);
        const double dy2 = (y - cy) * (y - cy);
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x_min + h * static_cast<double>(ix);
            const double dx2 = (x - cx) * (x - cx);
            field[iy * grid.nx + ix] = amp * std::exp(-(dx2 + dy2) / denom);
        }
    }
    return field;
}

std::vector<std::vector<double>> lhs_sample(
    const std::vector<std::pair<double, double>>& bounds, std::size_t count,
    std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("lhs_sample: count must be >= 1");
    for (const auto& [lo, hi] : bounds) {
        if (!(hi > lo)) throw std::invalid_argument("lhs_sample: invalid bounds");
    }
    Rng rng(seed);
    std::vector<std::vector<double>> samples(count, std::vector<double>(bounds.size()));
    std::vector<std::size_t> strata(count);
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        std::iota(strata.begin(), strata.end(), 0);
        rng.shuffle(strata);
        const auto [lo, hi] = bounds[d];
        for (std::size_t i = 0; i < count; ++i) {
            const double cell = (static_cast<double>(strata[i]) + rng.uniform()) /
                                static_cast<double>(count);
            samples[i][d] = lo + (hi - lo) * cell;
        }
    }
    return samples;
}

ParameterSet sample_parameters(const std::vector<std::pair<double, double>>& bounds,
                               std::size_t m_train, std::size_t n_test, std::uint64_t seed) {
    auto all = lhs_sample(bounds, m_train + n_test, seed);
    ParameterSet set;
    set.bounds = bounds;
    set.training.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m_train));
    set.testing.assign(all.begin() + static_cast<std::ptrdiff_t>(m_train), all.end());
    return set;
}

SnapshotSet::SnapshotSet(std::size_t n_nodes, std::vector<std::vector<double>> parameters,
                         std::vector<double> times, std::size_t components)
    : n_nodes_(n_nodes),
      components_(components),
      parameters_(std::move(parameters)),
      times_(std::move(times)) {
    if (n_nodes_ == 0) throw std::invalid_argument("SnapshotSet: empty fields");
    if (parameters_.empty() || times_.empty()) {
        throw std::invalid_argument("SnapshotSet: need at least one parameter and time");
    }
    if (components_ == 0) throw std::invalid_argument("SnapshotSet: components must be >= 1");
    const std::size_t dim = parameters_[0].size();
    for (const auto& p : parameters_) {
        if (p.size() != dim) throw std::invalid_argument("SnapshotSet: ragged parameter vectors");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw std::invalid_argument("SnapshotSet: time stamps must be strictly increasing");
        }
    }
    data_.assign(n_nodes_ * n_columns(), 0.0);
}

std::size_t SnapshotSet::column_index(std::size_t component, std::size_t param,
                                      std::size_t time) const {
    return (component * n_params() + param) * n_times() + time;
}

std::span<double> SnapshotSet::column(std::size_t component, std::size_t param,
                                      std::size_t time) {
    return {data_.data() + column_index(component, param, time) * n_nodes_, n_nodes_};
}

std::span<const double> SnapshotSet::column(std::size_t component, std::size_t param,
                                            std::size_t time) const {
    return {data_.data() + column_index(component, param, time) * n_nodes_, n_nodes_};
}

Matrix SnapshotSet::component_matrix(std::size_t component) const {
    Matrix m(n_nodes_, n_params() * n_times());
    for (std::size_t j = 0; j < n_params(); ++j)
        for (std::size_t i = 0; i < n_times(); ++i)
            m.set_col(j * n_times() + i, column(component, j, i));
    return m;
}

SnapshotSet build_snapshot_matrix(const std::vector<std::vector<std::vector<double>>>& fields,
                                  std::vector<std::vector<double>> parameters,
                                  std::vector<double> times) {
    if (fields.size() != parameters.size()) {
        throw std::invalid_argument("build_snapshot_matrix: one field group per parameter required");
    }
    std::size_t n_nodes = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
        if (fields[j].size() != times.size()) {
            throw std::invalid_argument("build_snapshot_matrix: missing (parameter, time) cell");
        }
        for (const auto& f : fields[j]) {
            if (n_nodes == 0) n_nodes = f.size();
            if (f.size() != n_nodes || n_nodes == 0) {
                throw std::invalid_argument("build_snapshot_matrix: inconsistent field length");
            }
        }
    }
    SnapshotSet set(n_nodes, std::move(parameters), std::move(times), 1);
    for (std::size_t j = 0; j < fields.size(); ++j)
        for (std::size_t i = 0; i < fields[j].size(); ++i)
            std::copy(fields[j][i].begin(), fields[j][i].end(), set.column(0, j, i).begin());
    return set;
}

SnapshotSet generate_cd_snapshots(const Grid2D& grid,
                                  const std::vector<std::vector<double>>& parameters,
                                  const std::vector<double>& times) {
    for (const auto& p : parameters) {
        if (p.size() != 2) {
            throw std::invalid_argument("generate_cd_snapshots: velocity pairs expected");
        }
    }
    SnapshotSet set(grid.node_count(), parameters, times, 1);
    for (std::size_t j = 0; j < parameters.size(); ++j) {
        for (std::size_t i = 0; i < times.size(); ++i) {
            auto field = cd_analytic_field(grid, parameters[j][0], parameters[j][1], times[i]);
            std::copy(field.begin(), field.end(), set.column(0, j, i).begin());
        }
    }
    return set;
}

std::vector<std::pair<std::size_t, std::size_t>> partition_times(std::size_t n_times,
                                                                 std::size_t s) {
    if (s == 0 || n_times == 0) throw std::invalid_argument("partition_times: empty partition");
    if (n_times % s != 0) {
        throw std::invalid_argument(
            "partition_times: subset size must divide the time count exactly; pad the series "
            "or choose a different s");
    }
    std::vector<std::pair<std::size_t, std::size_t>> subsets;
    for (std::size_t start = 0; start < n_times; start += s) {
        subsets.emplace_back(start, start + s);
    }
    return subsets;
}

Scalers fit_standardizer(const std::vector<Matrix>& projected) {
    if (projected.empty()) throw std::invalid_argument("fit_standardizer: no components");
    Scalers s;
    for (const Matrix& m : projected) {
        if (m.empty()) throw std::invalid_argument("fit_standardizer: empty training data");
        double mean = 0.0;
        for (double v : m.data()) mean += v;
        mean /= static_cast<double>(m.size());
        double var = 0.0;
        for (double v : m.data()) var += (v - mean) * (v - mean);
        var /= static_cast<double>(m.size());
        s.mean.push_back(mean);
        s.stdev.push_back(std::sqrt(var));
    }
    return s;
}

void fit_normalizer(Scalers& scalers, const Matrix& latents) {
    if (latents.empty()) throw std::invalid_argument("fit_normalizer: empty latent data");
    scalers.z_min.assign(latents.rows(), std::numeric_limits<double>::infinity());
    scalers.z_max.assign(latents.rows(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < latents.cols(); ++j) {
        for (std::size_t i = 0; i < latents.rows(); ++i) {
            scalers.z_min[i] = std::min(scalers.z_min[i], latents(i, j));
            scalers.z_max[i] = std::max(scalers.z_max[i], latents(i, j));
        }
    }
}

Matrix standardized(const Matrix& projected, const Scalers& s, std::size_t component) {
    Matrix out = projected;
    for (double& v : out.data()) v = s.standardize(v, component);
    return out;
}

Matrix normalized_latents(const Matrix& latents, const Scalers& s) {
    if (latents.rows() != s.z_min.size()) {
        throw std::invalid_argument("normalized_latents: latent dimension mismatch");
    }
    Matrix out = latents;
    for (std::size_t j = 0; j < out.cols(); ++j)
        for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) = s.normalize(out(i, j), i);
    return out;
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'V', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot container assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error(std::string("snapshot file truncated while reading ") + what);
    return value;
}

}  // namespace

void write_snapshot_file(const std::string& path, const SnapshotSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_snapshot_file: cannot open " + path);
    out.write(kMagic, 4);
    write_raw<std::uint32_t>(out, kFormatVersion);
    write_raw<std::uint64_t>(out, set.n_nodes());
    write_raw<std::uint64_t>(out, set.n_times());
    write_raw<std::uint64_t>(out, set.n_params());
    write_raw<std::uint64_t>(out, set.components());
    write_raw<std::uint64_t>(out, set.param_dim());
    for (const auto& p : set.parameters())
        for (double v : p) write_raw<double>(out, v);
    for (double t : set.times()) write_raw<double>(out, t);
    out.write(reinterpret_cast<const char*>(set.raw_data().data()),
              static_cast<std::streamsize>(set.raw_data().size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_snapshot_file: write failed for " + path);
}

SnapshotSet read_snapshot_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_snapshot_file: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("read_snapshot_file: bad magic bytes in " + path);
    }
    const auto version = read_raw<std::uint32_t>(in, "version");
    if (version != kFormatVersion) {
        throw std::runtime_error("read_snapshot_file: unsupported format version " +
                                 std::to_string(version));
    }
    const auto n_nodes = read_raw<std::uint64_t>(in, "node count");
    const auto n_times = read_raw<std::uint64_t>(in, "time count");
    const auto n_params = read_raw<std::uint64_t>(in, "parameter count");
    const auto components = read_raw<std::uint64_t>(in, "component count");
    const auto param_dim = read_raw<std::uint64_t>(in, "parameter dimension");

    std::vector<std::vector<double>> parameters(n_params, std::vector<double>(param_dim));
    for (auto& p : parameters)
        for (double& v : p) v = read_raw<double>(in, "parameter value");
    std::vector<double> times(n_times);
    for (double& t : times) t = read_raw<double>(in, "time stamp");

    SnapshotSet set(n_nodes, std::move(parameters), std::move(times), components);
    in.read(reinterpret_cast<char*>(set.raw_data().data()),
            static_cast<std::streamsize>(set.raw_data().size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_snapshot_file: truncated field data in " + path);
    return set;
}

SnapshotSet read_snapshot_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_snapshot_csv: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("read_snapshot_csv: empty file");

    std::vector<double> col_times;
    std::vector<std::vector<double>> col_params;
    std::stringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
        const auto t_pos = cell.find("t=");
        const auto mu_pos = cell.find(";mu=");
        if (t_pos == std::string::npos || mu_pos == std::string::npos) {
            throw std::runtime_error("read_snapshot_csv: header cell must look like t=<v>;mu=<..>");
        }
        col_times.push_back(std::stod(cell.substr(t_pos + 2, mu_pos - t_pos - 2)));
        std::vector<double> mu;
        std::stringstream ms(cell.substr(mu_pos + 4));
        double v;
        while (ms >> v) mu.push_back(v);
        if (mu.empty()) throw std::runtime_error("read_snapshot_csv: empty parameter vector");
        col_params.push_back(std::move(mu));
    }
    const std::size_t n_cols = col_times.size();
    if (n_cols == 0) throw std::runtime_error("read_snapshot_csv: no snapshot columns");

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != n_cols) {
            throw std::runtime_error("read_snapshot_csv: ragged row in " + path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("read_snapshot_csv: no field rows");

    // Group columns per parameter; each group must repeat the same times.
    std::vector<std::vector<double>> parameters;
    std::vector<double> times;
    std::size_t n_times = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (parameters.empty() || col_params[c] != parameters.back()) {
            parameters.push_back(col_params[c]);
            if (parameters.size() == 2 && n_times == 0) n_times = c;
        }
    }
    if (n_times == 0) n_times = n_cols;
    if (n_cols % n_times != 0 || parameters.size() != n_cols / n_times) {
        throw std::runtime_error("read_snapshot_csv: columns not grouped per parameter");
    }
    times.assign(col_times.begin(), col_times.begin() + static_cast<std::ptrdiff_t>(n_times));
    for (std::size_t j = 0; j < parameters.size(); ++j) {
        for (std::size_t i = 0; i < n_times; ++i) {
            if (col_times[j * n_times + i] != times[i]) {
                throw std::runtime_error("read_snapshot_csv: inconsistent time stamps");
            }
        }
    }

    SnapshotSet set(rows.size(), std::move(parameters), std::move(times), 1);
    for (std::size_t j = 0; j < set.n_params(); ++j)
        for (std::size_t i = 0; i < set.n_times(); ++i) {
            auto dest = set.column(0, j, i);
            for (std::size_t r = 0; r < rows.size(); ++r) dest[r] = rows[r][j * set.n_times() + i];
        }
    return set;
}

}  // namespace fastsvd
