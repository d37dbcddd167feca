// io.hpp — snapshots, CSV/JSON/SVG writers, eigensystem cache
#pragma once

#include "hallab/common.hpp"
#include "hallab/model.hpp"
#include "hallab/spectral.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hallab {

// ------------------------------- snapshots ---------------------------------

// JSON container: dimension, coordinates, Hermitian matrix packed row-major
// as [re, im] pairs.
void save_model_json(const MagneticModel& model, const std::filesystem::path& path);
// Raw little-endian binary twin of the JSON snapshot.
void save_model_binary(const MagneticModel& model, const std::filesystem::path& path);

// ----------------------------------- CSV -----------------------------------

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const CsvTable& table, const std::filesystem::path& path);

// ----------------------------------- SVG -----------------------------------

// Self-contained log-log (or linear) polyline plot; plotting is a
// convenience, the CSV is the contract.
struct SvgSeries {
    std::string label;
    std::vector<double> xs, ys;
};
void write_svg_plot(const std::vector<SvgSeries>& series, bool loglog,
                    const std::string& title, const std::filesystem::path& path);

// ------------------------------- eigen cache -------------------------------

// Content-hash keyed store of eigensystems. Directory resolution order:
// explicit argument, HALLAB_CACHE_DIR, none (disabled).
class EigenCache {
  public:
    explicit EigenCache(std::optional<std::filesystem::path> dir);
    static EigenCache from_environment();

    bool enabled() const { return dir_.has_value(); }
    std::optional<EigenSystem> load(std::uint64_t key) const;
    void store(std::uint64_t key, const EigenSystem& eig) const;

  private:
    std::optional<std::filesystem::path> dir_;
};

// Diagonalize with cache assist; hits and misses produce identical results.
EigenSystem diagonalize_cached(const MagneticModel& model, const EigenCache& cache);

}  // namespace hallab
