#include "hallab/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hallab {

using nlohmann::json;

namespace {

json model_payload(const MagneticModel& model) {
    json j;
    j["dimension"] = model.dim();
    j["backend"] = model.backend == ModelBackend::hofstadter ? "hofstadter"
                                                             : "landau_basis";
    j["field_B"] = model.field_B;
    j["lambda"] = model.lambda;
    if (model.diagonal_positions) {
        j["x1"] = std::vector<double>(model.x1_diag.data(),
                                      model.x1_diag.data() + model.dim());
        j["x2"] = std::vector<double>(model.x2_diag.data(),
                                      model.x2_diag.data() + model.dim());
    }
    std::vector<double> packed;
    packed.reserve(2 * model.dim() * model.dim());
    for (int i = 0; i < model.dim(); ++i) {
        for (int k = 0; k < model.dim(); ++k) {
            packed.push_back(model.hamiltonian(i, k).real());
            packed.push_back(model.hamiltonian(i, k).imag());
        }
    }
    j["hamiltonian_row_major_re_im"] = std::move(packed);
    j["content_hash"] = model.content_hash();
    return j;
}

}  // namespace

void save_model_json(const MagneticModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io: cannot open " + path.string());
    out << model_payload(model).dump(2) << "\n";
}

void save_model_binary(const MagneticModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("io: cannot open " + path.string());
    const auto bytes = model.packed_bytes();
    const char magic[8] = {'h', 'a', 'l', 'm', 'o', 'd', '0', '1'};
    out.write(magic, sizeof(magic));
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io: cannot open " + path.string());
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "\n");
    }
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

void write_svg_plot(const std::vector<SvgSeries>& series, bool loglog,
                    const std::string& title, const std::filesystem::path& path) {
    const int width = 640, height = 440, pad = 56;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto tx = [&](double v) { return loglog ? std::log10(v) : v; };
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (loglog && (s.xs[i] <= 0 || s.ys[i] <= 0)) continue;
            xmin = std::min(xmin, tx(s.xs[i]));
            xmax = std::max(xmax, tx(s.xs[i]));
            ymin = std::min(ymin, tx(s.ys[i]));
            ymax = std::max(ymax, tx(s.ys[i]));
        }
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    auto px = [&](double v) {
        return pad + (tx(v) - xmin) / (xmax - xmin) * (width - 2 * pad);
    };
    auto py = [&](double v) {
        return height - pad - (tx(v) - ymin) / (ymax - ymin) * (height - 2 * pad);
    };

    static const char* colors[] = {"#1f6fb2", "#c0392b", "#27743b", "#8e44ad"};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io: cannot open " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='" << height << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
        << "font-family='monospace' font-size='14'>" << title << "</text>\n";
    out << "<rect x='" << pad << "' y='" << pad << "' width='" << width - 2 * pad
        << "' height='" << height - 2 * pad
        << "' fill='none' stroke='#444' stroke-width='1'/>\n";
    int c = 0;
    for (const auto& s : series) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (loglog && (s.xs[i] <= 0 || s.ys[i] <= 0)) continue;
            pts << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
        }
        const char* color = colors[c % 4];
        out << "<polyline fill='none' stroke='" << color
            << "' stroke-width='1.5' points='" << pts.str() << "'/>\n";
        out << "<text x='" << width - pad << "' y='" << pad + 16 * (c + 1)
            << "' text-anchor='end' font-family='monospace' font-size='12' fill='"
            << color << "'>" << s.label << "</text>\n";
        ++c;
    }
    out << "</svg>\n";
}

// ------------------------------- eigen cache -------------------------------

EigenCache::EigenCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
    if (dir_) std::filesystem::create_directories(*dir_);
}

EigenCache EigenCache::from_environment() {
    if (const char* env = std::getenv("HALLAB_CACHE_DIR")) {
        return EigenCache(std::filesystem::path(env));
    }
    return EigenCache(std::nullopt);
}

namespace {

std::filesystem::path cache_file(const std::filesystem::path& dir, std::uint64_t key) {
    std::ostringstream name;
    name << "eig_" << std::hex << key << ".bin";
    return dir / name.str();
}

}  // namespace

std::optional<EigenSystem> EigenCache::load(std::uint64_t key) const {
    if (!dir_) return std::nullopt;
    const auto path = cache_file(*dir_, key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::int64_t d = 0;
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    if (!in || d <= 0 || d > (1 << 20)) return std::nullopt;
    EigenSystem eig;
    eig.energies.resize(d);
    eig.vectors.resize(d, d);
    in.read(reinterpret_cast<char*>(eig.energies.data()),
            static_cast<std::streamsize>(d * sizeof(double)));
    in.read(reinterpret_cast<char*>(eig.vectors.data()),
            static_cast<std::streamsize>(2 * d * d * sizeof(double)));
    double residual = 0.0;
    in.read(reinterpret_cast<char*>(&residual), sizeof(residual));
    if (!in) return std::nullopt;
    eig.residual = residual;
    return eig;
}

void EigenCache::store(std::uint64_t key, const EigenSystem& eig) const {
    if (!dir_) return;
    const auto path = cache_file(*dir_, key);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) return;
        const std::int64_t d = eig.dim();
        out.write(reinterpret_cast<const char*>(&d), sizeof(d));
        out.write(reinterpret_cast<const char*>(eig.energies.data()),
                  static_cast<std::streamsize>(d * sizeof(double)));
        out.write(reinterpret_cast<const char*>(eig.vectors.data()),
                  static_cast<std::streamsize>(2 * d * d * sizeof(double)));
        out.write(reinterpret_cast<const char*>(&eig.residual), sizeof(double));
    }
    std::filesystem::rename(tmp, path);
}

EigenSystem diagonalize_cached(const MagneticModel& model, const EigenCache& cache) {
    const std::uint64_t key = model.content_hash();
    if (auto hit = cache.load(key)) return *hit;
    EigenSystem eig = diagonalize(model);
    cache.store(key, eig);
    return eig;
}

}  // namespace hallab
