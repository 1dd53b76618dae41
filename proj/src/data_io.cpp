#include "fepcd/data_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fepcd/errors.hpp"
#include "fepcd/rng.hpp"
#include "fepcd/trainer.hpp"

namespace fepcd {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t Dataset::n_classes() const {
    const auto& y = require_labels();
    if (y.empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(y.begin(), y.end())) + 1;
}

const std::vector<int>& Dataset::require_labels() const {
    if (!labels) throw PreconditionError("dataset has no labels");
    return *labels;
}

// ---- IDX ------------------------------------------------------------------

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const fs::path& path) {
    if (offset + 4 > bytes.size()) {
        throw TruncatedFileError(path.string() + ": header truncated at byte " + std::to_string(bytes.size()));
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::string& out, std::uint32_t x) {
    out.push_back(static_cast<char>(x >> 24));
    out.push_back(static_cast<char>(x >> 16));
    out.push_back(static_cast<char>(x >> 8));
    out.push_back(static_cast<char>(x));
}

void check_magic(std::uint32_t got, std::uint32_t want, const fs::path& path) {
    if (got != want) {
        throw BadMagicError(path.string() + ": magic " + std::to_string(got) + ", expected " + std::to_string(want));
    }
}

void check_payload(std::size_t have, std::size_t need, const fs::path& path) {
    if (have < need) {
        throw TruncatedFileError(path.string() + ": payload has " + std::to_string(have) + " bytes, header declares " +
                                 std::to_string(need));
    }
    if (have > need) {
        throw FormatError(path.string() + ": " + std::to_string(have - need) + " trailing bytes after payload");
    }
}

}  // namespace

IdxImages read_idx_images(const fs::path& path) {
    const auto bytes = read_bytes(path);
    check_magic(read_be32(bytes, 0, path), kIdxImageMagic, path);
    const std::uint32_t count = read_be32(bytes, 4, path);
    IdxImages out;
    out.rows = read_be32(bytes, 8, path);
    out.cols = read_be32(bytes, 12, path);
    const std::size_t image_size = std::size_t{out.rows} * out.cols;
    check_payload(bytes.size() - 16, std::size_t{count} * image_size, path);
    out.images.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const auto* begin = bytes.data() + 16 + n * image_size;
        out.images.emplace_back(begin, begin + image_size);
    }
    return out;
}

std::vector<std::uint8_t> read_idx_labels(const fs::path& path) {
    const auto bytes = read_bytes(path);
    check_magic(read_be32(bytes, 0, path), kIdxLabelMagic, path);
    const std::uint32_t count = read_be32(bytes, 4, path);
    check_payload(bytes.size() - 8, count, path);
    return {bytes.begin() + 8, bytes.end()};
}

void write_idx_images(const fs::path& path, const IdxImages& images) {
    std::string out;
    put_be32(out, kIdxImageMagic);
    put_be32(out, static_cast<std::uint32_t>(images.images.size()));
    put_be32(out, images.rows);
    put_be32(out, images.cols);
    for (const auto& img : images.images) {
        if (img.size() != std::size_t{images.rows} * images.cols) throw DimensionError("write_idx_images: image size");
        out.append(img.begin(), img.end());
    }
    write_file_atomic(path, out);
}

void write_idx_labels(const fs::path& path, const std::vector<std::uint8_t>& labels) {
    std::string out;
    put_be32(out, kIdxLabelMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.append(labels.begin(), labels.end());
    write_file_atomic(path, out);
}

Dataset load_mnist_idx(const fs::path& images, const std::optional<fs::path>& labels) {
    const IdxImages idx = read_idx_images(images);
    const std::size_t d = std::size_t{idx.rows} * idx.cols;
    Dataset ds;
    ds.features = Matrix(idx.images.size(), d);
    for (std::size_t n = 0; n < idx.images.size(); ++n) {
        std::copy(idx.images[n].begin(), idx.images[n].end(), ds.features.row(n).begin());
    }
    if (labels) {
        const auto y = read_idx_labels(*labels);
        if (y.size() != idx.images.size()) {
            throw CountMismatchError(images.string() + " has " + std::to_string(idx.images.size()) + " images but " +
                                     labels->string() + " has " + std::to_string(y.size()) + " labels");
        }
        ds.labels = std::vector<int>(y.begin(), y.end());
    }
    return ds;
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Dataset load_labeled_csv(const fs::path& path, std::size_t n_features, int label_offset) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t width = n_features;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (width == 0) {
            if (cells.size() < 2) throw CsvError(line_no, "need at least one feature and a label");
            width = cells.size() - 1;
        }
        if (cells.size() != width + 1) {
            throw CsvError(line_no, "expected " + std::to_string(width + 1) + " columns, found " +
                                        std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c <= width; ++c) {
            double x;
            try {
                x = parse_double(cells[c]);
            } catch (const FormatError&) {
                throw CsvError(line_no, "column " + std::to_string(c + 1) + ": cannot parse '" + cells[c] + "'");
            }
            if (c < width) {
                values.push_back(x);
                continue;
            }
            if (std::floor(x) != x || x - label_offset < 0 || x > 1e9) {
                throw CsvError(line_no, "label '" + cells[c] + "' is not a valid class index");
            }
            labels.push_back(static_cast<int>(x) - label_offset);
        }
    }
    if (labels.empty()) throw FormatError(path.string() + ": no data rows");
    Dataset ds;
    ds.features = Matrix(labels.size(), width, std::move(values));
    ds.labels = std::move(labels);
    return ds;
}

Dataset load_isolet_csv(const fs::path& path) {
    Dataset ds = load_labeled_csv(path, kIsoletFeatures, 1);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        if ((*ds.labels)[r] >= 26) throw CsvError(r + 1, "ISOLET label outside 1..26");
    }
    return ds;
}

// ---- preprocessing --------------------------------------------------------

Dataset minmax_normalize(const Dataset& ds) {
    if (ds.features.empty()) throw PreconditionError("minmax_normalize: empty features");
    const std::size_t d = ds.dim();
    NormalizationStats stats{Vector(ds.features.row(0).begin(), ds.features.row(0).end()),
                             Vector(ds.features.row(0).begin(), ds.features.row(0).end())};
    for (std::size_t r = 1; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            stats.min[c] = std::min(stats.min[c], ds.features(r, c));
            stats.max[c] = std::max(stats.max[c], ds.features(r, c));
        }
    }
    return apply_normalization(ds, stats);
}

Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats) {
    if (stats.min.size() != ds.dim() || stats.max.size() != ds.dim()) {
        throw DimensionError("apply_normalization: statistics width");
    }
    Dataset out = ds;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < ds.dim(); ++c) {
            const double range = stats.max[c] - stats.min[c];
            double& x = out.features(r, c);
            x = range > 0.0 ? std::clamp((x - stats.min[c]) / range, 0.0, 1.0) : 0.0;
        }
    }
    out.normalization = stats;
    return out;
}

Dataset take_subset(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream rng(seed, streams::kSubset);
    shuffle(order, rng);
    order.resize(std::min(n, order.size()));
    Dataset out;
    out.features = ds.features.gather_rows(order);
    if (ds.labels) {
        std::vector<int> y;
        y.reserve(order.size());
        for (std::size_t r : order) y.push_back((*ds.labels)[r]);
        out.labels = std::move(y);
    }
    out.normalization = ds.normalization;
    return out;
}

// ---- model files ----------------------------------------------------------

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& text) {
    if (text.empty()) throw FormatError("empty number");
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(text.c_str(), &end);
    // ERANGE on underflow still yields the correctly rounded subnormal.
    if (end != text.c_str() + text.size() || !std::isfinite(x) || (errno == ERANGE && std::abs(x) > 1.0)) {
        throw FormatError("not a finite number: '" + text + "'");
    }
    return x;
}

namespace {

json encode_values(const std::vector<double>& xs) {
    json arr = json::array();
    for (double x : xs) {
        if (!std::isfinite(x)) throw SchemaError("refusing to serialize a non-finite parameter");
        arr.push_back(format_double(x));
    }
    return arr;
}

const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw SchemaError(std::string("missing field '") + name + "'");
    return j.at(name);
}

std::size_t get_count(const json& j, const char* name) {
    const json& v = field(j, name);
    if (!v.is_number_unsigned()) throw SchemaError(std::string("field '") + name + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<double> decode_values(const json& j, const char* name, std::size_t expected) {
    const json& arr = field(j, name);
    if (!arr.is_array()) throw SchemaError(std::string("field '") + name + "' must be an array");
    if (arr.size() != expected) {
        throw SchemaError(std::string("field '") + name + "' has " + std::to_string(arr.size()) +
                          " entries, dimensions require " + std::to_string(expected));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& v : arr) {
        if (!v.is_string()) throw SchemaError(std::string("field '") + name + "' entries must be decimal strings");
        try {
            out.push_back(parse_double(v.get<std::string>()));
        } catch (const FormatError& e) {
            throw SchemaError(std::string("field '") + name + "': " + e.what());
        }
    }
    return out;
}

json encode_rbm(const RbmParams& p, std::size_t label_units) {
    return {{"visible_kind", to_string(p.visible_kind)},
            {"n_visible", p.n_visible()},
            {"n_hidden", p.n_hidden()},
            {"label_units", label_units},
            {"W", encode_values(p.W.data())},
            {"a", encode_values(p.a)},
            {"b", encode_values(p.b)}};
}

RbmParams decode_rbm(const json& j) {
    const json& kind = field(j, "visible_kind");
    if (!kind.is_string()) throw SchemaError("field 'visible_kind' must be a string");
    RbmParams p;
    try {
        p.visible_kind = parse_visible_kind(kind.get<std::string>());
    } catch (const PreconditionError& e) {
        throw SchemaError(e.what());
    }
    const std::size_t nv = get_count(j, "n_visible");
    const std::size_t nh = get_count(j, "n_hidden");
    if (nv == 0 || nh == 0) throw SchemaError("layer dimensions must be positive");
    p.W = Matrix(nv, nh, decode_values(j, "W", nv * nh));
    p.a = decode_values(j, "a", nv);
    p.b = decode_values(j, "b", nh);
    return p;
}

json encode_model(const RbmParams& p) {
    json j = encode_rbm(p, 0);
    j["model"] = "rbm";
    return j;
}

json encode_model(const LabeledRbm& m) {
    json j = encode_rbm(m.params, m.n_classes);
    j["model"] = "rbm";
    return j;
}

json encode_model(const DbnModel& dbn) {
    json layers = json::array();
    for (std::size_t l = 0; l < dbn.layers.size(); ++l) {
        layers.push_back(encode_rbm(dbn.layers[l], l + 1 == dbn.layers.size() ? dbn.top_label_units : 0));
    }
    return {{"model", "dbn"}, {"top_label_units", dbn.top_label_units}, {"layers", layers}};
}

json encode_model(const FeedforwardNet& net) {
    json layers = json::array();
    for (const auto& layer : net.layers) {
        layers.push_back({{"n_in", layer.W.rows()},
                          {"n_out", layer.W.cols()},
                          {"W", encode_values(layer.W.data())},
                          {"b", encode_values(layer.b)}});
    }
    return {{"model", "feedforward"}, {"layers", layers}};
}

}  // namespace

std::string model_to_json(const Model& model) {
    json j = std::visit([](const auto& m) { return encode_model(m); }, model);
    j["format_version"] = kModelFormatVersion;
    return j.dump(1) + "\n";
}

Model model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    const json& version = field(j, "format_version");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
        throw VersionError("model format_version " + version.dump() + ", this build reads " +
                           std::to_string(kModelFormatVersion));
    }
    const json& kind = field(j, "model");
    if (!kind.is_string()) throw SchemaError("field 'model' must be a string");
    const std::string type = kind.get<std::string>();
    try {
        if (type == "rbm") {
            RbmParams p = decode_rbm(j);
            const std::size_t labels = get_count(j, "label_units");
            if (labels == 0) return p;
            LabeledRbm m{std::move(p), labels};
            m.validate();
            return m;
        }
        if (type == "dbn") {
            DbnModel dbn;
            dbn.top_label_units = get_count(j, "top_label_units");
            const json& layers = field(j, "layers");
            if (!layers.is_array()) throw SchemaError("field 'layers' must be an array");
            for (const auto& layer : layers) dbn.layers.push_back(decode_rbm(layer));
            if (!layers.empty() && get_count(layers.back(), "label_units") != dbn.top_label_units) {
                throw SchemaError("top layer label_units disagrees with top_label_units");
            }
            dbn.validate();
            return dbn;
        }
        if (type == "feedforward") {
            FeedforwardNet net;
            const json& layers = field(j, "layers");
            if (!layers.is_array()) throw SchemaError("field 'layers' must be an array");
            for (const auto& layer : layers) {
                const std::size_t n_in = get_count(layer, "n_in");
                const std::size_t n_out = get_count(layer, "n_out");
                net.layers.push_back({Matrix(n_in, n_out, decode_values(layer, "W", n_in * n_out)),
                                      decode_values(layer, "b", n_out)});
            }
            net.validate();
            return net;
        }
    } catch (const DimensionError& e) {
        throw SchemaError(std::string("inconsistent dimensions: ") + e.what());
    }
    throw SchemaError("unknown model type '" + type + "'");
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw FormatError("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void save_model(const fs::path& path, const Model& model) { write_file_atomic(path, model_to_json(model)); }

Model load_model(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace fepcd
