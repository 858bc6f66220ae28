#include "xmorph/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xmorph/error.hpp"

namespace xmorph {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Skips whitespace and # comments in a NetPBM header, tracking byte offsets
// for error messages.
struct PnmCursor {
    const std::string& buf;
    std::size_t pos = 0;

    void skip_space_and_comments() {
        while (pos < buf.size()) {
            char c = buf[pos];
            if (c == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    long read_int(const std::filesystem::path& path, const char* what) {
        skip_space_and_comments();
        if (pos >= buf.size())
            throw LoadError(path.string() + ": truncated header, expected " +
                            std::string(what) + " at byte " + std::to_string(pos));
        long value = 0;
        auto [p, ec] = std::from_chars(buf.data() + pos, buf.data() + buf.size(), value);
        if (ec != std::errc() || p == buf.data() + pos)
            throw LoadError(path.string() + ": expected " + std::string(what) +
                            " at byte " + std::to_string(pos));
        pos = static_cast<std::size_t>(p - buf.data());
        return value;
    }
};

} // namespace

Orientation parse_orientation(std::string_view token) {
    const std::string t = lower(token);
    if (t == "axial") return Orientation::axial;
    if (t == "sagittal") return Orientation::sagittal;
    if (t == "coronal") return Orientation::coronal;
    if (t == "unknown" || t.empty()) return Orientation::unknown;
    throw LoadError("unknown orientation token: '" + std::string(token) + "'");
}

std::string_view orientation_name(Orientation o) {
    switch (o) {
        case Orientation::axial: return "axial";
        case Orientation::sagittal: return "sagittal";
        case Orientation::coronal: return "coronal";
        default: return "unknown";
    }
}

GrayImage load_pgm(const std::filesystem::path& path) {
    const std::string buf = read_all(path);
    if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '2' && buf[1] != '5'))
        throw LoadError(path.string() + ": malformed magic number at byte 0 (want P2 or P5)");
    const bool binary = buf[1] == '5';

    PnmCursor cur{buf, 2};
    const long w = cur.read_int(path, "width");
    const long h = cur.read_int(path, "height");
    const long maxval = cur.read_int(path, "maxval");
    if (w < 1 || h < 1)
        throw LoadError(path.string() + ": bad dimensions " + std::to_string(w) + "x" +
                        std::to_string(h));
    if (maxval < 1 || maxval > 255)
        throw LoadError(path.string() + ": unsupported maxval " + std::to_string(maxval) +
                        " at byte " + std::to_string(cur.pos) + " (must be <= 255)");

    GrayImage img = GrayImage::create(static_cast<int>(w), static_cast<int>(h));
    const std::size_t n = img.pixels.size();

    if (binary) {
        // exactly one whitespace byte separates the header from the payload
        if (cur.pos >= buf.size() ||
            !std::isspace(static_cast<unsigned char>(buf[cur.pos])))
            throw LoadError(path.string() + ": missing payload separator at byte " +
                            std::to_string(cur.pos));
        ++cur.pos;
        if (buf.size() - cur.pos < n)
            throw LoadError(path.string() + ": truncated payload at byte " +
                            std::to_string(buf.size()) + " (need " +
                            std::to_string(cur.pos + n) + " bytes)");
        std::memcpy(img.pixels.data(), buf.data() + cur.pos, n);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const long v = cur.read_int(path, "pixel value");
            if (v < 0 || v > maxval)
                throw LoadError(path.string() + ": pixel value " + std::to_string(v) +
                                " out of range at byte " + std::to_string(cur.pos));
            img.pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

BinaryMask load_mask(const std::filesystem::path& path) {
    const GrayImage img = load_pgm(path);
    BinaryMask mask = BinaryMask::create(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) mask.bits[i] = img.pixels[i] > 0;
    return mask;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw LoadError("write failed: " + path.string());
}

void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path) {
    GrayImage img = GrayImage::create(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) img.pixels[i] = mask.bits[i] ? 255 : 0;
    write_pgm(img, path);
}

std::vector<SampleManifest> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw LoadError(path.string() + ": empty manifest");
    const auto header = split_csv(line);
    const std::vector<std::string> expected = {"sample_id", "image",
                                               "mask",      "orientation",
                                               "label",     "deep_key"};
    if (header != expected)
        throw LoadError(path.string() +
                        ": bad header, expected sample_id,image,mask,orientation,label,deep_key");

    std::vector<SampleManifest> rows;
    std::unordered_map<std::string, int> seen; // id -> first line number
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 6)
            throw LoadError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 6 fields, got " + std::to_string(f.size()));
        SampleManifest m;
        m.sample_id = f[0];
        if (m.sample_id.empty())
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": empty sample_id");
        auto [it, fresh] = seen.emplace(m.sample_id, line_no);
        if (!fresh)
            throw LoadError(path.string() + ": duplicate sample_id '" + m.sample_id +
                            "' on lines " + std::to_string(it->second) + " and " +
                            std::to_string(line_no));
        m.image_path = f[1];
        m.mask_path = f[2];
        try {
            m.orientation = parse_orientation(f[3]);
        } catch (const LoadError& e) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!f[4].empty()) m.label = f[4];
        if (!f[5].empty()) m.deep_key = f[5];
        rows.push_back(std::move(m));
    }
    return rows;
}

std::span<const double> DeepFeatureTable::row(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw LoadError("deep feature key not found: '" + key + "'");
    return {data_.data() + it->second * width_, width_};
}

DeepFeatureTable load_deep_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line).empty())
        throw LoadError(path.string() + ": no header");
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "key")
        throw LoadError(path.string() + ": header must be key,f0,f1,...");

    DeepFeatureTable table;
    table.width_ = header.size() - 1;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size())
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": ragged row, " +
                            std::to_string(f.size()) + " fields vs " +
                            std::to_string(header.size()) + " in header");
        const std::string& key = f[0];
        if (table.index_.count(key))
            throw LoadError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate key '" + key + "'");
        table.index_.emplace(key, table.keys_.size());
        table.keys_.push_back(key);
        for (std::size_t c = 1; c < f.size(); ++c) {
            double v = 0;
            auto [p, ec] = std::from_chars(f[c].data(), f[c].data() + f[c].size(), v);
            if (ec != std::errc() || p != f[c].data() + f[c].size() || !std::isfinite(v))
                throw LoadError(path.string() + ":" + std::to_string(line_no) +
                                ": non-numeric cell '" + f[c] + "' in column " +
                                std::to_string(c));
            table.data_.push_back(v);
        }
    }
    return table;
}

const std::array<std::string, kTsfCount>& tsf_column_names() {
    static const std::array<std::string, kTsfCount> names = {
        "irregularity",     "roughness",         "area",
        "mean_radius",      "mean_local_entropy", "weight_range",
        "enhancement_factor", "fractal_dimension", "approx_entropy",
        "sample_entropy",   "perm_entropy",      "lyapunov",
        "rei",              "d_skull",           "contact_ratio",
        "mls",              "iw_irregularity",   "iw_roughness",
    };
    return names;
}

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_feature_csv(std::span<const FeatureRecord> records,
                       const std::filesystem::path& path) {
    if (records.empty()) throw PreconditionError("write_feature_csv: no records");
    std::vector<const FeatureRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const FeatureRecord* a, const FeatureRecord* b) {
                  return a->sample_id < b->sample_id;
              });

    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    out << "sample_id";
    for (const auto& n : tsf_column_names()) out << "," << n;
    out << "\n";
    for (const FeatureRecord* r : sorted) {
        out << r->sample_id;
        for (int f = 0; f < kTsfCount; ++f) {
            out << ",";
            if (r->present[f]) out << format_g6(r->values[f]);
        }
        out << "\n";
    }
    if (!out) throw LoadError("write failed: " + path.string());
}

std::vector<FeatureRecord> load_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw LoadError(path.string() + ": empty file");
    const auto header = split_csv(line);
    const auto& names = tsf_column_names();
    if (header.size() != 1 + names.size() || header[0] != "sample_id")
        throw LoadError(path.string() + ": unexpected feature CSV header");
    for (std::size_t i = 0; i < names.size(); ++i)
        if (header[i + 1] != names[i])
            throw LoadError(path.string() + ": column " + std::to_string(i + 1) +
                            " is '" + header[i + 1] + "', expected '" + names[i] + "'");

    std::vector<FeatureRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 1 + names.size())
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
        FeatureRecord rec;
        rec.sample_id = f[0];
        for (int c = 0; c < kTsfCount; ++c) {
            const std::string& cell = f[c + 1];
            if (cell.empty()) continue;
            double v = 0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size())
                throw LoadError(path.string() + ":" + std::to_string(line_no) +
                                ": bad number '" + cell + "'");
            rec.set(static_cast<TsfFeature>(c), v);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace xmorph
