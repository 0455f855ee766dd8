#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csd/volume.hpp"
#include "json.hpp"

namespace csd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct NrrdHeader {
    Vec3i dims{0, 0, 0};
    Vec3 spacing{1, 1, 1};
    std::string type;
    std::string encoding = "raw";
    std::string endian = "little";
    std::string data_file;       // detached header when set
    std::size_t header_end = 0;  // offset of attached payload
};

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    std::vector<char> buf(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(buf.data(), std::streamsize(buf.size()));
    return buf;
}

std::vector<char> gzip_decompress(const char* src, std::size_t n, std::size_t expected) {
    std::vector<char> out(expected);
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw Error("zlib init failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(src));
    zs.avail_in = uInt(n);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = uInt(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error("gzip payload corrupt or truncated");
    if (zs.total_out != expected)
        throw Error("gzip payload decompressed to " + std::to_string(zs.total_out) +
                    " bytes, header expects " + std::to_string(expected));
    return out;
}

std::vector<char> gzip_compress(const char* src, std::size_t n) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error("zlib init failed");
    std::vector<char> out(deflateBound(&zs, uLong(n)));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(src));
    zs.avail_in = uInt(n);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = uInt(out.size());
    int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error("gzip compression failed");
    out.resize(zs.total_out);
    return out;
}

NrrdHeader parse_nrrd_header(const std::vector<char>& buf, const std::string& path) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        if (pos >= buf.size()) return {};
        std::size_t e = pos;
        while (e < buf.size() && buf[e] != '\n') ++e;
        std::string line(buf.begin() + std::ptrdiff_t(pos), buf.begin() + std::ptrdiff_t(e));
        pos = e + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    std::string magic = next_line();
    if (magic.rfind("NRRD", 0) != 0) throw Error("not a NRRD file: " + path);

    NrrdHeader h;
    int dimension = 0;
    bool have_sizes = false;
    while (pos < buf.size()) {
        std::string line = next_line();
        if (line.empty()) break;  // blank line terminates the header
        if (line[0] == '#') continue;
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = to_lower(trim(line.substr(0, colon)));
        std::string value = trim(line.substr(colon + 1));
        if (!value.empty() && value[0] == '=') value = trim(value.substr(1));  // key:=value form

        if (key == "dimension") {
            dimension = std::stoi(value);
        } else if (key == "sizes") {
            std::istringstream iss(value);
            iss >> h.dims.x >> h.dims.y >> h.dims.z;
            have_sizes = true;
        } else if (key == "type") {
            h.type = to_lower(value);
        } else if (key == "encoding") {
            h.encoding = to_lower(value);
        } else if (key == "endian") {
            h.endian = to_lower(value);
        } else if (key == "spacings") {
            std::istringstream iss(value);
            iss >> h.spacing.x >> h.spacing.y >> h.spacing.z;
        } else if (key == "space directions") {
            // accept axis-aligned directions like (2,0,0) (0,1,0) (0,0,1)
            std::string v = value;
            std::replace_if(v.begin(), v.end(), [](char c) { return c == '(' || c == ')' || c == ','; }, ' ');
            std::istringstream iss(v);
            double m[9];
            for (double& mi : m)
                if (!(iss >> mi)) throw Error("cannot parse space directions: " + value);
            if (m[1] != 0 || m[2] != 0 || m[3] != 0 || m[5] != 0 || m[6] != 0 || m[7] != 0)
                throw Error("non-axis-aligned space directions are not supported");
            h.spacing = {std::abs(m[0]), std::abs(m[4]), std::abs(m[8])};
        } else if (key == "data file" || key == "datafile") {
            h.data_file = value;
        }
        // space, space origin, kinds, content: ignored
    }
    if (dimension != 3) throw Error("expected dimension 3, got " + std::to_string(dimension));
    if (!have_sizes || h.dims.x < 1 || h.dims.y < 1 || h.dims.z < 1)
        throw Error("missing or invalid sizes field");
    if (h.type.empty()) throw Error("missing type field");
    h.header_end = pos;
    return h;
}

std::size_t nrrd_type_size(const std::string& type) {
    if (type == "uchar" || type == "unsigned char" || type == "uint8" || type == "uint8_t" ||
        type == "char" || type == "signed char" || type == "int8" || type == "int8_t")
        return 1;
    if (type == "ushort" || type == "unsigned short" || type == "uint16" || type == "uint16_t") return 2;
    if (type == "uint" || type == "unsigned int" || type == "uint32" || type == "uint32_t") return 4;
    throw Error("unsupported voxel type: " + type);
}

std::vector<char> nrrd_payload(const NrrdHeader& h, const std::vector<char>& buf,
                               const std::string& path) {
    std::size_t expected = std::size_t(h.dims.x) * std::size_t(h.dims.y) * std::size_t(h.dims.z) *
                           nrrd_type_size(h.type);
    std::vector<char> raw;
    if (!h.data_file.empty()) {
        fs::path p = fs::path(path).parent_path() / h.data_file;
        raw = read_file(p.string());
    } else {
        raw.assign(buf.begin() + std::ptrdiff_t(h.header_end), buf.end());
    }
    if (h.encoding == "gzip" || h.encoding == "gz") {
        return gzip_decompress(raw.data(), raw.size(), expected);
    }
    if (h.encoding != "raw") throw Error("unsupported encoding: " + h.encoding);
    if (raw.size() < expected)
        throw Error("payload holds " + std::to_string(raw.size()) + " bytes, dims " +
                    std::to_string(h.dims.x) + "x" + std::to_string(h.dims.y) + "x" +
                    std::to_string(h.dims.z) + " require " + std::to_string(expected));
    raw.resize(expected);
    return raw;
}

std::uint32_t fetch_scalar(const std::vector<char>& payload, std::size_t i, std::size_t tsize,
                           bool big_endian) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(payload.data()) + i * tsize;
    std::uint32_t v = 0;
    if (big_endian)
        for (std::size_t b = 0; b < tsize; ++b) v = (v << 8) | p[b];
    else
        for (std::size_t b = tsize; b-- > 0;) v = (v << 8) | p[b];
    return v;
}

VolumeFormat detect_format(const std::string& path) {
    std::string ext = to_lower(fs::path(path).extension().string());
    if (ext == ".nrrd" || ext == ".nhdr") return VolumeFormat::nrrd;
    if (ext == ".json" || ext == ".raw") return VolumeFormat::raw_json;
    throw Error("cannot infer volume format from extension: " + path);
}

struct RawJsonRef {
    fs::path sidecar;
    fs::path raw;
};

RawJsonRef raw_json_paths(const std::string& path, const json* parsed = nullptr) {
    fs::path p(path);
    RawJsonRef r;
    if (to_lower(p.extension().string()) == ".raw") {
        r.raw = p;
        r.sidecar = fs::path(p).replace_extension(".json");
    } else {
        r.sidecar = p;
        r.raw = fs::path(p).replace_extension(".raw");
        if (parsed && parsed->contains("raw"))
            r.raw = p.parent_path() / parsed->at("raw").get<std::string>();
    }
    return r;
}

template <typename Volume, typename Store>
Volume load_generic(const std::string& path, VolumeFormat format, Store store) {
    if (format == VolumeFormat::auto_detect) format = detect_format(path);

    Vec3i dims;
    Vec3 spacing{1, 1, 1};
    std::vector<char> payload;
    std::size_t tsize = 1;
    bool big_endian = false;

    if (format == VolumeFormat::nrrd) {
        std::vector<char> buf = read_file(path);
        NrrdHeader h = parse_nrrd_header(buf, path);
        dims = h.dims;
        spacing = h.spacing;
        tsize = nrrd_type_size(h.type);
        big_endian = (h.endian == "big");
        payload = nrrd_payload(h, buf, path);
    } else {
        RawJsonRef ref0 = raw_json_paths(path);
        std::ifstream jin(ref0.sidecar);
        if (!jin) throw Error("cannot open sidecar: " + ref0.sidecar.string());
        json j = json::parse(jin, nullptr, true, true);
        if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 3)
            throw Error("sidecar dims field missing or malformed");
        dims = {j["dims"][0].get<int>(), j["dims"][1].get<int>(), j["dims"][2].get<int>()};
        if (j.contains("spacing")) {
            if (!j["spacing"].is_array() || j["spacing"].size() != 3)
                throw Error("sidecar spacing field malformed");
            spacing = {j["spacing"][0].get<double>(), j["spacing"][1].get<double>(),
                       j["spacing"][2].get<double>()};
        }
        std::string dtype = j.value("dtype", "u8");
        if (dtype == "u8") tsize = 1;
        else if (dtype == "u16") tsize = 2;
        else if (dtype == "u32") tsize = 4;
        else throw Error("unsupported voxel type: " + dtype);
        RawJsonRef ref = raw_json_paths(path, &j);
        payload = read_file(ref.raw.string());
        std::size_t expected = std::size_t(dims.x) * dims.y * dims.z * tsize;
        if (payload.size() != expected)
            throw Error("raw payload holds " + std::to_string(payload.size()) + " bytes, dims " +
                        std::to_string(dims.x) + "x" + std::to_string(dims.y) + "x" +
                        std::to_string(dims.z) + " require " + std::to_string(expected));
    }

    Volume vol(dims, spacing);
    std::size_t n = vol.grid.voxel_count();
    for (std::size_t i = 0; i < n; ++i) store(vol, i, fetch_scalar(payload, i, tsize, big_endian));
    return vol;
}

void write_nrrd(const std::string& path, const GridShape& grid, const char* data,
                std::size_t tsize, const std::string& type) {
    std::ostringstream head;
    head << "NRRD0004\n";
    head << "# csd volume\n";
    head << "type: " << type << "\n";
    head << "dimension: 3\n";
    head << "sizes: " << grid.dims.x << " " << grid.dims.y << " " << grid.dims.z << "\n";
    head << "spacings: " << grid.spacing.x << " " << grid.spacing.y << " " << grid.spacing.z << "\n";
    if (tsize > 1) head << "endian: little\n";
    head << "encoding: gzip\n";
    head << "\n";

    std::vector<char> compressed = gzip_compress(data, grid.voxel_count() * tsize);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    std::string hs = head.str();
    out.write(hs.data(), std::streamsize(hs.size()));
    out.write(compressed.data(), std::streamsize(compressed.size()));
}

void write_raw_json(const std::string& path, const GridShape& grid, const char* data,
                    std::size_t tsize, const std::string& dtype) {
    RawJsonRef ref = raw_json_paths(path);
    json j;
    j["dims"] = {grid.dims.x, grid.dims.y, grid.dims.z};
    j["spacing"] = {grid.spacing.x, grid.spacing.y, grid.spacing.z};
    j["dtype"] = dtype;
    j["raw"] = ref.raw.filename().string();
    std::ofstream jout(ref.sidecar);
    if (!jout) throw Error("cannot write file: " + ref.sidecar.string());
    jout << j.dump(2) << "\n";
    std::ofstream rout(ref.raw, std::ios::binary);
    if (!rout) throw Error("cannot write file: " + ref.raw.string());
    rout.write(data, std::streamsize(grid.voxel_count() * tsize));
}

}  // namespace

BinaryVolume load_volume(const std::string& path, VolumeFormat format) {
    return load_generic<BinaryVolume>(path, format, [](BinaryVolume& v, std::size_t i, std::uint32_t raw) {
        v.data[i] = raw != 0 ? 1 : 0;
    });
}

void save_volume(const BinaryVolume& vol, const std::string& path, VolumeFormat format) {
    if (format == VolumeFormat::auto_detect) format = detect_format(path);
    const char* bytes = reinterpret_cast<const char*>(vol.data.data());
    if (format == VolumeFormat::nrrd)
        write_nrrd(path, vol.grid, bytes, 1, "uint8");
    else
        write_raw_json(path, vol.grid, bytes, 1, "u8");
}

LabelVolume load_labels(const std::string& path, VolumeFormat format) {
    return load_generic<LabelVolume>(path, format, [](LabelVolume& v, std::size_t i, std::uint32_t raw) {
        v.data[i] = raw;
    });
}

void save_labels(const LabelVolume& labels, const std::string& path, VolumeFormat format) {
    if (format == VolumeFormat::auto_detect) format = detect_format(path);
    std::uint32_t maxl = labels.max_label();
    std::size_t n = labels.grid.voxel_count();

    std::vector<char> packed;
    std::size_t tsize;
    std::string nrrd_type, dtype;
    if (maxl <= 0xff) {
        tsize = 1; nrrd_type = "uint8"; dtype = "u8";
        packed.resize(n);
        for (std::size_t i = 0; i < n; ++i) packed[i] = char(labels.data[i]);
    } else if (maxl <= 0xffff) {
        tsize = 2; nrrd_type = "uint16"; dtype = "u16";
        packed.resize(n * 2);
        for (std::size_t i = 0; i < n; ++i) {
            packed[i * 2] = char(labels.data[i] & 0xff);
            packed[i * 2 + 1] = char((labels.data[i] >> 8) & 0xff);
        }
    } else {
        tsize = 4; nrrd_type = "uint32"; dtype = "u32";
        packed.resize(n * 4);
        for (std::size_t i = 0; i < n; ++i)
            for (int b = 0; b < 4; ++b) packed[i * 4 + std::size_t(b)] = char((labels.data[i] >> (8 * b)) & 0xff);
    }

    if (format == VolumeFormat::nrrd)
        write_nrrd(path, labels.grid, packed.data(), tsize, nrrd_type);
    else
        write_raw_json(path, labels.grid, packed.data(), tsize, dtype);
}

}  // namespace csd
