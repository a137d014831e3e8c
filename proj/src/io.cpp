#include "negm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "negm/errors.hpp"

namespace negm::io {

uint64_t fnv1a64(const void* data, size_t n, uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a64_str(const std::string& s, uint64_t h) { return fnv1a64(s.data(), s.size(), h); }

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string tensor_hash(const Tensor& t) {
    uint64_t h = fnv1a64(t.data(), static_cast<size_t>(t.size()) * sizeof(double));
    for (int d : t.shape()) h = fnv1a64(&d, sizeof(d), h);
    return hex64(h);
}

BinWriter::BinWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw DataFormatError(DataFormatError::Kind::Io, "cannot open for write: " + path);
}

void BinWriter::magic(const char m[8]) { bytes(m, 8); }
void BinWriter::u32(uint32_t v) { bytes(&v, sizeof(v)); }
void BinWriter::i32(int32_t v) { bytes(&v, sizeof(v)); }
void BinWriter::f64(double v) { bytes(&v, sizeof(v)); }

void BinWriter::bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void BinWriter::str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
}

void BinWriter::meta(const std::map<std::string, std::string>& m) {
    u32(static_cast<uint32_t>(m.size()));
    for (const auto& [k, v] : m) {
        str(k);
        str(v);
    }
}

void BinWriter::tensor(const Tensor& t) {
    u32(static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) u32(static_cast<uint32_t>(d));
    bytes(t.data(), static_cast<size_t>(t.size()) * sizeof(double));
}

void BinWriter::close() {
    out_.close();
    if (!out_) throw DataFormatError(DataFormatError::Kind::Io, "write failed: " + path_);
}

BinReader::BinReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw DataFormatError(DataFormatError::Kind::Io, "cannot open: " + path);
}

void BinReader::need(size_t n) {
    (void)n;
    if (!in_)
        throw DataFormatError(DataFormatError::Kind::Truncated, "truncated file: " + path_);
}

void BinReader::expect_magic(const char m[8]) {
    char buf[8];
    in_.read(buf, 8);
    need(8);
    if (std::memcmp(buf, m, 8) != 0)
        throw DataFormatError(DataFormatError::Kind::BadMagic,
                              "bad magic in " + path_ + " (expected " + std::string(m, 8) + ")");
}

uint32_t BinReader::u32() {
    uint32_t v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(v));
    need(sizeof(v));
    return v;
}

int32_t BinReader::i32() {
    int32_t v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(v));
    need(sizeof(v));
    return v;
}

double BinReader::f64() {
    double v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(v));
    need(sizeof(v));
    return v;
}

std::string BinReader::str() {
    uint32_t n = u32();
    if (n > (1u << 28))
        throw DataFormatError(DataFormatError::Kind::Parse, "unreasonable string length");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    need(n);
    return s;
}

std::map<std::string, std::string> BinReader::meta() {
    std::map<std::string, std::string> m;
    const uint32_t n = u32();
    for (uint32_t i = 0; i < n; ++i) {
        std::string k = str();
        m[k] = str();
    }
    return m;
}

Tensor BinReader::tensor() {
    const uint32_t rank = u32();
    if (rank > 8) throw DataFormatError(DataFormatError::Kind::Parse, "unreasonable tensor rank");
    std::vector<int> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(u32());
    Tensor t(shape);
    in_.read(reinterpret_cast<char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
    need(static_cast<size_t>(t.size()) * sizeof(double));
    return t;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataFormatError(DataFormatError::Kind::Io, "cannot open for write: " + path);
}

namespace {
std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += "\"\"";
        else q += c;
    }
    return q + "\"";
}
}  // namespace

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_escape(cells[i]);
    out_ << '\n';
}

void CsvWriter::close() { out_.close(); }

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError(DataFormatError::Kind::Io, "cannot open: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::string cur;
        bool quoted = false;
        for (size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_attribution_pnm(const std::string& path, const Tensor& map) {
    if (map.rank() != 3)
        throw DataFormatError(DataFormatError::Kind::Parse,
                              "attribution map must be [C,H,W], got " + map.shape_str());
    const int c = map.dim(0), h = map.dim(1), w = map.dim(2);
    auto to_byte = [](double v) {
        int b = static_cast<int>(std::lround((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5));
        return static_cast<unsigned char>(std::clamp(b, 0, 255));
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataFormatError(DataFormatError::Kind::Io, "cannot open for write: " + path);
    if (c == 3) {
        out << "P6\n" << w << ' ' << h << "\n255\n";
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                for (int ch = 0; ch < 3; ++ch) out.put(static_cast<char>(to_byte(map.at({ch, i, j}))));
    } else {
        out << "P5\n" << w << ' ' << h << "\n255\n";
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                double s = 0;
                for (int ch = 0; ch < c; ++ch) s += map.at({ch, i, j});
                out.put(static_cast<char>(to_byte(c > 1 ? s / c : s)));
            }
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataFormatError(DataFormatError::Kind::Io, "cannot open for write: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError(DataFormatError::Kind::Io, "cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace negm::io
