#include "negm/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "negm/errors.hpp"
#include "negm/io.hpp"
#include "negm/rng.hpp"

namespace negm {

Tensor Dataset::image(int i) const {
    const int c = images.dim(1), h = images.dim(2), w = images.dim(3);
    const int64_t plane = static_cast<int64_t>(c) * h * w;
    Tensor out({c, h, w});
    std::copy_n(images.data() + i * plane, plane, out.data());
    return out;
}

Tensor Dataset::batch_images(const std::vector<int>& idx) const {
    const int c = images.dim(1), h = images.dim(2), w = images.dim(3);
    const int64_t plane = static_cast<int64_t>(c) * h * w;
    Tensor out({static_cast<int>(idx.size()), c, h, w});
    for (size_t k = 0; k < idx.size(); ++k)
        std::copy_n(images.data() + idx[k] * plane, plane, out.data() + static_cast<int64_t>(k) * plane);
    return out;
}

std::vector<int> Dataset::batch_labels(const std::vector<int>& idx) const {
    std::vector<int> out(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) out[k] = labels[static_cast<size_t>(idx[k])];
    return out;
}

Dataset Dataset::subset(const std::vector<int>& idx, const std::string& split_tag) const {
    Dataset d;
    d.images = batch_images(idx);
    d.labels = batch_labels(idx);
    d.num_classes = num_classes;
    d.split = split_tag;
    d.rehash();
    return d;
}

void Dataset::check_invariants() const {
    if (size() == 0) throw DataFormatError(DataFormatError::Kind::CountMismatch, "empty dataset");
    if (static_cast<int>(labels.size()) != size())
        throw DataFormatError(DataFormatError::Kind::CountMismatch,
                              "image/label count mismatch");
    for (int64_t i = 0; i < images.size(); ++i)
        if (images[i] < 0.0 || images[i] > 1.0)
            throw DataFormatError(DataFormatError::Kind::Parse, "pixel outside [0,1]");
    for (int l : labels)
        if (l < 0 || l >= num_classes)
            throw DataFormatError(DataFormatError::Kind::Parse, "label outside class range");
}

void Dataset::rehash() {
    uint64_t h = io::fnv1a64(images.data(), static_cast<size_t>(images.size()) * sizeof(double));
    h = io::fnv1a64(labels.data(), labels.size() * sizeof(int), h);
    id = io::hex64(h);
}

namespace {

uint32_t read_be32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw DataFormatError(DataFormatError::Kind::Truncated, "truncated file: " + path);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | b[3];
}

std::vector<unsigned char> read_exact(std::ifstream& f, size_t n, const std::string& path) {
    std::vector<unsigned char> buf(n);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(f.gcount()) != n)
        throw DataFormatError(DataFormatError::Kind::Truncated, "truncated file: " + path);
    return buf;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw DataFormatError(DataFormatError::Kind::Io, "cannot open: " + images_path);
    if (read_be32(fi, images_path) != 0x00000803u)
        throw DataFormatError(DataFormatError::Kind::BadMagic,
                              "bad IDX image magic in " + images_path);
    const uint32_t n = read_be32(fi, images_path);
    const uint32_t h = read_be32(fi, images_path);
    const uint32_t w = read_be32(fi, images_path);

    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw DataFormatError(DataFormatError::Kind::Io, "cannot open: " + labels_path);
    if (read_be32(fl, labels_path) != 0x00000801u)
        throw DataFormatError(DataFormatError::Kind::BadMagic,
                              "bad IDX label magic in " + labels_path);
    const uint32_t nl = read_be32(fl, labels_path);
    if (n != nl)
        throw DataFormatError(DataFormatError::Kind::CountMismatch,
                              "image count " + std::to_string(n) + " != label count " +
                                  std::to_string(nl));

    auto pixels = read_exact(fi, static_cast<size_t>(n) * h * w, images_path);
    auto labs = read_exact(fl, n, labels_path);

    Dataset d;
    d.images = Tensor({static_cast<int>(n), 1, static_cast<int>(h), static_cast<int>(w)});
    for (size_t i = 0; i < pixels.size(); ++i) d.images[static_cast<int64_t>(i)] = pixels[i] / 255.0;
    d.labels.assign(labs.begin(), labs.end());
    d.num_classes = 10;
    d.split = "train";
    d.rehash();
    d.check_invariants();
    return d;
}

Dataset load_cifar_binary(const std::vector<std::string>& paths) {
    constexpr size_t kRecord = 3073;  // 1 label byte + 3*32*32 pixels
    std::vector<unsigned char> all;
    for (const std::string& p : paths) {
        std::ifstream f(p, std::ios::binary | std::ios::ate);
        if (!f) throw DataFormatError(DataFormatError::Kind::Io, "cannot open: " + p);
        const auto len = static_cast<size_t>(f.tellg());
        if (len == 0 || len % kRecord != 0)
            throw DataFormatError(DataFormatError::Kind::RecordSize,
                                  p + ": length " + std::to_string(len) +
                                      " is not a multiple of 3073");
        f.seekg(0);
        auto buf = read_exact(f, len, p);
        all.insert(all.end(), buf.begin(), buf.end());
    }
    const int n = static_cast<int>(all.size() / kRecord);
    Dataset d;
    d.images = Tensor({n, 3, 32, 32});
    d.labels.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const unsigned char* rec = all.data() + static_cast<size_t>(i) * kRecord;
        d.labels[static_cast<size_t>(i)] = rec[0];
        for (int64_t j = 0; j < 3 * 32 * 32; ++j)
            d.images[static_cast<int64_t>(i) * 3 * 32 * 32 + j] = rec[1 + j] / 255.0;
    }
    d.num_classes = 10;
    d.split = "train";
    d.rehash();
    d.check_invariants();
    return d;
}

ReducedSplits reduce(const Dataset& source, int per_class_train, int per_class_test,
                     uint64_t seed, double validation_fraction) {
    if (per_class_train < 1 || per_class_test < 0)
        throw DataFormatError(DataFormatError::Kind::CountMismatch,
                              "per-class train count must be >= 1");
    std::vector<std::vector<int>> by_class(static_cast<size_t>(source.num_classes));
    for (int i = 0; i < source.size(); ++i)
        by_class[static_cast<size_t>(source.labels[static_cast<size_t>(i)])].push_back(i);

    const int want = per_class_train + per_class_test;
    std::mt19937_64 rng = derive_rng(seed, kStreamData);
    std::vector<int> train_idx, val_idx, test_idx;
    const int per_class_val =
        static_cast<int>(std::floor(validation_fraction * per_class_train));
    for (int c = 0; c < source.num_classes; ++c) {
        auto& pool = by_class[static_cast<size_t>(c)];
        if (static_cast<int>(pool.size()) < want)
            throw DataFormatError(DataFormatError::Kind::CountMismatch,
                                  "class " + std::to_string(c) + " has only " +
                                      std::to_string(pool.size()) + " samples, need " +
                                      std::to_string(want));
        std::shuffle(pool.begin(), pool.end(), rng);
        for (int i = 0; i < per_class_val; ++i) val_idx.push_back(pool[static_cast<size_t>(i)]);
        for (int i = per_class_val; i < per_class_train; ++i)
            train_idx.push_back(pool[static_cast<size_t>(i)]);
        for (int i = per_class_train; i < want; ++i)
            test_idx.push_back(pool[static_cast<size_t>(i)]);
    }

    ReducedSplits out;
    out.train = source.subset(train_idx, "train");
    out.validation = per_class_val > 0 ? source.subset(val_idx, "validation") : Dataset{};
    if (per_class_val > 0) out.validation.num_classes = source.num_classes;
    out.test = source.subset(test_idx, "test");
    return out;
}

Dataset synth_dataset(int num_classes, int samples_per_class, int image_size, uint64_t seed,
                      double noise) {
    const int n = num_classes * samples_per_class;
    Dataset d;
    d.images = Tensor({n, 1, image_size, image_size});
    d.labels.resize(static_cast<size_t>(n));
    d.num_classes = num_classes;
    d.split = "train";

    // per-class prototype: a few smooth gaussian bumps at class-seeded spots
    std::vector<Tensor> protos;
    for (int c = 0; c < num_classes; ++c) {
        std::mt19937_64 crng = derive_rng(seed, kStreamData, static_cast<uint64_t>(c));
        std::uniform_real_distribution<double> upos(0.15, 0.85);
        std::uniform_real_distribution<double> uwidth(0.08, 0.2);
        Tensor p({image_size, image_size});
        const int bumps = 3;
        for (int t = 0; t < bumps; ++t) {
            const double cy = upos(crng) * image_size;
            const double cx = upos(crng) * image_size;
            const double s2 = std::pow(uwidth(crng) * image_size, 2);
            for (int i = 0; i < image_size; ++i)
                for (int j = 0; j < image_size; ++j) {
                    const double r2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
                    p.at({i, j}) += std::exp(-r2 / (2.0 * s2));
                }
        }
        double m = max_abs(p);
        for (int64_t i = 0; i < p.size(); ++i) p[i] = 0.15 + 0.7 * (p[i] / m);
        protos.push_back(std::move(p));
    }

    std::mt19937_64 rng = derive_rng(seed, kStreamData, 0xabcdULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int64_t off = 0;
    for (int c = 0; c < num_classes; ++c) {
        for (int s = 0; s < samples_per_class; ++s) {
            const Tensor& p = protos[static_cast<size_t>(c)];
            for (int64_t i = 0; i < p.size(); ++i)
                d.images[off + i] = std::clamp(p[i] + noise * gauss(rng), 0.0, 1.0);
            d.labels[static_cast<size_t>(off / p.size())] = c;
            off += p.size();
        }
    }
    d.rehash();
    d.check_invariants();
    return d;
}

}  // namespace negm
