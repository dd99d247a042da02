#include "depthinit/data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "depthinit/errors.hpp"
#include "depthinit/rng.hpp"

namespace depthinit {

const char* scaling_name(Scaling s) {
    switch (s) {
        case Scaling::ZeroOne: return "zero_one";
        case Scaling::Standardized: return "standardized";
        case Scaling::Raw: return "raw";
    }
    return "raw";
}

Scaling parse_scaling(const std::string& name) {
    if (name == "zero_one") return Scaling::ZeroOne;
    if (name == "standardized") return Scaling::Standardized;
    if (name == "raw") return Scaling::Raw;
    throw std::invalid_argument("unknown scaling: " + name);
}

namespace {

void apply_scaling(Matrix& features, Scaling scaling) {
    if (scaling == Scaling::Raw) return;
    const std::size_t samples = features.rows(), dims = features.cols();
    for (std::size_t d = 0; d < dims; ++d) {
        if (scaling == Scaling::ZeroOne) {
            double lo = features(0, d), hi = features(0, d);
            for (std::size_t i = 1; i < samples; ++i) {
                lo = std::min(lo, features(i, d));
                hi = std::max(hi, features(i, d));
            }
            const double range = hi - lo;
            for (std::size_t i = 0; i < samples; ++i)
                features(i, d) = range > 0.0 ? (features(i, d) - lo) / range : 0.0;
        } else {
            double mean = 0.0;
            for (std::size_t i = 0; i < samples; ++i) mean += features(i, d);
            mean /= static_cast<double>(samples);
            double var = 0.0;
            for (std::size_t i = 0; i < samples; ++i) {
                const double dev = features(i, d) - mean;
                var += dev * dev;
            }
            var /= static_cast<double>(samples);
            const double stddev = std::sqrt(var);
            for (std::size_t i = 0; i < samples; ++i)
                features(i, d) = stddev > 0.0 ? (features(i, d) - mean) / stddev : 0.0;
        }
    }
}

} // namespace

Dataset gen_synthetic(std::uint64_t seed, int samples, int dims, int classes,
                      double separation, Scaling scaling) {
    if (classes < 2) throw std::invalid_argument("gen_synthetic: classes must be >= 2");
    if (samples < classes)
        throw std::invalid_argument("gen_synthetic: samples must be >= classes");
    if (dims < 1) throw std::invalid_argument("gen_synthetic: dims must be positive");
    if (separation < 0.0)
        throw std::invalid_argument("gen_synthetic: separation must be >= 0");

    Rng rng(seed);
    Matrix means(static_cast<std::size_t>(classes), static_cast<std::size_t>(dims));
    for (int k = 0; k < classes; ++k) {
        double norm_sq = 0.0;
        for (int d = 0; d < dims; ++d) {
            const double v = rng.normal();
            means(static_cast<std::size_t>(k), static_cast<std::size_t>(d)) = v;
            norm_sq += v * v;
        }
        const double scale = separation / std::sqrt(norm_sq);
        for (int d = 0; d < dims; ++d)
            means(static_cast<std::size_t>(k), static_cast<std::size_t>(d)) *= scale;
    }

    Dataset ds;
    ds.features = Matrix(static_cast<std::size_t>(samples), static_cast<std::size_t>(dims));
    ds.labels.resize(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const int label = i % classes;
        ds.labels[static_cast<std::size_t>(i)] = label;
        for (int d = 0; d < dims; ++d)
            ds.features(static_cast<std::size_t>(i), static_cast<std::size_t>(d)) =
                means(static_cast<std::size_t>(label), static_cast<std::size_t>(d)) +
                rng.normal();
    }
    apply_scaling(ds.features, scaling);
    ds.num_classes = classes;
    ds.scaling = scaling;

    std::ostringstream prov;
    prov << "synthetic(seed=" << seed << ",samples=" << samples << ",dims=" << dims
         << ",classes=" << classes << ",separation=" << separation << ",scaling="
         << scaling_name(scaling) << ")";
    ds.provenance = prov.str();
    return ds;
}

Dataset load_cifar10_binary(const std::string& path, std::optional<int> limit) {
    constexpr std::size_t kRecordBytes = 3073;  // 1 label + 32*32*3 pixels
    constexpr std::size_t kPixelBytes = 3072;
    if (limit && *limit < 1)
        throw std::invalid_argument("load_cifar10_binary: limit must be positive");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw corrupt_file_error("load_cifar10_binary: cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    if (file_size == 0 || file_size % kRecordBytes != 0) {
        std::ostringstream msg;
        msg << "load_cifar10_binary: " << path << " has " << file_size
            << " bytes, not a multiple of " << kRecordBytes;
        throw corrupt_file_error(msg.str());
    }

    std::size_t records = file_size / kRecordBytes;
    if (limit) records = std::min(records, static_cast<std::size_t>(*limit));

    Dataset ds;
    ds.features = Matrix(records, kPixelBytes);
    ds.labels.resize(records);
    std::vector<unsigned char> record(kRecordBytes);
    for (std::size_t r = 0; r < records; ++r) {
        in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(kRecordBytes));
        if (!in) throw corrupt_file_error("load_cifar10_binary: short read on " + path);
        if (record[0] > 9) {
            std::ostringstream msg;
            msg << "load_cifar10_binary: record " << r << " has label byte "
                << static_cast<int>(record[0]) << " (valid labels are 0..9)";
            throw corrupt_record_error(msg.str());
        }
        ds.labels[r] = record[0];
        for (std::size_t p = 0; p < kPixelBytes; ++p)
            ds.features(r, p) = static_cast<double>(record[p + 1]) / 255.0;
    }
    ds.num_classes = 10;
    ds.scaling = Scaling::ZeroOne;
    std::ostringstream prov;
    prov << "cifar10(path=" << path << ",records=" << records << ")";
    ds.provenance = prov.str();
    return ds;
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
    const int dims = dataset.dims();
    for (int d = 0; d < dims; ++d) out << 'f' << d << ',';
    out << "label\n";
    out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (int d = 0; d < dims; ++d)
            out << dataset.features(i, static_cast<std::size_t>(d)) << ',';
        out << dataset.labels[i] << '\n';
    }
}

Matrix gather_batch(const Dataset& dataset, const std::vector<int>& indices, int begin,
                    int count) {
    Matrix batch(dataset.features.cols(), static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        const auto row = static_cast<std::size_t>(indices[static_cast<std::size_t>(begin + j)]);
        for (std::size_t d = 0; d < batch.rows(); ++d)
            batch(d, static_cast<std::size_t>(j)) = dataset.features(row, d);
    }
    return batch;
}

std::vector<int> gather_labels(const Dataset& dataset, const std::vector<int>& indices,
                               int begin, int count) {
    std::vector<int> labels(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j)
        labels[static_cast<std::size_t>(j)] =
            dataset.labels[static_cast<std::size_t>(indices[static_cast<std::size_t>(begin + j)])];
    return labels;
}

} // namespace depthinit
