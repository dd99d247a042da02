#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "depthinit/matrix.hpp"

namespace depthinit {

enum class Scaling { ZeroOne, Standardized, Raw };

const char* scaling_name(Scaling s);
Scaling parse_scaling(const std::string& name);

/// Feature rows are samples. ZeroOne guarantees every feature in [0, 1].
struct Dataset {
    Matrix features;  // samples x dims
    std::vector<int> labels;
    int num_classes = 0;
    Scaling scaling = Scaling::Raw;
    std::string provenance;

    std::size_t size() const { return features.rows(); }
    int dims() const { return static_cast<int>(features.cols()); }
};

/// Gaussian blobs: class means are `separation`-long random directions, unit
/// within-class variance, labels assigned round-robin (balanced within 1).
Dataset gen_synthetic(std::uint64_t seed, int samples, int dims, int classes,
                      double separation, Scaling scaling = Scaling::ZeroOne);

/// CIFAR-10 binary batches: 3073-byte records, 1 label byte then 3072 pixel
/// bytes. Features come out as pixel/255 in [0, 1].
Dataset load_cifar10_binary(const std::string& path, std::optional<int> limit = {});

/// CSV with header f0..f{d-1},label.
void write_dataset_csv(const Dataset& dataset, std::ostream& out);

/// Batch with one column per sample: columns are dataset rows
/// indices[begin], ..., indices[begin+count-1].
Matrix gather_batch(const Dataset& dataset, const std::vector<int>& indices, int begin,
                    int count);
std::vector<int> gather_labels(const Dataset& dataset, const std::vector<int>& indices,
                               int begin, int count);

} // namespace depthinit
