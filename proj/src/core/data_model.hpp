#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "matrix.hpp"

namespace credanno {

inline constexpr int kMalignancyClasses = 2;

struct Attribute {
  std::string name;
  int class_count = 0;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

// Ordered list of ordinal nodule attributes. Malignancy is always binary and
// is not part of the list.
class AttributeSchema {
 public:
  AttributeSchema() = default;
  // Validates names (unique, non-empty, not "id"/"malignancy") and class counts (>= 2).
  explicit AttributeSchema(std::vector<Attribute> attributes);

  // LIDC rating scales with "internal structure" left out.
  static AttributeSchema lidc_default();

  std::size_t size() const noexcept { return attributes_.size(); }
  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const Attribute& operator[](std::size_t i) const { return attributes_[i]; }
  int total_classes() const noexcept;
  // Canonical "name=count;..." text, stable across runs.
  std::string canonical() const;
  std::uint64_t hash() const;

  friend bool operator==(const AttributeSchema&, const AttributeSchema&) = default;

 private:
  std::vector<Attribute> attributes_;
};

struct FeatureMatrix {
  std::vector<std::string> ids;
  Matrix data;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t dim() const noexcept { return data.cols(); }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

struct AnnotationRecord {
  std::string id;
  int malignancy = 0;
  std::vector<int> attribute_labels;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

void validate_record(const AnnotationRecord& record, const AttributeSchema& schema);

class AnnotationTable {
 public:
  AnnotationTable() = default;
  explicit AnnotationTable(AttributeSchema schema) : schema_(std::move(schema)) {}

  void add(AnnotationRecord record);

  const AttributeSchema& schema() const noexcept { return schema_; }
  const std::vector<AnnotationRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool contains(const std::string& id) const { return index_.contains(id); }
  const AnnotationRecord& at(const std::string& id) const;

  friend bool operator==(const AnnotationTable& a, const AnnotationTable& b) {
    return a.schema_ == b.schema_ && a.records_ == b.records_;
  }

 private:
  AttributeSchema schema_;
  std::vector<AnnotationRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Split { Train, Test };

struct SplitMap {
  std::vector<std::pair<std::string, Split>> entries;  // file order

  std::unordered_map<std::string, Split> lookup() const;
  std::size_t count(Split s) const;

  friend bool operator==(const SplitMap&, const SplitMap&) = default;
};

// Features, annotations and split joined by id. Row order follows the
// feature matrix; `truth(i)` and `split(i)` describe feature row i.
class Dataset {
 public:
  Dataset() = default;

  const FeatureMatrix& features() const noexcept { return features_; }
  const AnnotationTable& annotations() const noexcept { return annotations_; }
  const SplitMap& split_map() const noexcept { return split_map_; }
  const AttributeSchema& schema() const noexcept { return annotations_.schema(); }

  std::size_t size() const noexcept { return features_.size(); }
  std::size_t dim() const noexcept { return features_.dim(); }
  std::span<const double> row(std::size_t i) const { return features_.data.row(i); }
  const std::string& id(std::size_t i) const { return features_.ids[i]; }
  // Ground-truth record for a row. Active-learning code must go through an
  // Oracle instead so reads are counted.
  const AnnotationRecord& truth(std::size_t i) const { return annotations_.records()[row_record_[i]]; }
  Split split(std::size_t i) const { return row_split_[i]; }

  const std::vector<std::size_t>& train_rows() const noexcept { return train_rows_; }
  const std::vector<std::size_t>& test_rows() const noexcept { return test_rows_; }

  friend Dataset assemble_dataset(FeatureMatrix, AnnotationTable, SplitMap);

 private:
  FeatureMatrix features_;
  AnnotationTable annotations_;
  SplitMap split_map_;
  std::vector<std::size_t> row_record_;
  std::vector<Split> row_split_;
  std::vector<std::size_t> train_rows_;
  std::vector<std::size_t> test_rows_;
};

// Throws Error(Format) naming the offending ids when the id sets differ or a
// split partition is empty.
Dataset assemble_dataset(FeatureMatrix features, AnnotationTable annotations, SplitMap split);

FeatureMatrix load_features(const std::filesystem::path& path);
AnnotationTable load_annotations(const std::filesystem::path& path, const AttributeSchema& schema);
SplitMap load_split(const std::filesystem::path& path);
// `name = count` per line, `#` starts a comment. Line order is attribute order.
AttributeSchema load_schema(const std::filesystem::path& path);

void write_features(const std::filesystem::path& path, const FeatureMatrix& features);
void write_annotations(const std::filesystem::path& path, const AnnotationTable& table);
void write_split(const std::filesystem::path& path, const SplitMap& split);
void write_schema(const std::filesystem::path& path, const AttributeSchema& schema);

// Writes features.csv, annotations.csv, split.csv and schema.txt into `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& features, const std::filesystem::path& annotations,
                     const std::filesystem::path& split, const AttributeSchema& schema);

}  // namespace credanno
