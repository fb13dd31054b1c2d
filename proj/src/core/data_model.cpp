#include "data_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "error.hpp"
#include "text.hpp"

namespace credanno {

namespace {

struct CsvLine {
  std::size_t number;  // 1-based
  std::vector<std::string_view> fields;
};

// Splits file content into comma-separated lines, dropping blank lines.
std::vector<CsvLine> read_csv(std::string_view content) {
  std::vector<CsvLine> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++number;
    auto line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!text::trim(line).empty()) {
      auto fields = text::split(line, ',');
      for (auto& f : fields) f = text::trim(f);
      lines.push_back({number, std::move(fields)});
    }
    if (end == content.size()) break;
    start = end + 1;
  }
  return lines;
}

[[noreturn]] void format_error(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  fail(ErrorKind::Format, path.string() + ": " + what + " at line " + std::to_string(line));
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    if (i == 10) {
      out += "... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    out += ids[i];
  }
  return out;
}

}  // namespace

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
  std::unordered_set<std::string> seen;
  for (const auto& a : attributes_) {
    if (a.name.empty()) fail(ErrorKind::InvalidArgument, "attribute name must be non-empty");
    if (a.name == "id" || a.name == "malignancy")
      fail(ErrorKind::InvalidArgument, "attribute name '" + a.name + "' is reserved");
    if (a.name.find_first_of(",=# \t\r\n") != std::string::npos)
      fail(ErrorKind::InvalidArgument, "attribute name '" + a.name + "' contains a reserved character");
    if (!seen.insert(a.name).second) fail(ErrorKind::InvalidArgument, "duplicate attribute name '" + a.name + "'");
    if (a.class_count < 2)
      fail(ErrorKind::InvalidArgument, "attribute '" + a.name + "' needs at least 2 classes");
  }
}

AttributeSchema AttributeSchema::lidc_default() {
  return AttributeSchema({{"subtlety", 5},
                          {"calcification", 6},
                          {"sphericity", 5},
                          {"margin", 5},
                          {"lobulation", 5},
                          {"spiculation", 5},
                          {"texture", 5}});
}

int AttributeSchema::total_classes() const noexcept {
  int total = 0;
  for (const auto& a : attributes_) total += a.class_count;
  return total;
}

std::string AttributeSchema::canonical() const {
  std::string out = "malignancy=2";
  for (const auto& a : attributes_) out += ";" + a.name + "=" + std::to_string(a.class_count);
  return out;
}

std::uint64_t AttributeSchema::hash() const { return text::fnv1a64(canonical()); }

void validate_record(const AnnotationRecord& record, const AttributeSchema& schema) {
  if (record.malignancy < 0 || record.malignancy >= kMalignancyClasses)
    fail(ErrorKind::Format, "malignancy label out of range for '" + record.id + "'");
  if (record.attribute_labels.size() != schema.size())
    fail(ErrorKind::Format, "record '" + record.id + "' has " + std::to_string(record.attribute_labels.size()) +
                                " attribute labels, schema expects " + std::to_string(schema.size()));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    int v = record.attribute_labels[i];
    if (v < 0 || v >= schema[i].class_count)
      fail(ErrorKind::Format, "label out of range for '" + record.id + "' attribute " + schema[i].name);
  }
}

void AnnotationTable::add(AnnotationRecord record) {
  validate_record(record, schema_);
  if (index_.contains(record.id)) fail(ErrorKind::Format, "duplicate annotation id '" + record.id + "'");
  index_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
}

const AnnotationRecord& AnnotationTable::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorKind::InvalidArgument, "no annotation for '" + id + "'");
  return records_[it->second];
}

std::unordered_map<std::string, Split> SplitMap::lookup() const {
  std::unordered_map<std::string, Split> out;
  for (const auto& [id, s] : entries) out.emplace(id, s);
  return out;
}

std::size_t SplitMap::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [s](const auto& e) { return e.second == s; }));
}

Dataset assemble_dataset(FeatureMatrix features, AnnotationTable annotations, SplitMap split) {
  auto split_of = split.lookup();
  std::vector<std::string> missing_annotation, missing_split;
  for (const auto& id : features.ids) {
    if (!annotations.contains(id)) missing_annotation.push_back(id);
    if (!split_of.contains(id)) missing_split.push_back(id);
  }
  std::unordered_set<std::string> feature_ids(features.ids.begin(), features.ids.end());
  std::vector<std::string> missing_features;
  for (const auto& r : annotations.records())
    if (!feature_ids.contains(r.id)) missing_features.push_back(r.id);
  for (const auto& [id, s] : split.entries)
    if (!feature_ids.contains(id) && std::find(missing_features.begin(), missing_features.end(), id) ==
                                         missing_features.end())
      missing_features.push_back(id);

  std::string problems;
  if (!missing_annotation.empty()) problems += "missing annotation for " + join_ids(missing_annotation) + "; ";
  if (!missing_split.empty()) problems += "missing split for " + join_ids(missing_split) + "; ";
  if (!missing_features.empty()) problems += "missing features for " + join_ids(missing_features) + "; ";
  if (!problems.empty()) fail(ErrorKind::Format, problems.substr(0, problems.size() - 2));

  Dataset ds;
  ds.row_record_.reserve(features.size());
  ds.row_split_.reserve(features.size());
  std::unordered_map<std::string, std::size_t> record_index;
  for (std::size_t i = 0; i < annotations.records().size(); ++i) record_index.emplace(annotations.records()[i].id, i);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& id = features.ids[i];
    ds.row_record_.push_back(record_index.at(id));
    Split s = split_of.at(id);
    ds.row_split_.push_back(s);
    (s == Split::Train ? ds.train_rows_ : ds.test_rows_).push_back(i);
  }
  if (ds.train_rows_.empty()) fail(ErrorKind::Format, "train split is empty");
  if (ds.test_rows_.empty()) fail(ErrorKind::Format, "test split is empty");
  ds.features_ = std::move(features);
  ds.annotations_ = std::move(annotations);
  ds.split_map_ = std::move(split);
  return ds;
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  auto content = text::read_file(path);
  auto lines = read_csv(content);
  if (lines.empty()) format_error(path, 1, "missing header");
  const auto& header = lines.front();
  if (header.fields.size() < 2 || header.fields[0] != "id") format_error(path, header.number, "malformed header");
  const std::size_t dim = header.fields.size() - 1;
  for (std::size_t c = 0; c < dim; ++c)
    if (header.fields[c + 1] != "f" + std::to_string(c))
      format_error(path, header.number, "malformed header (expected f" + std::to_string(c) + ")");

  FeatureMatrix out;
  std::unordered_set<std::string> seen;
  std::vector<double> row(dim);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& line = lines[l];
    if (line.fields.size() != dim + 1)
      format_error(path, line.number, "ragged row (" + std::to_string(line.fields.size()) + " cells, expected " +
                                          std::to_string(dim + 1) + ")");
    std::string id(line.fields[0]);
    if (id.empty()) format_error(path, line.number, "empty id");
    if (!seen.insert(id).second) format_error(path, line.number, "duplicate id '" + id + "'");
    for (std::size_t c = 0; c < dim; ++c) {
      if (!text::parse_double(line.fields[c + 1], row[c])) format_error(path, line.number, "non-numeric value");
      if (!std::isfinite(row[c])) format_error(path, line.number, "non-finite value");
    }
    out.ids.push_back(std::move(id));
    out.data.append_row(row);
  }
  if (out.ids.empty()) out.data = Matrix(0, dim);
  return out;
}

AnnotationTable load_annotations(const std::filesystem::path& path, const AttributeSchema& schema) {
  if (schema.size() == 0) fail(ErrorKind::InvalidArgument, "schema must declare at least one attribute");
  auto content = text::read_file(path);
  auto lines = read_csv(content);
  if (lines.empty()) format_error(path, 1, "missing header");
  const auto& header = lines.front();
  if (header.fields.size() < 2 || header.fields[0] != "id" || header.fields[1] != "malignancy")
    format_error(path, header.number, "malformed header (expected id,malignancy,...)");

  // column -> attribute index
  std::vector<std::size_t> column_attr;
  std::vector<bool> present(schema.size(), false);
  for (std::size_t c = 2; c < header.fields.size(); ++c) {
    auto name = header.fields[c];
    auto it = std::find_if(schema.attributes().begin(), schema.attributes().end(),
                           [&](const Attribute& a) { return a.name == name; });
    if (it == schema.attributes().end())
      format_error(path, header.number, "unknown attribute name '" + std::string(name) + "'");
    auto idx = static_cast<std::size_t>(it - schema.attributes().begin());
    if (present[idx]) format_error(path, header.number, "duplicate column '" + std::string(name) + "'");
    present[idx] = true;
    column_attr.push_back(idx);
  }
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (!present[i]) format_error(path, header.number, "missing column '" + schema[i].name + "'");

  AnnotationTable table(schema);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& line = lines[l];
    if (line.fields.size() != header.fields.size()) format_error(path, line.number, "ragged row");
    AnnotationRecord rec;
    rec.id = std::string(line.fields[0]);
    if (rec.id.empty()) format_error(path, line.number, "empty id");
    if (table.contains(rec.id)) format_error(path, line.number, "duplicate id '" + rec.id + "'");
    long long v = 0;
    if (!text::parse_int(line.fields[1], v)) format_error(path, line.number, "non-integer malignancy");
    if (v < 0 || v >= kMalignancyClasses) format_error(path, line.number, "label out of range (malignancy)");
    rec.malignancy = static_cast<int>(v);
    rec.attribute_labels.assign(schema.size(), 0);
    for (std::size_t c = 2; c < line.fields.size(); ++c) {
      const auto& attr = schema[column_attr[c - 2]];
      if (!text::parse_int(line.fields[c], v)) format_error(path, line.number, "non-integer label for " + attr.name);
      if (v < 0 || v >= attr.class_count) format_error(path, line.number, "label out of range (" + attr.name + ")");
      rec.attribute_labels[column_attr[c - 2]] = static_cast<int>(v);
    }
    table.add(std::move(rec));
  }
  return table;
}

SplitMap load_split(const std::filesystem::path& path) {
  auto content = text::read_file(path);
  auto lines = read_csv(content);
  if (lines.empty()) format_error(path, 1, "missing header");
  const auto& header = lines.front();
  if (header.fields.size() != 2 || header.fields[0] != "id" || header.fields[1] != "split")
    format_error(path, header.number, "malformed header (expected id,split)");
  SplitMap out;
  std::unordered_set<std::string> seen;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& line = lines[l];
    if (line.fields.size() != 2) format_error(path, line.number, "ragged row");
    std::string id(line.fields[0]);
    if (id.empty()) format_error(path, line.number, "empty id");
    if (!seen.insert(id).second) format_error(path, line.number, "duplicate id '" + id + "'");
    Split s;
    if (line.fields[1] == "train")
      s = Split::Train;
    else if (line.fields[1] == "test")
      s = Split::Test;
    else
      format_error(path, line.number, "unknown split token '" + std::string(line.fields[1]) + "'");
    out.entries.emplace_back(std::move(id), s);
  }
  if (out.count(Split::Train) == 0) fail(ErrorKind::Format, path.string() + ": train split is empty");
  if (out.count(Split::Test) == 0) fail(ErrorKind::Format, path.string() + ": test split is empty");
  return out;
}

AttributeSchema load_schema(const std::filesystem::path& path) {
  auto content = text::read_file(path);
  std::vector<Attribute> attrs;
  std::size_t number = 0;
  std::istringstream in(content);
  std::string raw;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) format_error(path, number, "expected 'name = class_count'");
    auto name = text::trim(line.substr(0, eq));
    long long count = 0;
    if (!text::parse_int(line.substr(eq + 1), count) || count < 2 || count > 1000)
      format_error(path, number, "invalid class count");
    if (name == "malignancy") {
      if (count != kMalignancyClasses) format_error(path, number, "malignancy must have 2 classes");
      continue;
    }
    attrs.push_back({std::string(name), static_cast<int>(count)});
  }
  if (attrs.empty()) fail(ErrorKind::Format, path.string() + ": schema declares no attributes");
  try {
    return AttributeSchema(std::move(attrs));
  } catch (const Error& e) {
    fail(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::string out = "id";
  for (std::size_t c = 0; c < features.dim(); ++c) out += ",f" + std::to_string(c);
  out += '\n';
  for (std::size_t r = 0; r < features.size(); ++r) {
    out += features.ids[r];
    for (double v : features.data.row(r)) {
      out += ',';
      out += text::format_double(v);
    }
    out += '\n';
  }
  text::write_file(path, out);
}

void write_annotations(const std::filesystem::path& path, const AnnotationTable& table) {
  std::string out = "id,malignancy";
  for (const auto& a : table.schema().attributes()) out += "," + a.name;
  out += '\n';
  for (const auto& r : table.records()) {
    out += r.id + "," + std::to_string(r.malignancy);
    for (int v : r.attribute_labels) out += "," + std::to_string(v);
    out += '\n';
  }
  text::write_file(path, out);
}

void write_split(const std::filesystem::path& path, const SplitMap& split) {
  std::string out = "id,split\n";
  for (const auto& [id, s] : split.entries) out += id + (s == Split::Train ? ",train\n" : ",test\n");
  text::write_file(path, out);
}

void write_schema(const std::filesystem::path& path, const AttributeSchema& schema) {
  std::string out = "# attribute = class_count (malignancy is fixed at 2 classes)\n";
  for (const auto& a : schema.attributes()) out += a.name + " = " + std::to_string(a.class_count) + "\n";
  text::write_file(path, out);
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  write_features(dir / "features.csv", dataset.features());
  write_annotations(dir / "annotations.csv", dataset.annotations());
  write_split(dir / "split.csv", dataset.split_map());
  write_schema(dir / "schema.txt", dataset.schema());
}

Dataset load_dataset(const std::filesystem::path& features, const std::filesystem::path& annotations,
                     const std::filesystem::path& split, const AttributeSchema& schema) {
  return assemble_dataset(load_features(features), load_annotations(annotations, schema), load_split(split));
}

}  // namespace credanno
