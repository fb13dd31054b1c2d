#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "data_model.hpp"
#include "error.hpp"
#include "text.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("credanno_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    credanno::text::write_file(path_ / name, content);
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

struct Row {
  std::string id;
  std::vector<double> f;
  int malignancy;
  std::vector<int> attrs;
  bool train = true;
};

// Small hand-built dataset.
inline credanno::Dataset make_dataset(const credanno::AttributeSchema& schema, const std::vector<Row>& rows) {
  credanno::FeatureMatrix fm;
  credanno::AnnotationTable table(schema);
  credanno::SplitMap split;
  for (const auto& r : rows) {
    fm.ids.push_back(r.id);
    fm.data.append_row(r.f);
    table.add({r.id, r.malignancy, r.attrs});
    split.entries.emplace_back(r.id, r.train ? credanno::Split::Train : credanno::Split::Test);
  }
  return credanno::assemble_dataset(std::move(fm), std::move(table), std::move(split));
}

// Runs `fn` and returns the error message, or "" when nothing was thrown.
template <class F>
std::string error_of(F&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

inline bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace testing
