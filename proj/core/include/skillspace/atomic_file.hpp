#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace skillspace {

// Output file that only appears at its final path once commit() succeeds.
// Content is written to a sibling temporary file and renamed into place, so a
// failed run never leaves a partial output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target);
  ~AtomicFile();

  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  const std::filesystem::path& temp_path() const { return temp_; }
  const std::filesystem::path& target_path() const { return target_; }

  // Stream over the temporary file. Callers that write through another API
  // (zlib) use temp_path() instead and never touch stream().
  std::ofstream& stream();

  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

// Writes `content` to `path` atomically.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace skillspace
