#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skillspace/embed.hpp"
#include "skillspace/error.hpp"

namespace skillspace::model {

using embed::EmbeddingModel;

class ModelError : public Error {
 public:
  ModelError(std::string kind, const std::string& message, std::uint64_t offset)
      : Error(std::move(kind), message), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

inline constexpr char kMagic[4] = {'S', 'K', 'S', 'P'};
inline constexpr std::uint32_t kFormatVersion = 1;

// Binary layout (all integers and floats little-endian):
//
//   "SKSP" u32 version u32 dim
//   config: u32 negatives u32 epochs f32 alpha_start f32 alpha_min u32 window
//           u64 seed f64 unigram_power u32 threads u64 min_count f64 sample
//           u8 tag_flags
//   i64 max_train_timestamp
//   u64 V, then V x { u32 len, bytes, u64 count, u32 n, n x u32 language tag }
//   u64 T, then T x { u8 kind, u32 len, bytes, u64 count }
//   input V*dim f32, tags T*dim f32, output V*dim f32 (row-major)
std::string serialize(const EmbeddingModel& model);
EmbeddingModel deserialize(std::span<const char> bytes);

void save(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load(const std::filesystem::path& path);

enum class EntityKind : std::uint8_t { kApi, kDeveloper, kProject, kLanguage };

struct EntityRef {
  EntityKind kind = EntityKind::kApi;
  std::string id;

  // "api:numpy", "dev:alice", "proj:org/repo", "lang:PY". A bare string is
  // taken as an API.
  static EntityRef parse(std::string_view text);
  std::string to_string() const;

  auto operator<=>(const EntityRef&) const = default;
};

std::string_view entity_prefix(EntityKind kind);
std::optional<embed::TagKind> tag_kind_of(EntityKind kind);
EntityKind entity_kind_of(embed::TagKind kind);

// Raw input-side row: input matrix for APIs, tag matrix otherwise.
std::optional<std::span<const float>> vector(const EmbeddingModel& model,
                                             const EntityRef& ref);

enum class ExportWhich { kApi, kTags, kAll };

// word2vec text layout: "<rows> <dim>" then "<id> v1 ... vdim" per line.
// Tags are always namespaced; APIs only when which == kAll.
void export_text(const EmbeddingModel& model, const std::filesystem::path& path,
                 ExportWhich which);
std::string export_text(const EmbeddingModel& model, ExportWhich which);

struct TextVectors {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<float>>> rows;
};
TextVectors read_text_vectors(const std::filesystem::path& path);
TextVectors parse_text_vectors(std::string_view text);

}  // namespace skillspace::model
