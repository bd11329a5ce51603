#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vigil/runtime.hpp"

namespace vigil {

struct FetcherConfig {
  enum class SourceKind { kDirectory, kRawPipe };
  SourceKind source_kind = SourceKind::kDirectory;
  std::filesystem::path path;
  int64_t frame_interval_ms = 0;  // 0 = as fast as backpressure allows
  uint32_t frame_skip = 0;        // emit every (frame_skip + 1)-th source frame
  std::string stream_id = "cam0";
};

// Source spout. Directory mode reads netpbm files named frame_NNNNNN.pgm or
// .ppm in ascending numeric order; rawPipe mode reads consecutive encoded
// frame records from a pipe or file. Sequence numbers are reassigned
// 0,1,2,... after skip filtering; unreadable inputs are skipped with a
// warning and counted.
class FrameFetcher final : public runtime::Spout {
 public:
  explicit FrameFetcher(FetcherConfig config);

  void open() override;
  std::optional<runtime::SpoutEmission> next() override;
  int64_t emit_interval_ms() const override { return config_.frame_interval_ms; }
  uint64_t decode_errors() const override { return decode_errors_; }

  // Stream name all frames are emitted on.
  static constexpr const char* kStream = "raw";

 private:
  std::optional<runtime::SpoutEmission> next_from_directory();
  std::optional<runtime::SpoutEmission> next_from_pipe();
  bool take_slot();  // skip filter: true for every (frame_skip + 1)-th source frame

  FetcherConfig config_;
  std::vector<std::filesystem::path> files_;
  size_t file_cursor_ = 0;
  std::ifstream pipe_;
  std::vector<uint8_t> pipe_buffer_;
  bool pipe_done_ = false;
  uint64_t source_counter_ = 0;
  uint64_t next_sequence_ = 0;
  uint64_t decode_errors_ = 0;
};

// Matches frame_NNNNNN.pgm / frame_NNNNNN.ppm (six or more digits) and
// returns the numeric index.
std::optional<uint64_t> parse_source_filename(const std::string& name);

}  // namespace vigil
