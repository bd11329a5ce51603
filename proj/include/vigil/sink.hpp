#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vigil/model.hpp"

namespace vigil::sink {

enum class Category { kEligible, kFace, kPerson };

// Folder name under the output root for each category.
const char* category_folder(Category category);

struct SinkConfig {
  std::string out_root;
};

// `<streamId>_<sequenceNr padded to 10 digits>.ppm`; the padding makes
// lexicographic directory order equal numeric order.
std::string frame_filename(const std::string& stream_id, uint64_t sequence_nr);

struct ParsedFrameName {
  std::string stream_id;
  uint64_t sequence_nr = 0;
};
std::optional<ParsedFrameName> parse_frame_filename(const std::string& name);

// Writes `bytes` under `path` via a temp file in the same directory plus
// rename, so a crash never leaves a partial file under the final name.
void write_file_atomic(const std::string& path, std::span<const uint8_t> bytes);

struct WriteResult {
  bool deduped = false;
  std::string path;
};

// Disk writer with at-least-once dedupe: the first delivery of a
// (streamId, sequenceNr, category) writes a PPM, replays return Deduped.
class FrameWriter {
 public:
  explicit FrameWriter(SinkConfig cfg);  // creates the three folders

  WriteResult write_frame(const Frame& frame, Category category);
  uint64_t written_count(Category category) const;

 private:
  SinkConfig cfg_;
  mutable std::mutex mu_;
  std::set<std::pair<std::string, uint64_t>> seen_[3];
};

// 100 * (1 - kept/total), rounded to two decimals. Throws ZeroTotal.
double reduction_stats(uint64_t total_frames, uint64_t kept_frames);

struct ChunkerConfig {
  double frame_rate_fps = 25.0;
  double desired_video_length_s = 10.0;
  uint32_t poll_interval_ms = 500;

  // N = round(fps * length); the batch every non-final chunk must hold.
  uint64_t batch_size() const;
};

struct LedgerEntry {
  uint64_t first_seq = 0;
  uint64_t last_seq = 0;
  std::string chunk_file;
};

std::vector<LedgerEntry> read_ledger(const std::string& path);

// Polls the EligibleFrames folder and packs the N oldest unpacked frames
// into a chunk whenever at least N exist; every packed batch is recorded in
// an append-only ledger so restarts never re-pack. Unreadable frame files
// are skipped with a warning and counted.
class Chunker {
 public:
  Chunker(SinkConfig sink_cfg, ChunkerConfig cfg);

  // Full batches only; returns paths of chunks written by this call.
  std::vector<std::string> poll_and_chunk();
  // Packs any remaining frames as one short final chunk.
  std::vector<std::string> flush();

  uint64_t corrupt_count() const { return corrupt_count_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }

 private:
  struct Pending {
    uint64_t sequence_nr = 0;
    std::string stream_id;
    std::string path;
  };

  std::vector<Pending> scan() const;
  std::optional<std::string> pack_batch(const std::vector<Pending>& batch);
  std::vector<std::string> drain(bool include_partial);

  SinkConfig sink_cfg_;
  ChunkerConfig cfg_;
  std::string ledger_path_;
  std::set<uint64_t> packed_;
  std::set<uint64_t> corrupt_;
  std::vector<LedgerEntry> entries_;
  uint64_t corrupt_count_ = 0;
};

}  // namespace vigil::sink
