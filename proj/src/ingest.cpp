#include "vigil/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>

#include "vigil/errors.hpp"
#include "vigil/model.hpp"
#include "vigil/netpbm.hpp"

namespace vigil {

namespace fs = std::filesystem;

std::optional<uint64_t> parse_source_filename(const std::string& name) {
  constexpr const char* kPrefix = "frame_";
  constexpr size_t kPrefixLen = 6;
  if (name.size() < kPrefixLen + 6 + 4) return std::nullopt;
  if (name.compare(0, kPrefixLen, kPrefix) != 0) return std::nullopt;
  std::string ext = name.substr(name.size() - 4);
  if (ext != ".pgm" && ext != ".ppm") return std::nullopt;
  std::string digits = name.substr(kPrefixLen, name.size() - kPrefixLen - 4);
  if (digits.size() < 6) return std::nullopt;
  uint64_t value = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    uint64_t next = value * 10 + static_cast<uint64_t>(c - '0');
    if (next < value) return std::nullopt;
    value = next;
  }
  return value;
}

FrameFetcher::FrameFetcher(FetcherConfig config) : config_(std::move(config)) {
  if (config_.frame_interval_ms < 0)
    throw ConfigError("frameIntervalMs must be non-negative");
  if (config_.stream_id.empty()) throw ConfigError("streamId must be non-empty");
}

void FrameFetcher::open() {
  std::error_code ec;
  if (!fs::exists(config_.path, ec) || ec)
    throw SourceGone("source path does not exist: " + config_.path.string());
  if (config_.source_kind == FetcherConfig::SourceKind::kDirectory) {
    if (!fs::is_directory(config_.path, ec))
      throw SourceGone("source path is not a directory: " + config_.path.string());
    std::vector<std::pair<uint64_t, fs::path>> indexed;
    for (const auto& entry : fs::directory_iterator(config_.path)) {
      if (!entry.is_regular_file()) continue;
      auto index = parse_source_filename(entry.path().filename().string());
      if (index) indexed.emplace_back(*index, entry.path());
    }
    std::sort(indexed.begin(), indexed.end());
    files_.reserve(indexed.size());
    for (auto& [index, path] : indexed) files_.push_back(std::move(path));
  } else {
    pipe_.open(config_.path, std::ios::binary);
    if (!pipe_) throw SourceGone("cannot open pipe: " + config_.path.string());
  }
}

bool FrameFetcher::take_slot() {
  bool selected = source_counter_ % (static_cast<uint64_t>(config_.frame_skip) + 1) == 0;
  source_counter_++;
  return selected;
}

std::optional<runtime::SpoutEmission> FrameFetcher::next_from_directory() {
  while (file_cursor_ < files_.size()) {
    fs::path path = files_[file_cursor_++];
    if (!take_slot()) continue;
    netpbm::Image img;
    try {
      img = netpbm::read_file(path);
    } catch (const Error& e) {
      std::cerr << "warning: skipping unreadable frame " << path.string() << ": " << e.what()
                << '\n';
      decode_errors_++;
      continue;
    }
    Frame frame = netpbm::to_frame(img, config_.stream_id, next_sequence_);
    if (!img.timestamp_ms)
      frame.timestamp_ms = static_cast<int64_t>(next_sequence_) * config_.frame_interval_ms;
    next_sequence_++;
    return runtime::SpoutEmission{kStream, encode_frame(frame)};
  }
  return std::nullopt;
}

std::optional<runtime::SpoutEmission> FrameFetcher::next_from_pipe() {
  constexpr size_t kReadChunk = 64 * 1024;
  while (!pipe_done_ || !pipe_buffer_.empty()) {
    Frame frame;
    size_t consumed = 0;
    bool have_frame = false;
    if (!pipe_buffer_.empty()) {
      try {
        frame = decode_frame_prefix(pipe_buffer_, consumed);
        have_frame = true;
      } catch (const Truncated&) {
        if (pipe_done_) {
          std::cerr << "warning: discarding " << pipe_buffer_.size()
                    << " trailing bytes of partial frame record\n";
          decode_errors_++;
          pipe_buffer_.clear();
          return std::nullopt;
        }
      } catch (const Error& e) {
        // No record framing to resync on; treat the rest of the stream as lost.
        std::cerr << "warning: corrupt frame record in pipe: " << e.what() << '\n';
        decode_errors_++;
        pipe_buffer_.clear();
        pipe_done_ = true;
        return std::nullopt;
      }
    }
    if (have_frame) {
      pipe_buffer_.erase(pipe_buffer_.begin(),
                         pipe_buffer_.begin() + static_cast<std::ptrdiff_t>(consumed));
      if (!take_slot()) continue;
      frame.stream_id = config_.stream_id;
      frame.sequence_nr = next_sequence_++;
      return runtime::SpoutEmission{kStream, encode_frame(frame)};
    }
    size_t old_size = pipe_buffer_.size();
    pipe_buffer_.resize(old_size + kReadChunk);
    pipe_.read(reinterpret_cast<char*>(pipe_buffer_.data() + old_size),
               static_cast<std::streamsize>(kReadChunk));
    size_t got = static_cast<size_t>(pipe_.gcount());
    pipe_buffer_.resize(old_size + got);
    if (got == 0) pipe_done_ = true;
  }
  return std::nullopt;
}

std::optional<runtime::SpoutEmission> FrameFetcher::next() {
  if (config_.source_kind == FetcherConfig::SourceKind::kDirectory)
    return next_from_directory();
  return next_from_pipe();
}

}  // namespace vigil
