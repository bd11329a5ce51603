#include "vigil/sink.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vigil/chunk.hpp"
#include "vigil/errors.hpp"
#include "vigil/netpbm.hpp"

namespace fs = std::filesystem;

namespace vigil::sink {

namespace {

[[noreturn]] void throw_io(const std::string& what, int err) {
  std::string msg = what + ": " + std::strerror(err);
  if (err == ENOSPC) throw DiskFull(msg);
  if (err == EACCES || err == EPERM) throw PermissionDenied(msg);
  throw IoError(msg);
}

}  // namespace

const char* category_folder(Category category) {
  switch (category) {
    case Category::kEligible:
      return "EligibleFrames";
    case Category::kFace:
      return "Faces";
    case Category::kPerson:
      return "Persons";
  }
  throw InvariantViolation("unknown category");
}

std::string frame_filename(const std::string& stream_id, uint64_t sequence_nr) {
  char seq[24];
  std::snprintf(seq, sizeof seq, "%010llu", static_cast<unsigned long long>(sequence_nr));
  return stream_id + "_" + seq + ".ppm";
}

std::optional<ParsedFrameName> parse_frame_filename(const std::string& name) {
  constexpr const char* kExt = ".ppm";
  if (name.size() < 10 + 1 + 4 + 1) return std::nullopt;  // id + '_' + digits + ext
  if (!name.ends_with(kExt)) return std::nullopt;
  std::string stem = name.substr(0, name.size() - 4);
  size_t underscore = stem.rfind('_');
  if (underscore == std::string::npos || underscore == 0) return std::nullopt;
  std::string digits = stem.substr(underscore + 1);
  if (digits.size() < 10) return std::nullopt;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  ParsedFrameName parsed;
  parsed.stream_id = stem.substr(0, underscore);
  try {
    parsed.sequence_nr = std::stoull(digits);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return parsed;
}

void write_file_atomic(const std::string& path, std::span<const uint8_t> bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open " + tmp, errno);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      int err = errno;
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw_io("write failed for " + tmp, err);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw_io("rename to " + path + " failed", ec.value());
  }
}

FrameWriter::FrameWriter(SinkConfig cfg) : cfg_(std::move(cfg)) {
  for (Category c : {Category::kEligible, Category::kFace, Category::kPerson}) {
    std::error_code ec;
    fs::create_directories(fs::path(cfg_.out_root) / category_folder(c), ec);
    if (ec) throw_io(std::string("cannot create folder ") + category_folder(c), ec.value());
  }
}

WriteResult FrameWriter::write_frame(const Frame& frame, Category category) {
  validate_frame(frame);
  fs::path dir = fs::path(cfg_.out_root) / category_folder(category);
  fs::path path = dir / frame_filename(frame.stream_id, frame.sequence_nr);

  {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(frame.stream_id, frame.sequence_nr);
    auto& seen = seen_[static_cast<int>(category)];
    if (seen.contains(key)) return {true, path.string()};
    seen.insert(key);
  }

  auto data = netpbm::write_frame_ppm(frame);
  write_file_atomic(path.string(), data);
  return {false, path.string()};
}

uint64_t FrameWriter::written_count(Category category) const {
  std::lock_guard<std::mutex> lock(mu_);
  return seen_[static_cast<int>(category)].size();
}

double reduction_stats(uint64_t total_frames, uint64_t kept_frames) {
  if (total_frames == 0) throw ZeroTotal("no frames to compute reduction over");
  if (kept_frames > total_frames) {
    throw InvariantViolation("kept frames exceed total frames");
  }
  double pct = 100.0 * (1.0 - static_cast<double>(kept_frames) / static_cast<double>(total_frames));
  return std::round(pct * 100.0) / 100.0;
}

uint64_t ChunkerConfig::batch_size() const {
  if (!(frame_rate_fps > 0.0)) throw InvariantViolation("frame rate must be positive");
  if (!(desired_video_length_s > 0.0)) throw InvariantViolation("video length must be positive");
  long long n = std::llround(frame_rate_fps * desired_video_length_s);
  if (n < 1) throw InvariantViolation("batch size must be at least 1");
  return static_cast<uint64_t>(n);
}

std::vector<LedgerEntry> read_ledger(const std::string& path) {
  std::ifstream in(path);
  std::vector<LedgerEntry> entries;
  if (!in) return entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    LedgerEntry e;
    if (!(row >> e.first_seq >> e.last_seq >> e.chunk_file)) {
      throw DecodeError("malformed ledger line: " + line);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

Chunker::Chunker(SinkConfig sink_cfg, ChunkerConfig cfg)
    : sink_cfg_(std::move(sink_cfg)), cfg_(cfg) {
  cfg_.batch_size();  // validates
  std::error_code ec;
  fs::create_directories(fs::path(sink_cfg_.out_root) / category_folder(Category::kEligible), ec);
  ledger_path_ = (fs::path(sink_cfg_.out_root) / "chunks.ledger").string();
  entries_ = read_ledger(ledger_path_);
  for (const LedgerEntry& e : entries_) {
    for (uint64_t s = e.first_seq; s <= e.last_seq; ++s) packed_.insert(s);
  }
}

std::vector<Chunker::Pending> Chunker::scan() const {
  fs::path dir = fs::path(sink_cfg_.out_root) / category_folder(Category::kEligible);
  std::vector<Pending> pending;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    auto parsed = parse_frame_filename(entry.path().filename().string());
    if (!parsed) continue;
    if (packed_.contains(parsed->sequence_nr) || corrupt_.contains(parsed->sequence_nr)) continue;
    pending.push_back({parsed->sequence_nr, parsed->stream_id, entry.path().string()});
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.sequence_nr != b.sequence_nr) return a.sequence_nr < b.sequence_nr;
    return a.path < b.path;
  });
  return pending;
}

std::optional<std::string> Chunker::pack_batch(const std::vector<Pending>& batch) {
  std::vector<Frame> frames;
  frames.reserve(batch.size());
  for (const Pending& p : batch) {
    try {
      netpbm::Image image = netpbm::read_file(p.path);
      frames.push_back(netpbm::to_frame(image, p.stream_id, p.sequence_nr));
    } catch (const Error& e) {
      std::cerr << "warning: skipping unreadable frame file " << p.path << " (" << e.what()
                << ")\n";
      corrupt_.insert(p.sequence_nr);
      ++corrupt_count_;
      return std::nullopt;  // caller rescans without the bad file
    }
  }

  std::vector<uint8_t> bytes = pack_chunk(frames, cfg_.frame_rate_fps);
  uint64_t first = batch.front().sequence_nr;
  uint64_t last = batch.back().sequence_nr;
  std::string name =
      "chunk_" + std::to_string(first) + "_" + std::to_string(last) + ".fvc";
  std::string path = (fs::path(sink_cfg_.out_root) / name).string();
  write_file_atomic(path, bytes);

  std::ofstream ledger(ledger_path_, std::ios::app);
  if (!ledger) throw_io("cannot open ledger " + ledger_path_, errno);
  ledger << first << ' ' << last << ' ' << name << '\n';
  ledger.flush();
  if (!ledger) throw_io("ledger append failed", errno);

  for (const Pending& p : batch) packed_.insert(p.sequence_nr);
  entries_.push_back({first, last, name});
  return path;
}

std::vector<std::string> Chunker::drain(bool include_partial) {
  const uint64_t n = cfg_.batch_size();
  std::vector<std::string> written;
  for (;;) {
    std::vector<Pending> pending = scan();
    if (pending.empty()) break;
    if (pending.size() < n && !include_partial) break;

    size_t take = std::min<size_t>(pending.size(), static_cast<size_t>(n));
    std::vector<Pending> batch(pending.begin(), pending.begin() + take);
    auto path = pack_batch(batch);
    if (path) {
      written.push_back(*path);
      if (take == pending.size() && include_partial) break;
    }
    // On a corrupt file the batch was abandoned before packing; loop and
    // rescan so the next candidate takes its slot.
  }
  return written;
}

std::vector<std::string> Chunker::poll_and_chunk() { return drain(false); }

std::vector<std::string> Chunker::flush() { return drain(true); }

}  // namespace vigil::sink
