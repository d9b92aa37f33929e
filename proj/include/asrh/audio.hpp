#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include "asrh/source.hpp"

namespace asrh::source {

/// Duration of a PCM WAV file from its header, or nullopt when the file is
/// not a WAV file this parser understands.
std::optional<double> probe_wav_duration(const std::filesystem::path& file);

/// Content-addressed audio store under `<workdir>/audio`, indexed by
/// `<workdir>/audio_index.json`. A cached file is reused only while its
/// SHA-256 matches the index. Concurrent requests for one video fetch once.
class AudioCache {
 public:
  /// Writes exactly one file into the given empty staging directory.
  using Fetch = std::function<void(const std::filesystem::path& staging_dir)>;

  explicit AudioCache(std::filesystem::path workdir);

  AudioAsset get_or_fetch(const std::string& video_id, const Fetch& fetch);

  const std::filesystem::path& workdir() const noexcept { return workdir_; }

 private:
  struct IndexEntry {
    std::string file;
    std::string checksum;
  };

  std::optional<AudioAsset> lookup(const std::string& video_id);
  void record(const std::string& video_id, const IndexEntry& entry);
  std::mutex& video_lock(const std::string& video_id);

  std::filesystem::path workdir_;
  std::mutex index_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> video_locks_;
};

/// One cache per workdir, shared by every source in the process.
AudioCache& audio_cache_for(const std::filesystem::path& workdir);

/// Runs `<program> <url> <staging>/<video_id>.%(ext)s`, the yt-dlp output
/// template convention. At most `concurrency` downloads run at once.
class ExternalDownloader {
 public:
  explicit ExternalDownloader(std::string program = "yt-dlp", std::ptrdiff_t concurrency = 4);

  /// Throws DownloaderMissing, DownloadFailed or DiskFull.
  void download(const std::string& url, const std::string& video_id, const std::filesystem::path& staging_dir);

  const std::string& program() const noexcept { return program_; }

 private:
  std::string program_;
  std::counting_semaphore<> slots_;
};

/// Translates a filesystem failure into DiskFull (ENOSPC, EDQUOT) or DownloadFailed.
[[noreturn]] void throw_storage_error(const std::filesystem::filesystem_error& e, const std::string& context);

}  // namespace asrh::source
