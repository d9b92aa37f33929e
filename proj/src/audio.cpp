#include "asrh/audio.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdint>
#include <fstream>
#include <vector>

#include "asrh/checksum.hpp"
#include "asrh/error.hpp"
#include "asrh/process.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace asrh::source {
namespace {

constexpr const char* kIndexName = "audio_index.json";

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

json read_index(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return json::object();
  json j = json::parse(in, nullptr, false);
  return j.is_object() ? j : json::object();
}

void write_index(const fs::path& path, const json& index) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << index.dump(2) << '\n';
    out.flush();
    if (!out) throw fs::filesystem_error("cannot write audio index", tmp, std::make_error_code(std::errc::io_error));
  }
  fs::rename(tmp, path);
}

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of("\r\n");
  if (end == std::string::npos) return {};
  auto begin = text.rfind('\n', end);
  return text.substr(begin == std::string::npos ? 0 : begin + 1, end - (begin == std::string::npos ? 0 : begin + 1) + 1);
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

std::optional<double> probe_wav_duration(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  unsigned char hdr[12];
  if (!in.read(reinterpret_cast<char*>(hdr), 12)) return std::nullopt;
  if (std::string_view(reinterpret_cast<char*>(hdr), 4) != "RIFF" ||
      std::string_view(reinterpret_cast<char*>(hdr) + 8, 4) != "WAVE") {
    return std::nullopt;
  }
  std::uint32_t byte_rate = 0;
  unsigned char chunk[8];
  while (in.read(reinterpret_cast<char*>(chunk), 8)) {
    const std::string_view id(reinterpret_cast<char*>(chunk), 4);
    const std::uint32_t size = le32(chunk + 4);
    if (id == "fmt ") {
      std::vector<unsigned char> fmt(size);
      if (size < 16 || !in.read(reinterpret_cast<char*>(fmt.data()), size)) return std::nullopt;
      byte_rate = le32(fmt.data() + 8);
    } else if (id == "data") {
      if (byte_rate == 0) return std::nullopt;
      return static_cast<double>(size) / byte_rate;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
    }
    if (size & 1u && id == "fmt ") in.seekg(1, std::ios::cur);
  }
  return std::nullopt;
}

void throw_storage_error(const fs::filesystem_error& e, const std::string& context) {
  const int v = e.code().value();
  if (e.code().category() == std::generic_category() || e.code().category() == std::system_category()) {
    if (v == ENOSPC || v == EDQUOT) throw Error(ErrorCode::DiskFull, context + ": " + e.what());
  }
  throw Error(ErrorCode::DownloadFailed, context + ": " + e.what());
}

AudioCache::AudioCache(fs::path workdir) : workdir_(std::move(workdir)) {}

std::mutex& AudioCache::video_lock(const std::string& video_id) {
  std::lock_guard lock(index_mutex_);
  auto& slot = video_locks_[video_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::optional<AudioAsset> AudioCache::lookup(const std::string& video_id) {
  IndexEntry entry;
  {
    std::lock_guard lock(index_mutex_);
    const json index = read_index(workdir_ / kIndexName);
    auto it = index.find(video_id);
    if (it == index.end() || !it->is_object()) return std::nullopt;
    entry.file = it->value("file", "");
    entry.checksum = it->value("checksum", "");
  }
  if (entry.file.empty()) return std::nullopt;
  const fs::path file = workdir_ / entry.file;
  std::error_code ec;
  if (!fs::is_regular_file(file, ec)) return std::nullopt;
  std::string actual;
  try {
    actual = sha256_file(file);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (actual != entry.checksum) return std::nullopt;
  AudioAsset a;
  a.video_id = video_id;
  a.file_path = file;
  a.format = file.extension().string().substr(file.has_extension() ? 1 : 0);
  a.duration_seconds = probe_wav_duration(file);
  a.checksum = actual;
  return a;
}

void AudioCache::record(const std::string& video_id, const IndexEntry& entry) {
  std::lock_guard lock(index_mutex_);
  const fs::path path = workdir_ / kIndexName;
  json index = read_index(path);
  index[video_id] = {{"file", entry.file}, {"checksum", entry.checksum}};
  write_index(path, index);
}

AudioAsset AudioCache::get_or_fetch(const std::string& video_id, const Fetch& fetch) {
  std::lock_guard per_video(video_lock(video_id));
  if (auto hit = lookup(video_id)) return *hit;

  const fs::path staging = workdir_ / ".staging" / video_id;
  fs::path dest;
  try {
    fs::remove_all(staging);
    fs::create_directories(staging);
  } catch (const fs::filesystem_error& e) {
    throw_storage_error(e, video_id);
  }

  fetch(staging);

  try {
    std::vector<fs::path> produced;
    for (const auto& de : fs::directory_iterator(staging)) {
      if (de.is_regular_file()) produced.push_back(de.path());
    }
    if (produced.size() != 1) {
      fs::remove_all(staging);
      throw Error(ErrorCode::DownloadFailed,
                  video_id + ": expected one audio file, found " + std::to_string(produced.size()));
    }
    const auto ext = produced[0].extension().string();
    const fs::path rel = fs::path("audio") / (video_id + ext);
    dest = workdir_ / rel;
    fs::create_directories(dest.parent_path());
    fs::rename(produced[0], dest);
    fs::remove_all(staging);
    IndexEntry entry{rel.generic_string(), sha256_file(dest)};
    record(video_id, entry);
    AudioAsset a;
    a.video_id = video_id;
    a.file_path = dest;
    a.format = ext.empty() ? "" : ext.substr(1);
    a.duration_seconds = probe_wav_duration(dest);
    a.checksum = entry.checksum;
    return a;
  } catch (const fs::filesystem_error& e) {
    throw_storage_error(e, video_id);
  }
}

AudioCache& audio_cache_for(const fs::path& workdir) {
  static std::mutex m;
  static std::map<fs::path, std::unique_ptr<AudioCache>> caches;
  std::lock_guard lock(m);
  std::error_code ec;
  fs::path key = fs::weakly_canonical(workdir, ec);
  if (ec) key = fs::absolute(workdir);
  auto& slot = caches[key];
  if (!slot) slot = std::make_unique<AudioCache>(workdir);
  return *slot;
}

ExternalDownloader::ExternalDownloader(std::string program, std::ptrdiff_t concurrency)
    : program_(std::move(program)), slots_(std::max<std::ptrdiff_t>(1, concurrency)) {}

void ExternalDownloader::download(const std::string& url, const std::string& video_id, const fs::path& staging_dir) {
  const auto exe = find_executable(program_);
  if (!exe) throw Error(ErrorCode::DownloaderMissing, "audio downloader not found: " + program_);
  SlotGuard slot(slots_);
  const auto r = run_process({exe->string(), url, (staging_dir / (video_id + ".%(ext)s")).string()});
  if (r.exec_failed) throw Error(ErrorCode::DownloaderMissing, "cannot execute " + exe->string());
  if (r.exit_code != 0) {
    if (r.err.find("No space left on device") != std::string::npos) {
      throw Error(ErrorCode::DiskFull, video_id + ": " + last_line(r.err));
    }
    throw Error(ErrorCode::DownloadFailed,
                video_id + ": downloader exited with " + std::to_string(r.exit_code) + ": " + last_line(r.err));
  }
}

}  // namespace asrh::source
