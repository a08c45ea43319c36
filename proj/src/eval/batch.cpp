#include "ponzilens/error.hpp"
#include "ponzilens/eval.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

namespace ponzilens {

namespace {

/// Append-only journal; each record is flushed to disk before returning.
class Journal
{
public:
    explicit Journal(const std::filesystem::path& path)
    {
        drop_torn_tail(path);
        fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd_ < 0)
            throw Error(ErrorCode::IoError, "cannot open journal " + path.string());
    }
    Journal(const Journal&) = delete;
    Journal& operator=(const Journal&) = delete;
    ~Journal()
    {
        if (fd_ >= 0)
            ::close(fd_);
    }

    void append(const DetectionReport& r)
    {
        std::string line = nlohmann::json{{"id", r.contract_id}, {"report", r.to_json()}}.dump() + "\n";
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            ssize_t n = ::write(fd_, p, left);
            if (n < 0)
                throw Error(ErrorCode::IoError, "journal write failed");
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0)
            throw Error(ErrorCode::IoError, "journal fsync failed");
    }

private:
    static void drop_torn_tail(const std::filesystem::path& path)
    {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec))
            return;
        std::ifstream in(path, std::ios::binary);
        std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (data.empty() || data.back() == '\n')
            return;
        std::size_t keep = data.rfind('\n');
        std::filesystem::resize_file(path, keep == std::string::npos ? 0 : keep + 1);
    }

    int fd_ = -1;
};

}  // namespace

std::vector<DetectionReport> read_journal(const std::filesystem::path& path)
{
    std::vector<DetectionReport> out;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("report"))
            continue;  // torn or foreign line
        try {
            out.push_back(DetectionReport::from_json(j["report"]));
        } catch (const Error&) {
        }
    }
    return out;
}

std::vector<DetectionReport> run_batch(const DatasetManifest& manifest, const DetectConfig& cfg, const BatchOptions& options)
{
    manifest.validate();
    const std::size_t total = manifest.entries.size();
    std::vector<std::optional<DetectionReport>> results(total);
    std::size_t done = 0;

    std::mutex mutex;
    std::optional<Journal> journal;
    if (options.journal) {
        std::map<std::string, DetectionReport> previous;
        for (auto& r : read_journal(*options.journal))
            previous.insert_or_assign(r.contract_id, std::move(r));
        for (std::size_t i = 0; i < total; ++i) {
            auto it = previous.find(manifest.entries[i].id);
            if (it == previous.end())
                continue;
            results[i] = std::move(it->second);
            ++done;
            if (options.on_report)
                options.on_report(*results[i], done, total);
        }
        journal.emplace(*options.journal);
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < total; ++i)
        if (!results[i])
            pending.push_back(i);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (!options.stop.stop_requested()) {
            std::size_t k = next.fetch_add(1);
            if (k >= pending.size())
                return;
            const ManifestEntry& e = manifest.entries[pending[k]];
            DetectionReport r = detect_contract(e.id, e.path_or_address, cfg);
            std::lock_guard lock(mutex);
            if (journal)
                journal->append(r);
            results[pending[k]] = std::move(r);
            ++done;
            if (options.on_report)
                options.on_report(*results[pending[k]], done, total);
        }
    };

    std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.concurrency)), pending.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }

    std::vector<DetectionReport> out;
    for (auto& r : results)
        if (r)
            out.push_back(std::move(*r));
    return out;
}

void write_reports(const std::filesystem::path& path, const std::vector<DetectionReport>& reports)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& r : reports)
        out << r.to_json().dump() << "\n";
}

std::vector<DetectionReport> read_reports(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::vector<DetectionReport> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty())
            continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw Error(ErrorCode::JsonError, path.string() + ":" + std::to_string(n) + " is not valid JSON");
        out.push_back(DetectionReport::from_json(j.contains("report") ? j["report"] : j));
    }
    return out;
}

}  // namespace ponzilens
