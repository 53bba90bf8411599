#pragma once

#include "fleetrel/types.hpp"

#include <filesystem>
#include <string>

#include <unistd.h>

namespace testutil {

inline fleetrel::MemErrorEvent mem_event(fleetrel::EpochSeconds t, int socket, int channel, int bank, std::int64_t row,
                                         std::int64_t column, std::int64_t byte = 0, const std::string& server = "s1")
{
    fleetrel::MemErrorEvent e;
    e.timestamp = t;
    e.server_id = server;
    e.socket = socket;
    e.channel = channel;
    e.bank = bank;
    e.row = row;
    e.column = column;
    e.byte_offset = byte;
    return e;
}

// fresh directory under the system temp dir, removed on destruction
class TempDir
{
  public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("fleetrel-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

} // namespace testutil
