// SPDX-License-Identifier: Apache-2.0

#include "taycast/trajectory_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include <unistd.h>

namespace taycast {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'T', 'J'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms unsupported");

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    } else {
        return v;
    }
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), file_(std::fopen(path.c_str(), "wb")) {
        if (!file_) throw std::runtime_error("write_trajectory: cannot open " + path);
    }

    template <typename T>
    void put(T v) {
        const T le = to_little(v);
        if (std::fwrite(&le, sizeof(T), 1, file_.get()) != 1) {
            throw std::runtime_error("write_trajectory: write failure on " + path_);
        }
    }

    void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }

    void finish() {
        if (std::fflush(file_.get()) != 0 || ::fsync(::fileno(file_.get())) != 0) {
            throw std::runtime_error("write_trajectory: flush failure on " + path_);
        }
    }

private:
    std::string path_;
    FilePtr file_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path), file_(std::fopen(path.c_str(), "rb")) {
        if (!file_) throw std::runtime_error("read_trajectory: cannot open " + path);
        std::fseek(file_.get(), 0, SEEK_END);
        remaining_ = static_cast<std::size_t>(std::ftell(file_.get()));
        std::fseek(file_.get(), 0, SEEK_SET);
    }

    template <typename T>
    T get(const char* what) {
        if (remaining_ < sizeof(T)) {
            throw std::runtime_error("read_trajectory: " + path_ + " truncated reading " + what +
                                     ": expected " + std::to_string(sizeof(T)) + " bytes, " +
                                     std::to_string(remaining_) + " left");
        }
        T v{};
        if (std::fread(&v, sizeof(T), 1, file_.get()) != 1) {
            throw std::runtime_error("read_trajectory: read failure on " + path_);
        }
        remaining_ -= sizeof(T);
        return to_little(v);
    }

    double get_f64(const char* what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }

    std::size_t remaining() const { return remaining_; }

private:
    std::string path_;
    FilePtr file_;
    std::size_t remaining_ = 0;
};

} // namespace

void write_trajectory(const std::string& path, const Trajectory& trajectory) {
    if (trajectory.slots.empty()) {
        throw std::invalid_argument("write_trajectory: no slots");
    }
    if (trajectory.features.size() != trajectory.slots.size()) {
        throw std::invalid_argument("write_trajectory: " + std::to_string(trajectory.features.size()) +
                                    " feature rows for " + std::to_string(trajectory.slots.size()) +
                                    " slots");
    }
    const std::size_t steps = trajectory.timesteps.size();
    for (std::size_t s = 0; s < trajectory.features.size(); ++s) {
        if (trajectory.features[s].size() != steps) {
            throw std::invalid_argument("write_trajectory: slot " + trajectory.slots[s].name() +
                                        " has " + std::to_string(trajectory.features[s].size()) +
                                        " tensors for " + std::to_string(steps) + " timesteps");
        }
        for (const auto& f : trajectory.features[s]) {
            if (f.shape != trajectory.shape) {
                throw std::invalid_argument("write_trajectory: tensor shape " + shape_string(f.shape) +
                                            " differs from declared " + shape_string(trajectory.shape));
            }
        }
    }

    Writer w(path);
    for (char c : kMagic) w.put(static_cast<std::uint8_t>(c));
    w.put(kVersion);
    w.put(static_cast<std::uint32_t>(trajectory.slots.size()));
    for (const SlotId& slot : trajectory.slots) {
        w.put(static_cast<std::uint32_t>(slot.layer));
        w.put(static_cast<std::uint32_t>(slot.sub));
    }
    w.put(static_cast<std::uint32_t>(trajectory.shape.size()));
    for (std::size_t d : trajectory.shape) w.put(static_cast<std::uint64_t>(d));
    w.put(static_cast<std::uint32_t>(steps));
    for (double t : trajectory.timesteps) w.put_f64(t);
    for (const auto& slot_features : trajectory.features) {
        for (const auto& f : slot_features) {
            for (double v : f.data) w.put_f64(v);
        }
    }
    w.finish();
}

Trajectory read_trajectory(const std::string& path) {
    Reader r(path);

    char magic[4];
    for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>("magic"));
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("read_trajectory: " + path + " has bad magic, not a trajectory file");
    }
    const auto version = r.get<std::uint32_t>("version");
    if (version != kVersion) {
        throw std::runtime_error("read_trajectory: " + path + " has unsupported version " +
                                 std::to_string(version));
    }

    Trajectory t;
    const auto slot_count = r.get<std::uint32_t>("slot count");
    if (slot_count == 0) throw std::runtime_error("read_trajectory: " + path + " declares zero slots");
    t.slots.reserve(slot_count);
    for (std::uint32_t i = 0; i < slot_count; ++i) {
        const auto layer = r.get<std::uint32_t>("slot layer");
        const auto sub = r.get<std::uint32_t>("slot submodule");
        if (sub > 2) {
            throw std::runtime_error("read_trajectory: " + path + " has invalid submodule id " +
                                     std::to_string(sub));
        }
        t.slots.push_back(SlotId{static_cast<int>(layer), static_cast<Submodule>(sub)});
    }

    const auto rank = r.get<std::uint32_t>("shape rank");
    if (rank == 0) throw std::runtime_error("read_trajectory: " + path + " declares rank-0 shape");
    t.shape.reserve(rank);
    for (std::uint32_t i = 0; i < rank; ++i) {
        t.shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>("shape dim")));
    }

    const auto steps = r.get<std::uint32_t>("timestep count");
    t.timesteps.reserve(steps);
    for (std::uint32_t i = 0; i < steps; ++i) t.timesteps.push_back(r.get_f64("timestep"));

    const std::size_t elems = shape_element_count(t.shape);
    const std::size_t expected = static_cast<std::size_t>(slot_count) * steps * elems * 8;
    if (r.remaining() != expected) {
        throw std::runtime_error("read_trajectory: " + path + " payload length mismatch: expected " +
                                 std::to_string(expected) + " bytes, found " +
                                 std::to_string(r.remaining()));
    }

    t.features.resize(slot_count);
    for (std::uint32_t s = 0; s < slot_count; ++s) {
        t.features[s].reserve(steps);
        for (std::uint32_t i = 0; i < steps; ++i) {
            std::vector<double> data(elems);
            for (auto& v : data) v = r.get_f64("payload");
            t.features[s].emplace_back(t.shape, std::move(data));
        }
    }
    return t;
}

} // namespace taycast
