#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tsc/errors.hpp"
#include "tsc/signal.hpp"
#include "tsc/sim.hpp"

namespace tsc {

// Square bit matrix, packed row-major (1 bit per cell).
class StateMatrix {
public:
    explicit StateMatrix(int size)
        : size_(size), words_((static_cast<size_t>(size) * size + 63) / 64, 0) {}

    int size() const { return size_; }
    bool get(int row, int col) const {
        size_t i = static_cast<size_t>(row) * size_ + col;
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(int row, int col) {
        size_t i = static_cast<size_t>(row) * size_ + col;
        words_[i >> 6] |= uint64_t{1} << (i & 63);
    }
    size_t popcount() const;
    bool operator==(const StateMatrix&) const = default;

    // row-major, 1 bit per cell, MSB-first within each byte
    std::vector<uint8_t> packed_bytes() const;
    std::string ascii() const;

private:
    int size_;
    std::vector<uint64_t> words_;
};

struct Band {
    int start_col = 0;
    int width = 0;
};

// Column-band assignment for the QR-style state matrix: one thermometer
// band per approach queue, a signal band split between the two rings, a
// time-of-day thermometer band and a day-of-week block band.
struct EncoderLayout {
    int size = 0;
    std::vector<Band> queue_bands;       // per approach
    Band signal_band;                    // split into two ring halves
    Band time_band;
    Band day_band;
    std::array<int, 2> ring_phase_count{};  // blocks per ring = phases * 3 intervals

    void validate() const;  // bands disjoint, nonempty, covering all columns
};

// Supported sizes: 80 (full model) and 24 (reduced model).
EncoderLayout layout_for(int size, const RingBarrierPlan& plan, int n_approaches);

// Builds the state matrix. Queue bands fill bottom-up, capped at `size`
// (longer queues are indistinguishable); the signal band sets one row block
// per (phase, interval) per ring; time of day fills bottom-up in proportion
// to the second of day; day of week sets one of seven row blocks.
StateMatrix encode(const std::vector<int>& queues, const RingBarrierState& signal,
                   const SimClock& clock, const EncoderLayout& layout,
                   const RingBarrierPlan& plan);

// The 4 most recent matrices, oldest first. A fresh stack repeats its
// first frame.
class FrameStack {
public:
    static constexpr int kFrames = 4;

    FrameStack() = default;  // empty; assign before use
    explicit FrameStack(std::shared_ptr<const StateMatrix> first) {
        frames_.fill(std::move(first));
    }
    void push(std::shared_ptr<const StateMatrix> m) {
        for (int i = 0; i + 1 < kFrames; ++i) frames_[i] = frames_[i + 1];
        frames_[kFrames - 1] = std::move(m);
    }
    const StateMatrix& frame(int i) const { return *frames_[i]; }
    std::shared_ptr<const StateMatrix> frame_ptr(int i) const { return frames_[i]; }

    bool operator==(const FrameStack& o) const {
        for (int i = 0; i < kFrames; ++i)
            if (!(*frames_[i] == *o.frames_[i])) return false;
        return true;
    }

private:
    std::array<std::shared_ptr<const StateMatrix>, kFrames> frames_;
};

// Frames as network input channels, oldest first, 0/1 doubles.
void stack_to_input(const FrameStack& stack, std::vector<double>& out);

}  // namespace tsc
