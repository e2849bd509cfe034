#include "tsc/encoder.hpp"

#include <algorithm>
#include <bit>

namespace tsc {

size_t StateMatrix::popcount() const {
    size_t n = 0;
    for (uint64_t w : words_) n += static_cast<size_t>(std::popcount(w));
    return n;
}

std::vector<uint8_t> StateMatrix::packed_bytes() const {
    const size_t nbits = static_cast<size_t>(size_) * size_;
    std::vector<uint8_t> out((nbits + 7) / 8, 0);
    for (int r = 0; r < size_; ++r)
        for (int c = 0; c < size_; ++c) {
            size_t i = static_cast<size_t>(r) * size_ + c;
            if (get(r, c)) out[i >> 3] |= static_cast<uint8_t>(0x80u >> (i & 7));
        }
    return out;
}

std::string StateMatrix::ascii() const {
    std::string s;
    s.reserve(static_cast<size_t>(size_) * (size_ + 1));
    for (int r = 0; r < size_; ++r) {
        for (int c = 0; c < size_; ++c) s += get(r, c) ? '#' : '.';
        s += '\n';
    }
    return s;
}

void EncoderLayout::validate() const {
    std::vector<int> owner(size, -1);
    auto claim = [&](const Band& b) {
        if (b.width < 1) throw ConfigError("encoder band narrower than one column");
        for (int c = b.start_col; c < b.start_col + b.width; ++c) {
            if (c < 0 || c >= size) throw ConfigError("encoder band out of range");
            if (owner[c] != -1) throw ConfigError("encoder bands overlap");
            owner[c] = 1;
        }
    };
    for (const Band& b : queue_bands) claim(b);
    claim(signal_band);
    claim(time_band);
    claim(day_band);
    for (int c = 0; c < size; ++c)
        if (owner[c] == -1) throw ConfigError("encoder bands do not cover all columns");
}

EncoderLayout layout_for(int size, const RingBarrierPlan& plan, int n_approaches) {
    if (size != 80 && size != 24)
        throw ConfigError("unsupported state matrix size " + std::to_string(size));
    if (n_approaches != 4)
        throw ConfigError("layout defined for 4 approaches");

    EncoderLayout lay;
    lay.size = size;
    const int qw = size == 80 ? 12 : 3;
    const int sw = size == 80 ? 8 : 4;
    const int tw = size == 80 ? 12 : 4;
    const int dw = size == 80 ? 12 : 4;
    int col = 0;
    for (int a = 0; a < n_approaches; ++a) {
        lay.queue_bands.push_back({col, qw});
        col += qw;
    }
    lay.signal_band = {col, sw};
    col += sw;
    lay.time_band = {col, tw};
    col += tw;
    lay.day_band = {col, dw};
    col += dw;
    lay.ring_phase_count = {static_cast<int>(plan.ring_sequence(0).size()),
                            static_cast<int>(plan.ring_sequence(1).size())};
    lay.validate();
    return lay;
}

namespace {

// bottom-up thermometer across a band
void fill_thermometer(StateMatrix& m, const Band& band, int rows) {
    rows = std::clamp(rows, 0, m.size());
    for (int i = 0; i < rows; ++i)
        for (int c = band.start_col; c < band.start_col + band.width; ++c)
            m.set(m.size() - 1 - i, c);
}

// rows [size*j/n, size*(j+1)/n) across [col, col+width)
void fill_block(StateMatrix& m, int col, int width, int block, int n_blocks) {
    const int lo = m.size() * block / n_blocks;
    const int hi = m.size() * (block + 1) / n_blocks;
    for (int r = lo; r < hi; ++r)
        for (int c = col; c < col + width; ++c) m.set(r, c);
}

}  // namespace

StateMatrix encode(const std::vector<int>& queues, const RingBarrierState& signal,
                   const SimClock& clock, const EncoderLayout& layout,
                   const RingBarrierPlan& plan) {
    StateMatrix m(layout.size);

    for (size_t a = 0; a < layout.queue_bands.size(); ++a) {
        if (queues[a] < 0) throw ConfigError("negative queue length");
        fill_thermometer(m, layout.queue_bands[a], queues[a]);
    }

    // each ring gets half the signal band; one row block per (phase, interval)
    const int half = std::max(1, layout.signal_band.width / 2);
    for (int r = 0; r < 2; ++r) {
        const RingState& rs = signal.rings[r];
        const int n_blocks = layout.ring_phase_count[r] * 3;
        const int block = plan.position_in_ring(rs.phase_id) * 3 + static_cast<int>(rs.interval);
        const int col = layout.signal_band.start_col + r * half;
        const int width = r == 0 ? half : layout.signal_band.width - half;
        fill_block(m, col, width, block, n_blocks);
    }

    fill_thermometer(m, layout.time_band,
                     static_cast<int>(static_cast<int64_t>(layout.size) *
                                      clock.second_of_day() / kSecondsPerDay));
    fill_block(m, layout.day_band.start_col, layout.day_band.width, clock.day_of_week(), 7);
    return m;
}

void stack_to_input(const FrameStack& stack, std::vector<double>& out) {
    const int size = stack.frame(0).size();
    out.resize(static_cast<size_t>(FrameStack::kFrames) * size * size);
    size_t i = 0;
    for (int f = 0; f < FrameStack::kFrames; ++f) {
        const StateMatrix& m = stack.frame(f);
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) out[i++] = m.get(r, c) ? 1.0 : 0.0;
    }
}

}  // namespace tsc
