#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tsc/encoder.hpp"
#include "tsc/rng.hpp"

using namespace tsc;

namespace {

int band_column_fill(const StateMatrix& m, const Band& b, int col_offset = 0) {
    int filled = 0;
    for (int r = 0; r < m.size(); ++r)
        if (m.get(r, b.start_col + col_offset)) ++filled;
    return filled;
}

size_t band_popcount(const StateMatrix& m, const Band& b) {
    size_t n = 0;
    for (int r = 0; r < m.size(); ++r)
        for (int c = b.start_col; c < b.start_col + b.width; ++c)
            if (m.get(r, c)) ++n;
    return n;
}

}  // namespace

TEST_CASE("layout: 80x80 band partition") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(80, plan, 4);
    REQUIRE(lay.queue_bands.size() == 4);
    for (int a = 0; a < 4; ++a) {
        CHECK(lay.queue_bands[a].start_col == a * 12);
        CHECK(lay.queue_bands[a].width == 12);
    }
    CHECK(lay.signal_band.start_col == 48);
    CHECK(lay.signal_band.width == 8);
    CHECK(lay.time_band.start_col == 56);
    CHECK(lay.time_band.width == 12);
    CHECK(lay.day_band.start_col == 68);
    CHECK(lay.day_band.width == 12);
    int total = lay.signal_band.width + lay.time_band.width + lay.day_band.width;
    for (const Band& b : lay.queue_bands) total += b.width;
    CHECK(total == 80);
}

TEST_CASE("layout: 24x24 band partition sums to 24") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(24, plan, 4);
    int total = lay.signal_band.width + lay.time_band.width + lay.day_band.width;
    for (const Band& b : lay.queue_bands) total += b.width;
    CHECK(total == 24);
    CHECK(lay.queue_bands[0].width == 3);
    CHECK(lay.signal_band.width == 4);
}

TEST_CASE("layout: unsupported size is rejected") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    CHECK_THROWS_AS(layout_for(17, plan, 4), ConfigError);
}

TEST_CASE("encode: zero state sets only signal and day-of-week") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(80, plan, 4);
    RingBarrierState sig = initial_state(plan);
    StateMatrix m = encode({0, 0, 0, 0}, sig, {0}, lay, plan);

    for (const Band& b : lay.queue_bands) CHECK(band_popcount(m, b) == 0);
    CHECK(band_popcount(m, lay.time_band) == 0);
    // ring half-bands carry the (first phase, green) block: rows [0, 80/6)
    const int block_rows = 80 * 1 / 6 - 0;
    CHECK(band_popcount(m, lay.signal_band) == static_cast<size_t>(block_rows) * 8);
    // Monday block: rows [0, floor(80/7)) over 12 columns
    CHECK(band_popcount(m, lay.day_band) == static_cast<size_t>(80 / 7) * 12);
}

TEST_CASE("encode: queues saturate at the matrix size") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(80, plan, 4);
    RingBarrierState sig = initial_state(plan);
    StateMatrix q85 = encode({85, 0, 0, 0}, sig, {0}, lay, plan);
    StateMatrix q80 = encode({80, 0, 0, 0}, sig, {0}, lay, plan);
    StateMatrix q79 = encode({79, 0, 0, 0}, sig, {0}, lay, plan);
    CHECK(q85 == q80);
    CHECK(!(q85 == q79));
    CHECK(band_popcount(q85, lay.queue_bands[0]) == 80u * 12u);
}

TEST_CASE("encode: noon fills half the time thermometer") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(80, plan, 4);
    StateMatrix m = encode({0, 0, 0, 0}, initial_state(plan), {43200}, lay, plan);
    for (int c = 0; c < lay.time_band.width; ++c)
        CHECK(band_column_fill(m, lay.time_band, c) == 40);
    // thermometer grows from the bottom row
    CHECK(m.get(79, lay.time_band.start_col));
    CHECK_FALSE(m.get(0, lay.time_band.start_col));
}

TEST_CASE("encode: queue thermometer invariant, no 1 above a 0") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(24, plan, 4);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> queues = {rng.next_below(30), rng.next_below(30), rng.next_below(30),
                                   rng.next_below(30)};
        SimClock clock{static_cast<int64_t>(rng.next_below(86400))};
        StateMatrix m = encode(queues, initial_state(plan), clock, lay, plan);
        for (const Band& b : lay.queue_bands)
            for (int c = b.start_col; c < b.start_col + b.width; ++c)
                for (int r = 1; r < m.size(); ++r)
                    if (m.get(r - 1, c)) CHECK(m.get(r, c));  // above set implies below set
    }
}

TEST_CASE("encode: distinct encoded quantities give distinct matrices") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(24, plan, 4);
    RingBarrierState sig = initial_state(plan);
    SimClock clock{0};

    StateMatrix base = encode({3, 0, 0, 0}, sig, clock, lay, plan);
    CHECK(!(base == encode({4, 0, 0, 0}, sig, clock, lay, plan)));

    RingBarrierState other = sig;
    other.rings[0].interval = Interval::Yellow;
    CHECK(!(base == encode({3, 0, 0, 0}, other, clock, lay, plan)));

    SimClock noon{43200};  // different hour
    CHECK(!(base == encode({3, 0, 0, 0}, sig, noon, lay, plan)));

    SimClock tuesday{kSecondsPerDay};  // different weekday
    CHECK(!(base == encode({3, 0, 0, 0}, sig, tuesday, lay, plan)));
}

TEST_CASE("encode: monotone in queue length and pure") {
    RingBarrierPlan plan = RingBarrierPlan::two_phase();
    EncoderLayout lay = layout_for(24, plan, 4);
    RingBarrierState sig = initial_state(plan);
    SimClock clock{7200};
    StateMatrix prev = encode({0, 2, 0, 0}, sig, clock, lay, plan);
    for (int q = 1; q <= 30; ++q) {
        StateMatrix cur = encode({q, 2, 0, 0}, sig, clock, lay, plan);
        for (int r = 0; r < 24; ++r)
            for (int c = 0; c < 24; ++c)
                if (prev.get(r, c)) CHECK(cur.get(r, c));
        prev = cur;
    }
    CHECK(encode({7, 2, 1, 0}, sig, clock, lay, plan) ==
          encode({7, 2, 1, 0}, sig, clock, lay, plan));
}

TEST_CASE("frame stack bootstraps and slides") {
    auto m = [](int bit) {
        auto s = std::make_shared<StateMatrix>(8);
        s->set(bit, bit);
        return s;
    };
    auto a = m(0), b = m(1), c = m(2), d = m(3), e = m(4);
    FrameStack stack(a);
    for (int i = 0; i < FrameStack::kFrames; ++i) CHECK(stack.frame(i) == *a);
    stack.push(b);
    CHECK(stack.frame(0) == *a);
    CHECK(stack.frame(3) == *b);
    stack.push(c);
    stack.push(d);
    CHECK(stack.frame(0) == *a);
    stack.push(e);  // fifth frame evicts the oldest
    CHECK(stack.frame(0) == *b);
    CHECK(stack.frame(1) == *c);
    CHECK(stack.frame(2) == *d);
    CHECK(stack.frame(3) == *e);
}

TEST_CASE("packed bitmap is row-major msb-first") {
    StateMatrix m(8);
    m.set(0, 0);
    m.set(0, 7);
    m.set(7, 7);
    auto bytes = m.packed_bytes();
    REQUIRE(bytes.size() == 8);
    CHECK(bytes[0] == 0x81);
    CHECK(bytes[7] == 0x01);
    CHECK(m.ascii().substr(0, 8) == "#......#");
}

TEST_CASE("stack_to_input lays frames out as channels of 0/1") {
    auto a = std::make_shared<StateMatrix>(4);
    a->set(0, 1);
    FrameStack stack(a);
    std::vector<double> input;
    stack_to_input(stack, input);
    REQUIRE(input.size() == 4u * 16u);
    CHECK(input[1] == 1.0);
    CHECK(input[0] == 0.0);
    CHECK(input[16 + 1] == 1.0);  // repeated frame in channel 1
}
