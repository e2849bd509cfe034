#include "tsc/metrics.hpp"

namespace tsc {

double MetricsLog::total_travel_time_s() const {
    double s = 0.0;
    for (double d : daily_ttt_s) s += d;
    return s;
}

double MetricsLog::mean_delay_s() const {
    if (vehicles.empty()) return 0.0;
    int64_t sum = 0;
    int64_t n = 0;
    for (const VehicleRecord& v : vehicles) {
        if (v.at_stopline_s >= end_s) continue;  // never reached the stop line
        sum += vehicle_delay(v);
        ++n;
    }
    return n > 0 ? static_cast<double>(sum) / static_cast<double>(n) : 0.0;
}

MetricsLog::BinnedDelay MetricsLog::binned_delay() const {
    BinnedDelay out;
    std::array<int64_t, kDelayBins> sums{};
    for (const VehicleRecord& v : vehicles) {
        if (v.at_stopline_s >= end_s) continue;
        const int bin = static_cast<int>((v.at_stopline_s % kSecondsPerDay) / kDelayBinSeconds);
        sums[bin] += vehicle_delay(v);
        out.vehicles[bin] += 1;
    }
    for (int b = 0; b < kDelayBins; ++b)
        out.mean_delay_s[b] = out.vehicles[b] > 0
                                  ? static_cast<double>(sums[b]) / static_cast<double>(out.vehicles[b])
                                  : 0.0;
    return out;
}

double MetricsLog::window_mean_delay_s(int64_t start_sod, int64_t end_sod) const {
    int64_t sum = 0;
    int64_t n = 0;
    for (const VehicleRecord& v : vehicles) {
        if (v.at_stopline_s >= end_s) continue;
        const int64_t sod = v.at_stopline_s % kSecondsPerDay;
        if (sod < start_sod || sod >= end_sod) continue;
        sum += vehicle_delay(v);
        ++n;
    }
    return n > 0 ? static_cast<double>(sum) / static_cast<double>(n) : 0.0;
}

}  // namespace tsc
