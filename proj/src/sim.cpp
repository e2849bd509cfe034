#include "tsc/sim.hpp"

#include <algorithm>
#include <cmath>

#include "tsc/rng.hpp"

namespace tsc {

double VolumeProfile::volume_at(int approach, int64_t second_of_day) const {
    for (const VolumeSegment& seg : approaches[approach])
        if (second_of_day >= seg.start_s && second_of_day < seg.end_s) return seg.vph;
    throw ConfigError("second " + std::to_string(second_of_day) + " not covered by profile");
}

void VolumeProfile::validate_coverage() const {
    if (approaches.empty()) throw ConfigError("profile has no approaches");
    for (const auto& segs : approaches) {
        int64_t expect = 0;
        for (const VolumeSegment& seg : segs) {
            if (seg.start_s != expect)
                throw ConfigError("profile segments must be contiguous from 0");
            if (seg.end_s <= seg.start_s) throw ConfigError("empty profile segment");
            if (seg.vph < 0) throw ConfigError("negative volume");
            expect = seg.end_s;
        }
        if (expect != kSecondsPerDay) throw ConfigError("profile must cover [0, 86400)");
    }
}

void VolumeProfile::validate() const {
    validate_coverage();
    for (const auto& segs : approaches)
        for (const VolumeSegment& seg : segs)
            if (seg.end_s - seg.start_s < 3600)
                throw ConfigError("profile segments must span at least one hour");
}

void SimParams::validate() const {
    if (free_flow_travel_s < 0) throw ConfigError("negative free-flow travel time");
    if (startup_lost_s < 0) throw ConfigError("negative startup lost time");
    if (saturation_headway_s < 1) throw ConfigError("saturation headway must be >= 1 s");
}

namespace {

// Knuth multiplication method; lambda here is at most a few vehicles/second.
int poisson_draw(double lambda, SplitMix64& rng) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int count = -1;
    double p = 1.0;
    do {
        p *= rng.next_double();
        ++count;
    } while (p > limit);
    return count;
}

}  // namespace

std::vector<int> sample_arrivals(const VolumeProfile& profile, const SimClock& clock,
                                 const ArrivalProcess& rng) {
    const int n = profile.n_approaches();
    std::vector<int> counts(n, 0);
    const int64_t sod = clock.second_of_day();
    for (int a = 0; a < n; ++a) {
        const double vph = profile.volume_at(a, sod);
        if (vph <= 0.0) continue;
        if (rng.deterministic) {
            // evenly spaced within the day: one arrival whenever the
            // cumulative count crosses an integer
            const double per_s = vph / 3600.0;
            counts[a] = static_cast<int>(std::floor(static_cast<double>(sod + 1) * per_s) -
                                         std::floor(static_cast<double>(sod) * per_s));
        } else {
            SplitMix64 sub(hash_combine(hash_combine(rng.day_seed, static_cast<uint64_t>(sod)),
                                        static_cast<uint64_t>(a)));
            counts[a] = poisson_draw(vph / 3600.0, sub);
        }
    }
    return counts;
}

int TickOutcome::total_discharged() const {
    int n = 0;
    for (const auto& ap : approaches) n += ap.discharged;
    return n;
}

Intersection::Intersection(SimParams params, const VolumeProfile& profile,
                           std::vector<std::pair<int, int>> conflicting_approaches)
    : params_(params), profile_(&profile) {
    params_.validate();
    profile.validate_coverage();
    arrivals_.deterministic = params_.deterministic_arrivals;
    lanes_.resize(profile.n_approaches());
    conflict_.assign(lanes_.size(), std::vector<bool>(lanes_.size(), false));
    for (auto [a, b] : conflicting_approaches) conflict_[a][b] = conflict_[b][a] = true;
}

TickOutcome Intersection::tick(const std::vector<Display>& shown, const SimClock& clock) {
    const int n = n_approaches();
    if (static_cast<int>(shown.size()) != n)
        throw ConfigError("display vector size mismatch");
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (shown[a] == Display::Green && shown[b] == Display::Green && conflict_[a][b])
                throw SafetyViolation("tick rejected: conflicting greens on approaches " +
                                      std::to_string(a) + " and " + std::to_string(b));

    const int64_t t = clock.t;
    TickOutcome out;
    out.t = t;
    out.approaches.resize(n);

    std::vector<int> arrivals = sample_arrivals(*profile_, clock, arrivals_);

    for (int a = 0; a < n; ++a) {
        Lane& lane = lanes_[a];
        auto& ap = out.approaches[a];
        ap.shown = shown[a];
        ap.arrivals = arrivals[a];

        // a green that just ended leaves its residual queue flagged once
        if (lane.prev_shown == Display::Green && shown[a] != Display::Green &&
            !lane.queue.empty())
            out.green_terminated.emplace_back(a, static_cast<int>(lane.queue.size()));

        for (int k = 0; k < arrivals[a]; ++k) {
            Vehicle v;
            v.id = next_vehicle_id_++;
            v.approach = a;
            v.arrival_s = t;
            v.at_stopline_s = t + params_.free_flow_travel_s;
            lane.in_transit.push_back(v);
            ++total_arrived_;
        }

        while (!lane.in_transit.empty() && lane.in_transit.front().at_stopline_s <= t) {
            lane.queue.push_back(lane.in_transit.front());
            lane.in_transit.pop_front();
        }

        if (shown[a] == Display::Green) {
            if (lane.prev_shown != Display::Green) {
                // green onset: first discharge after startup lost time plus
                // one saturation headway
                lane.server_free_s = std::max(
                    lane.server_free_s,
                    t + params_.startup_lost_s + params_.saturation_headway_s - 1);
            }
            while (!lane.queue.empty() && t >= lane.server_free_s) {
                Vehicle v = lane.queue.front();
                lane.queue.pop_front();
                v.depart_s = t;
                lane.server_free_s = t + params_.saturation_headway_s;
                out.departed.push_back(v);
                ++ap.discharged;
                ++total_departed_;
            }
        }

        ap.queue_after = static_cast<int>(lane.queue.size());
        lane.prev_shown = shown[a];
    }
    return out;
}

int Intersection::queue_length(int approach) const {
    if (approach < 0 || approach >= n_approaches())
        throw ConfigError("unknown approach id " + std::to_string(approach));
    return static_cast<int>(lanes_[approach].queue.size());
}

bool Intersection::detector_presence(int approach, int64_t now, int horizon_s) const {
    const Lane& lane = lanes_[approach];
    if (!lane.queue.empty()) return true;
    for (const Vehicle& v : lane.in_transit)
        if (v.at_stopline_s <= now + horizon_s) return true;
    return false;
}

int64_t Intersection::vehicles_in_system() const {
    int64_t n = 0;
    for (const Lane& lane : lanes_)
        n += static_cast<int64_t>(lane.in_transit.size() + lane.queue.size());
    return n;
}

std::vector<Vehicle> Intersection::vehicles_in_flight() const {
    std::vector<Vehicle> out;
    for (const Lane& lane : lanes_) {
        out.insert(out.end(), lane.queue.begin(), lane.queue.end());
        out.insert(out.end(), lane.in_transit.begin(), lane.in_transit.end());
    }
    return out;
}

}  // namespace tsc
