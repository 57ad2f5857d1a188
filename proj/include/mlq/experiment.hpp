#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "mlq/distributions.hpp"
#include "mlq/queue_sim.hpp"
#include "mlq/rng.hpp"
#include "mlq/sde.hpp"

namespace mlq {

/// Runs fn(0..count-1) on `workers` threads; results land at their replication
/// index, so the output never depends on scheduling.
template <class Fn>
auto run_replications(std::size_t count, int workers, Fn&& fn) {
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> out(count);
    const auto threads = static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t r = 0; r < count; ++r) out[r] = fn(r);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < count;) {
            try {
                out[r] = fn(r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// Independent arrival/service streams for replication r of the ensemble at scale n.
StreamPair queue_streams(std::uint64_t master_seed, int n, std::size_t replication);

/// Stream for replication r of an SDE ensemble.
Stream sde_stream(std::uint64_t master_seed, Scheme scheme, std::size_t replication);

/// Everything the ensemble statistics need from one queue replication.
struct QueueObservables {
    double x_hat_end = 0.0;           // X-hat^n(T)
    double i_hat_end = 0.0;           // I-hat^n(T)
    std::vector<double> x_hat_probe;  // X-hat^n at each probe time
    std::vector<double> m_probe;      // M-hat^n at each probe time
    double m_end = 0.0;
    double qv_end = 0.0;               // [M-hat^n](T)
    std::vector<double> occupation;    // H^n_i(T), i = 0..K
    double e_a_end = 0.0;              // [M-hat_A](T) - <M-hat_A>(T)
    double sup_e_a = 0.0;              // sup_{t<=T} |e^n_A|
    double cross_end = 0.0;            // [M-hat_A, M-hat_S](T)
    double dm_defect = 0.0;            // identity defect over all events
    std::int64_t arrivals_end = 0;     // A^n(T)
    double flow_defect = 0.0;
};

QueueObservables observe_queue(const ScaledSystem& sys, const RenewalSpec& arrivals, const RenewalSpec& services,
                               double horizon, std::span<const double> probe_times, StreamPair streams);

}  // namespace mlq
