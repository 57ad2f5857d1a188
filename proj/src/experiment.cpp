#include "mlq/experiment.hpp"

#include <cmath>

#include "mlq/decomposition.hpp"

namespace mlq {

StreamPair queue_streams(std::uint64_t master_seed, int n, std::size_t replication) {
    const std::uint64_t seed = Stream::mix(master_seed + 0x243f6a8885a308d3ULL * static_cast<std::uint64_t>(n));
    return StreamPair{derive_stream(seed, replication, Source::arrivals),
                      derive_stream(seed, replication, Source::services)};
}

Stream sde_stream(std::uint64_t master_seed, Scheme scheme, std::size_t replication) {
    return derive_stream(master_seed, replication,
                         scheme == Scheme::projected ? Source::sde_projected : Source::sde_mirror);
}

QueueObservables observe_queue(const ScaledSystem& sys, const RenewalSpec& arrivals, const RenewalSpec& services,
                               double horizon, std::span<const double> probe_times, StreamPair streams) {
    const QueuePath path = simulate_queue(sys, arrivals, services, horizon, streams);
    const DecompositionRecord rec = build_record(path, arrivals, services);
    const double inv_root = 1.0 / sys.scale();

    QueueObservables o;
    const std::size_t last = rec.size() - 1;
    const auto& end = path.events().back();
    o.occupation = occupation_times(path, horizon);
    o.x_hat_end = inv_root * static_cast<double>(end.x);
    o.i_hat_end = inv_root * sys.arrival_rate[0] * o.occupation[0];
    for (double t : probe_times) {
        const std::size_t k = rec.index_at(t);
        o.x_hat_probe.push_back(inv_root * static_cast<double>(path.events()[k].x));
        o.m_probe.push_back(rec.m[k]);
    }
    o.m_end = rec.m[last];
    o.qv_end = rec.qv(last);
    o.e_a_end = rec.error_a(last);
    o.sup_e_a = sup_abs_error_a(rec, horizon);
    o.cross_end = rec.qv_cross[last];
    o.dm_defect = verify_dm_identity(rec, path, sys.n).max();
    o.arrivals_end = end.a;
    o.flow_defect = verify_flow_balance(path);
    return o;
}

}  // namespace mlq
