#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tripert {

/// Replicas are grouped into fixed-size chunks; each chunk is reduced in
/// index order and the chunk partials are merged in chunk order. The result
/// is therefore bit-identical for every worker count.
inline constexpr std::size_t kReplicaChunk = 1024;

/// Replica-parallel reduction.
///
/// `body(i, acc)` folds replica i into `acc`; Acc must be default
/// constructible and provide `merge(const Acc&)`.
template <class Acc, class Body>
Acc parallel_reduce(std::size_t n, unsigned workers, Body&& body) {
    const std::size_t chunks = (n + kReplicaChunk - 1) / kReplicaChunk;
    std::vector<Acc> partial(chunks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                const std::size_t begin = c * kReplicaChunk;
                const std::size_t end = std::min(n, begin + kReplicaChunk);
                for (std::size_t i = begin; i < end; ++i) body(i, partial[c]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
                return;
            }
        }
    };

    const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
    if (w <= 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(w);
        for (unsigned k = 0; k < w; ++k) pool.emplace_back(run);
    }
    if (failure) std::rethrow_exception(failure);

    Acc total{};
    for (const auto& p : partial) total.merge(p);
    return total;
}

}  // namespace tripert
