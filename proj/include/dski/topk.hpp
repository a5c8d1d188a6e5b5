#pragma once

#include <cstdint>
#include <vector>

#include "dski/scoring.hpp"

namespace dski {

struct topk_entry {
    double score = 0.0;
    uint32_t doc_id = 0;

    bool operator==(const topk_entry&) const = default;
};

// Top-k accumulator with total order (score desc, doc id asc), backed by a
// binary heap whose root is the entry the order ranks last. The threshold
// is the k-th largest score once the queue has filled, kept as a
// non-decreasing watermark: a targeted erase (uniform-view coordination)
// never lowers it.
class top_k_queue {
  public:
    explicit top_k_queue(size_t k);

    size_t k() const { return k_; }
    size_t size() const { return heap_.size(); }
    bool full() const { return heap_.size() >= k_; }
    double threshold() const { return threshold_; }

    // Capacity-keeping insert: rejects entries ranked at or below the
    // current worst of a full queue, which is exactly the entry a push
    // followed by a worst-eviction would throw away.
    bool insert(double score, uint32_t doc_id);

    // Unconditional variants for externally coordinated eviction.
    void push(double score, uint32_t doc_id);
    void pop_worst();
    void erase(uint32_t doc_id);

    bool contains(uint32_t doc_id) const;

    // Entry that the total order ranks last. Precondition: non-empty.
    topk_entry worst() const { return heap_.front(); }

    // Raises the threshold watermark to the current k-th largest score.
    void refresh_threshold();

    // Best-first (score desc, doc id asc).
    std::vector<topk_entry> ranked() const;

  private:
    // "a outranks b" under the total order; doubles as the heap comparator,
    // which leaves the worst entry at the root.
    static bool better(const topk_entry& a, const topk_entry& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.doc_id < b.doc_id;
    }

    size_t k_;
    double threshold_ = 0.0;
    std::vector<topk_entry> heap_;
};

enum class view_mode { independent, uniform };

// The two queues of the dual-threshold scheme: q_s ranks by the
// skip-oriented alpha combination, q_f by the final beta combination.
struct dual_queue_state {
    top_k_queue q_s;
    top_k_queue q_f;

    explicit dual_queue_state(size_t k) : q_s(k), q_f(k) {}
};

// Inserts a fully scored document into both queues, then restores capacity:
// with x the lowest entry of q_s and y the lowest of q_f, x == y is evicted
// from both; otherwise the independent view evicts x from q_s and y from
// q_f while the uniform view evicts y from both. Thresholds are refreshed
// afterward. Under the uniform view the two queues always hold the same
// document set.
void dual_insert(dual_queue_state& state, uint32_t doc_id, score_pair scores,
                 const mix_params& mix, view_mode view);

}  // namespace dski
