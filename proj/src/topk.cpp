#include "dski/topk.hpp"

#include <algorithm>

#include "dski/error.hpp"

namespace dski {

top_k_queue::top_k_queue(size_t k) : k_(k) {
    if (k == 0) {
        throw config_error("top_k_queue: k must be >= 1");
    }
    heap_.reserve(k + 1);
}

bool top_k_queue::insert(double score, uint32_t doc_id) {
    if (full() && !better({score, doc_id}, heap_.front())) {
        return false;
    }
    push(score, doc_id);
    if (heap_.size() > k_) {
        pop_worst();
    }
    return true;
}

void top_k_queue::push(double score, uint32_t doc_id) {
    heap_.push_back({score, doc_id});
    std::push_heap(heap_.begin(), heap_.end(), better);
}

void top_k_queue::pop_worst() {
    std::pop_heap(heap_.begin(), heap_.end(), better);
    heap_.pop_back();
}

void top_k_queue::erase(uint32_t doc_id) {
    const auto it =
        std::find_if(heap_.begin(), heap_.end(), [&](const topk_entry& e) {
            return e.doc_id == doc_id;
        });
    if (it == heap_.end()) {
        return;
    }
    *it = heap_.back();
    heap_.pop_back();
    std::make_heap(heap_.begin(), heap_.end(), better);
}

bool top_k_queue::contains(uint32_t doc_id) const {
    return std::any_of(heap_.begin(), heap_.end(), [&](const topk_entry& e) {
        return e.doc_id == doc_id;
    });
}

void top_k_queue::refresh_threshold() {
    if (heap_.size() >= k_ && heap_.front().score > threshold_) {
        threshold_ = heap_.front().score;
    }
}

std::vector<topk_entry> top_k_queue::ranked() const {
    std::vector<topk_entry> out = heap_;
    std::sort(out.begin(), out.end(), better);
    return out;
}

void dual_insert(dual_queue_state& state, uint32_t doc_id, score_pair scores,
                 const mix_params& mix, view_mode view) {
    const double score_s = mix_score(scores, mix.alpha);
    const double score_f = mix_score(scores, mix.beta);

    if (view == view_mode::independent) {
        // Each queue evicts its own worst; an entry that would be evicted
        // right back is rejected up front.
        state.q_s.insert(score_s, doc_id);
        state.q_f.insert(score_f, doc_id);
    } else {
        state.q_s.push(score_s, doc_id);
        state.q_f.push(score_f, doc_id);
        if (state.q_f.size() > state.q_f.k()) {
            const topk_entry x = state.q_s.worst();
            const topk_entry y = state.q_f.worst();
            if (x.doc_id == y.doc_id) {
                state.q_s.pop_worst();
            } else {
                state.q_s.erase(y.doc_id);
            }
            state.q_f.pop_worst();
        }
    }
    state.q_s.refresh_threshold();
    state.q_f.refresh_threshold();
}

}  // namespace dski
