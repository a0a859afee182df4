#pragma once

#include "sagui/errors.hpp"
#include "sagui/random.hpp"

#include <cstddef>
#include <vector>

namespace sagui {

/// Which policy emitted an action: the transferred guide or the student.
enum class Behaviour { guide, student };

/// One stored interaction. `task_reward` carries r^δ when the guide is trained and the
/// target reward when the student is trained; `guide_logprob` is log pi_guide(a|Xi(s)).
template <class Action> struct TransitionSample {
    std::vector<double> observation;
    Action action{};
    double task_reward = 0.0;
    double guide_logprob = 0.0;
    double cost = 0.0;
    double is_ratio = 1.0;
    std::vector<double> next_observation;
    bool terminal = false;

    // Kept so the IS ratio can be recomputed from what was stored.
    double student_logprob = 0.0;
    double behaviour_logprob = 0.0;
    Behaviour behaviour = Behaviour::student;
};

/// Fixed-capacity FIFO ring with uniform sampling (with replacement).
template <class T> class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw InvalidInput("replay buffer capacity must be positive");
        items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
    }

    void push(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[head_] = std::move(item);
            head_ = (head_ + 1) % capacity_;
        }
    }

    /// Element i in insertion order, 0 being the oldest still held.
    const T& operator[](std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

    const T& sample_one(Rng& rng) const {
        if (items_.empty()) throw EmptyBufferError("cannot sample from an empty replay buffer");
        return items_[uniform_index(rng, items_.size())];
    }

    std::vector<T> sample(std::size_t batch_size, Rng& rng) const {
        if (items_.empty()) throw EmptyBufferError("cannot sample from an empty replay buffer");
        std::vector<T> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(items_[uniform_index(rng, items_.size())]);
        return batch;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<T> items_;
};

} // namespace sagui
