#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtoc/data.hpp"

namespace mtoc {

/// Binary task over the 10 dataset classes: positive iff the class index is
/// in positive_set. Positive is index 1 of the 2-way softmax.
struct TaskSpec {
    DatasetId dataset{};
    std::string id;                // canonical form: "mnist.parity" or "window:3"
    std::vector<int> positive_set; // sorted, nonempty, proper subset of 0..9

    void validate() const;
};

int binary_label(const TaskSpec& spec, int class_label);

/// Receiver i (1-based) gets positive classes {i, …, i+4} mod 10.
std::vector<int> class_window(int i);

TaskSpec window_task(DatasetId dataset, int i);

/// The six named tasks: mnist.parity, mnist.magnitude, fashion.dress,
/// fashion.formal, cifar10.animals, cifar10.ground.
TaskSpec named_task(std::string_view id);

/// The paper's (T1, T2) pair for a dataset.
std::vector<TaskSpec> default_tasks(DatasetId dataset);

/// Accepts a named id ("mnist.parity") or "window:i".
TaskSpec parse_task(DatasetId dataset, std::string_view token);

TaskSpec complement(const TaskSpec& spec);

std::vector<std::uint8_t> relabel(std::span<const std::uint8_t> class_labels,
                                  const TaskSpec& spec);

enum class Split : std::uint8_t { Train, Test };

/// Relabels one split of a dataset; rejects a spec built for another dataset.
std::vector<std::uint8_t> relabel(const Dataset& dataset, const TaskSpec& spec, Split split);

}  // namespace mtoc
