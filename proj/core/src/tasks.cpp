#include "mtoc/tasks.hpp"

#include <algorithm>

#include "mtoc/errors.hpp"

namespace mtoc {

void TaskSpec::validate() const {
    if (positive_set.empty() || positive_set.size() >= 10)
        throw ConfigError("task '" + id + "': positive set must be a nonempty proper subset");
    if (!std::is_sorted(positive_set.begin(), positive_set.end()))
        throw ConfigError("task '" + id + "': positive set must be sorted");
    for (std::size_t k = 0; k < positive_set.size(); ++k) {
        if (positive_set[k] < 0 || positive_set[k] > 9)
            throw ConfigError("task '" + id + "': class index out of range");
        if (k > 0 && positive_set[k] == positive_set[k - 1])
            throw ConfigError("task '" + id + "': duplicate class index");
    }
}

int binary_label(const TaskSpec& spec, int class_label) {
    if (class_label < 0 || class_label > 9)
        throw ValueError("binary_label: class " + std::to_string(class_label) +
                         " out of range");
    return std::binary_search(spec.positive_set.begin(), spec.positive_set.end(), class_label)
               ? 1
               : 0;
}

std::vector<int> class_window(int i) {
    if (i < 1) throw ValueError("class_window: receiver index must be >= 1");
    std::vector<int> set;
    set.reserve(5);
    for (int k = 0; k < 5; ++k) set.push_back((i + k) % 10);
    std::sort(set.begin(), set.end());
    return set;
}

TaskSpec window_task(DatasetId dataset, int i) {
    TaskSpec spec{dataset, "window:" + std::to_string(i), class_window(i)};
    spec.validate();
    return spec;
}

TaskSpec named_task(std::string_view id) {
    // Class indices follow each dataset's canonical order (see class_names).
    if (id == "mnist.parity") return {DatasetId::MNIST, "mnist.parity", {1, 3, 5, 7, 9}};
    if (id == "mnist.magnitude")
        return {DatasetId::MNIST, "mnist.magnitude", {5, 6, 7, 8, 9}};
    if (id == "fashion.dress")  // T-shirt/top, Trouser, Pullover, Dress, Coat, Shirt
        return {DatasetId::FashionMNIST, "fashion.dress", {0, 1, 2, 3, 4, 6}};
    if (id == "fashion.formal")  // Trouser, Dress, Sandal, Shirt, Bag
        return {DatasetId::FashionMNIST, "fashion.formal", {1, 3, 5, 6, 8}};
    if (id == "cifar10.animals")  // bird, cat, deer, dog, frog, horse
        return {DatasetId::CIFAR10, "cifar10.animals", {2, 3, 4, 5, 6, 7}};
    if (id == "cifar10.ground")  // automobile, cat, deer, dog, horse
        return {DatasetId::CIFAR10, "cifar10.ground", {1, 3, 4, 5, 7}};
    throw ConfigError("unknown task '" + std::string(id) + "'");
}

std::vector<TaskSpec> default_tasks(DatasetId dataset) {
    switch (dataset) {
        case DatasetId::MNIST: return {named_task("mnist.parity"), named_task("mnist.magnitude")};
        case DatasetId::FashionMNIST:
            return {named_task("fashion.dress"), named_task("fashion.formal")};
        case DatasetId::CIFAR10:
            return {named_task("cifar10.animals"), named_task("cifar10.ground")};
    }
    throw ValueError("unknown dataset id");
}

TaskSpec parse_task(DatasetId dataset, std::string_view token) {
    if (token.rfind("window:", 0) == 0) {
        const std::string num(token.substr(7));
        int i = 0;
        try {
            i = std::stoi(num);
        } catch (const std::exception&) {
            throw ConfigError("bad window task '" + std::string(token) + "'");
        }
        if (i < 1) throw ConfigError("window task index must be >= 1");
        return window_task(dataset, i);
    }
    TaskSpec spec = named_task(token);
    if (spec.dataset != dataset)
        throw ConfigError("task '" + std::string(token) + "' belongs to dataset " +
                          dataset_name(spec.dataset) + ", not " + dataset_name(dataset));
    return spec;
}

TaskSpec complement(const TaskSpec& spec) {
    TaskSpec out{spec.dataset, "not(" + spec.id + ")", {}};
    for (int c = 0; c < 10; ++c)
        if (!std::binary_search(spec.positive_set.begin(), spec.positive_set.end(), c))
            out.positive_set.push_back(c);
    out.validate();
    return out;
}

std::vector<std::uint8_t> relabel(std::span<const std::uint8_t> class_labels,
                                  const TaskSpec& spec) {
    spec.validate();
    std::vector<std::uint8_t> out(class_labels.size());
    for (std::size_t i = 0; i < class_labels.size(); ++i)
        out[i] = static_cast<std::uint8_t>(binary_label(spec, class_labels[i]));
    return out;
}

std::vector<std::uint8_t> relabel(const Dataset& dataset, const TaskSpec& spec, Split split) {
    if (dataset.id != spec.dataset)
        throw ConfigError("task '" + spec.id + "' does not belong to dataset " +
                          dataset_name(dataset.id));
    return relabel(split == Split::Train ? std::span<const std::uint8_t>(dataset.train_labels)
                                         : std::span<const std::uint8_t>(dataset.test_labels),
                   spec);
}

}  // namespace mtoc
