#include "arealk/rtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace arealk {

StaticRTree::StaticRTree(const std::vector<Box>& boxes) : item_boxes_(boxes) {
    const std::int32_t n = static_cast<std::int32_t>(boxes.size());
    if (n == 0) return;

    items_.resize(static_cast<std::size_t>(n));
    std::iota(items_.begin(), items_.end(), 0);

    // Sort-tile-recurse: order by x into vertical slices, then by y inside
    // each slice, then pack fixed-size leaves.
    auto cx = [&](std::int32_t i) { return boxes[static_cast<std::size_t>(i)].lo.x() + boxes[static_cast<std::size_t>(i)].hi.x(); };
    auto cy = [&](std::int32_t i) { return boxes[static_cast<std::size_t>(i)].lo.y() + boxes[static_cast<std::size_t>(i)].hi.y(); };

    std::sort(items_.begin(), items_.end(),
              [&](std::int32_t a, std::int32_t b) { return cx(a) < cx(b); });
    const int leaves = (n + kFanout - 1) / kFanout;
    const int slices = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(leaves)))));
    const int per_slice = (n + slices - 1) / slices;
    for (int s = 0; s < slices; ++s) {
        const std::int32_t lo = static_cast<std::int32_t>(s) * per_slice;
        const std::int32_t hi = std::min(n, lo + per_slice);
        if (lo >= hi) break;
        std::sort(items_.begin() + lo, items_.begin() + hi,
                  [&](std::int32_t a, std::int32_t b) { return cy(a) < cy(b); });
    }

    // Leaf level.
    std::vector<std::int32_t> level;
    for (std::int32_t first = 0; first < n; first += kFanout) {
        Node node;
        node.leaf = true;
        node.first = first;
        node.count = std::min<std::int32_t>(kFanout, n - first);
        node.box = boxes[static_cast<std::size_t>(items_[static_cast<std::size_t>(first)])];
        for (std::int32_t k = 1; k < node.count; ++k)
            node.box.merge(boxes[static_cast<std::size_t>(items_[static_cast<std::size_t>(first + k)])]);
        level.push_back(static_cast<std::int32_t>(nodes_.size()));
        nodes_.push_back(node);
    }

    // Internal levels.
    while (level.size() > 1) {
        std::vector<std::int32_t> next;
        for (std::size_t first = 0; first < level.size(); first += kFanout) {
            Node node;
            node.leaf = false;
            node.first = level[first];
            node.count = static_cast<std::int32_t>(std::min<std::size_t>(kFanout, level.size() - first));
            node.box = nodes_[static_cast<std::size_t>(level[first])].box;
            for (std::int32_t k = 1; k < node.count; ++k)
                node.box.merge(nodes_[static_cast<std::size_t>(level[first + static_cast<std::size_t>(k)])].box);
            next.push_back(static_cast<std::int32_t>(nodes_.size()));
            nodes_.push_back(node);
        }
        level = std::move(next);
    }
    root_ = level.front();
}

void StaticRTree::query(const Box& q, std::vector<std::int32_t>& out) const {
    out.clear();
    if (root_ < 0) return;
    std::vector<std::int32_t> stack{root_};
    while (!stack.empty()) {
        const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        if (!node.box.intersects(q)) continue;
        if (node.leaf) {
            for (std::int32_t k = 0; k < node.count; ++k) {
                const std::int32_t id = items_[static_cast<std::size_t>(node.first + k)];
                if (item_boxes_[static_cast<std::size_t>(id)].intersects(q)) out.push_back(id);
            }
        } else {
            // Children of an internal node are contiguous node indices.
            for (std::int32_t k = 0; k < node.count; ++k) stack.push_back(node.first + k);
        }
    }
}

} // namespace arealk
