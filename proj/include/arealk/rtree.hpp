#pragma once

#include "arealk/geometry.hpp"

#include <cstdint>
#include <vector>

namespace arealk {

/// Static R-tree over item bounding boxes, bulk-loaded with sort-tile-recurse
/// packing. Built once per study area; queries return candidate item ids
/// whose boxes intersect the query box.
class StaticRTree {
public:
    StaticRTree() = default;
    explicit StaticRTree(const std::vector<Box>& boxes);

    void query(const Box& q, std::vector<std::int32_t>& out) const;
    [[nodiscard]] std::vector<std::int32_t> query(const Box& q) const {
        std::vector<std::int32_t> out;
        query(q, out);
        return out;
    }
    [[nodiscard]] std::size_t size() const { return item_boxes_.size(); }

private:
    struct Node {
        Box box;
        std::int32_t first = 0; // child node index, or first item slot for leaves
        std::int32_t count = 0; // number of children / items
        bool leaf = true;
    };

    static constexpr int kFanout = 8;

    std::vector<Node> nodes_;
    std::vector<std::int32_t> items_; // item ids ordered by leaf packing
    std::vector<Box> item_boxes_;     // indexed by item id
    std::int32_t root_ = -1;
};

} // namespace arealk
