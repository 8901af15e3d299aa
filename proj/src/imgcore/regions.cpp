#include "dermabcd/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dermabcd {

namespace {

constexpr std::array<Point, 8> kNeighbors8{{
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

int direction_of(int dx, int dy) {
    for (int d = 0; d < 8; ++d) {
        if (kNeighbors8[static_cast<std::size_t>(d)].x == dx &&
            kNeighbors8[static_cast<std::size_t>(d)].y == dy) {
            return d;
        }
    }
    throw std::logic_error("direction_of: not an 8-neighbour offset");
}

}  // namespace

LabelImage label_components(const BinaryMask& mask) {
    LabelImage out;
    out.width = mask.width();
    out.height = mask.height();
    out.labels.assign(mask.size(), 0);
    std::vector<int> stack;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const std::size_t seed = static_cast<std::size_t>(y) * static_cast<std::size_t>(mask.width()) +
                                     static_cast<std::size_t>(x);
            if (!mask.at(x, y) || out.labels[seed] != 0) {
                continue;
            }
            const int label = ++out.count;
            out.labels[seed] = label;
            stack.assign(1, static_cast<int>(seed));
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int cx = idx % mask.width();
                const int cy = idx / mask.width();
                for (const auto& n : kNeighbors8) {
                    const int nx = cx + n.x;
                    const int ny = cy + n.y;
                    if (!mask.get_or_false(nx, ny)) {
                        continue;
                    }
                    const std::size_t nidx = static_cast<std::size_t>(ny) * static_cast<std::size_t>(mask.width()) +
                                             static_cast<std::size_t>(nx);
                    if (out.labels[nidx] == 0) {
                        out.labels[nidx] = label;
                        stack.push_back(static_cast<int>(nidx));
                    }
                }
            }
        }
    }
    return out;
}

std::vector<BinaryMask> connected_components(const BinaryMask& mask) {
    const auto lab = label_components(mask);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(lab.count) + 1, 0);
    for (int l : lab.labels) {
        if (l > 0) {
            ++sizes[static_cast<std::size_t>(l)];
        }
    }
    // Labels are issued in raster order of their first pixel, so a stable
    // sort by size keeps that order among equal areas.
    std::vector<int> order(static_cast<std::size_t>(lab.count));
    for (int i = 0; i < lab.count; ++i) {
        order[static_cast<std::size_t>(i)] = i + 1;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
    });
    std::vector<int> rank(static_cast<std::size_t>(lab.count) + 1, -1);
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    }
    std::vector<BinaryMask> comps(order.size(), BinaryMask(mask.width(), mask.height()));
    for (std::size_t i = 0; i < lab.labels.size(); ++i) {
        if (lab.labels[i] > 0) {
            comps[static_cast<std::size_t>(rank[static_cast<std::size_t>(lab.labels[i])])].bits()[i] = 1;
        }
    }
    return comps;
}

BinaryMask largest_component(const BinaryMask& mask) {
    const auto lab = label_components(mask);
    if (lab.count == 0) {
        return BinaryMask(mask.width(), mask.height());
    }
    std::vector<std::size_t> sizes(static_cast<std::size_t>(lab.count) + 1, 0);
    for (int l : lab.labels) {
        if (l > 0) {
            ++sizes[static_cast<std::size_t>(l)];
        }
    }
    int best = 1;
    for (int l = 2; l <= lab.count; ++l) {
        if (sizes[static_cast<std::size_t>(l)] > sizes[static_cast<std::size_t>(best)]) {
            best = l;
        }
    }
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < lab.labels.size(); ++i) {
        out.bits()[i] = lab.labels[i] == best ? 1 : 0;
    }
    return out;
}

Contour trace_contour(const BinaryMask& mask) {
    const auto lab = label_components(mask);
    if (lab.count == 0) {
        throw std::invalid_argument("trace_contour: empty mask");
    }
    if (lab.count > 1) {
        throw std::invalid_argument("trace_contour: mask has more than one component");
    }

    Point start{-1, -1};
    for (int y = 0; y < mask.height() && start.x < 0; ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                start = {x, y};
                break;
            }
        }
    }

    Contour contour;
    contour.points.push_back(start);

    // The raster-order first pixel has background to its west.
    Point cur = start;
    int back = 4;
    int first_move = -1;
    for (;;) {
        int found = -1;
        Point prev_bg = cur;
        for (int i = 1; i <= 8; ++i) {
            const int d = (back + i) % 8;
            const Point q{cur.x + kNeighbors8[static_cast<std::size_t>(d)].x,
                          cur.y + kNeighbors8[static_cast<std::size_t>(d)].y};
            if (mask.get_or_false(q.x, q.y)) {
                found = d;
                const int pd = (back + i - 1) % 8;
                prev_bg = {cur.x + kNeighbors8[static_cast<std::size_t>(pd)].x,
                           cur.y + kNeighbors8[static_cast<std::size_t>(pd)].y};
                break;
            }
        }
        if (found < 0) {
            return contour;  // isolated pixel
        }
        if (cur == start && first_move >= 0 && found == first_move) {
            break;
        }
        if (first_move < 0) {
            first_move = found;
        }
        const Point next{cur.x + kNeighbors8[static_cast<std::size_t>(found)].x,
                         cur.y + kNeighbors8[static_cast<std::size_t>(found)].y};
        back = direction_of(prev_bg.x - next.x, prev_bg.y - next.y);
        cur = next;
        contour.points.push_back(cur);
    }
    // The loop re-enters the start pixel before stopping.
    contour.points.pop_back();
    return contour;
}

BinaryMask fill_contour(const Contour& contour, int width, int height) {
    BinaryMask barrier(width, height);
    for (const auto& p : contour.points) {
        if (barrier.contains(p.x, p.y)) {
            barrier.set(p.x, p.y, true);
        }
    }
    return fill_holes(barrier);
}

double perimeter(const Contour& contour) {
    return perimeter(Polygon::from(contour));
}

double perimeter(const Polygon& poly) {
    const auto& pts = poly.points;
    if (pts.size() < 2) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        sum += std::hypot(b.x - a.x, b.y - a.y);
    }
    return sum;
}

double signed_area(const Polygon& poly) {
    const auto& pts = poly.points;
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

}  // namespace dermabcd
