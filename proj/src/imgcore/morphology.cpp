#include "dermabcd/image.hpp"

#include <algorithm>
#include <cmath>

namespace dermabcd {

namespace {

// Half-width of the structuring element at each row offset -r..r.
std::vector<int> row_spans(const StructuringElement& se) {
    if (se.radius < 1) {
        throw std::invalid_argument("StructuringElement: radius must be >= 1");
    }
    const int r = se.radius;
    std::vector<int> spans(static_cast<std::size_t>(2 * r + 1));
    for (int dy = -r; dy <= r; ++dy) {
        spans[static_cast<std::size_t>(dy + r)] =
            se.shape == SeShape::Square
                ? r
                : static_cast<int>(std::floor(std::sqrt(static_cast<double>(r * r - dy * dy))));
    }
    return spans;
}

// prefix[y * (w + 1) + x] = number of true pixels in row y before column x.
std::vector<int> row_prefix(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> prefix(static_cast<std::size_t>(h) * static_cast<std::size_t>(w + 1), 0);
    for (int y = 0; y < h; ++y) {
        int* row = &prefix[static_cast<std::size_t>(y) * static_cast<std::size_t>(w + 1)];
        for (int x = 0; x < w; ++x) {
            row[x + 1] = row[x] + (mask.at(x, y) ? 1 : 0);
        }
    }
    return prefix;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
    const auto spans = row_spans(se);
    const auto prefix = row_prefix(mask);
    const int w = mask.width();
    const int h = mask.height();
    const int r = se.radius;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= h) {
                    continue;
                }
                const int half = spans[static_cast<std::size_t>(dy + r)];
                const int x0 = std::max(0, x - half);
                const int x1 = std::min(w - 1, x + half);
                const int* row = &prefix[static_cast<std::size_t>(yy) * static_cast<std::size_t>(w + 1)];
                hit = row[x1 + 1] - row[x0] > 0;
            }
            out.set(x, y, hit);
        }
    }
    return out;
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
    const auto spans = row_spans(se);
    const auto prefix = row_prefix(mask);
    const int w = mask.width();
    const int h = mask.height();
    const int r = se.radius;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            bool keep = true;
            for (int dy = -r; dy <= r && keep; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= h) {
                    continue;
                }
                const int half = spans[static_cast<std::size_t>(dy + r)];
                const int x0 = std::max(0, x - half);
                const int x1 = std::min(w - 1, x + half);
                const int* row = &prefix[static_cast<std::size_t>(yy) * static_cast<std::size_t>(w + 1)];
                keep = row[x1 + 1] - row[x0] == x1 - x0 + 1;
            }
            out.set(x, y, keep);
        }
    }
    return out;
}

BinaryMask open(const BinaryMask& mask, const StructuringElement& se) {
    return dilate(erode(mask, se), se);
}

BinaryMask close(const BinaryMask& mask, const StructuringElement& se) {
    return erode(dilate(mask, se), se);
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    // Flood the background from a one-pixel virtual frame around the raster.
    const int pw = w + 2;
    const int ph = h + 2;
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph), 0);
    auto blocked = [&](int px, int py) { return mask.get_or_false(px - 1, py - 1); };
    std::vector<int> stack{0};
    outside[0] = 1;
    while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int px = idx % pw;
        const int py = idx / pw;
        constexpr int dx[4] = {1, -1, 0, 0};
        constexpr int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = px + dx[k];
            const int ny = py + dy[k];
            if (nx < 0 || ny < 0 || nx >= pw || ny >= ph) {
                continue;
            }
            const int nidx = ny * pw + nx;
            if (outside[static_cast<std::size_t>(nidx)] || blocked(nx, ny)) {
                continue;
            }
            outside[static_cast<std::size_t>(nidx)] = 1;
            stack.push_back(nidx);
        }
    }
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.set(x, y, !outside[static_cast<std::size_t>((y + 1) * pw + (x + 1))]);
        }
    }
    return out;
}

}  // namespace dermabcd
