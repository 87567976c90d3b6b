#include "gestsynth/render.hpp"

#include "text_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace gestsynth {

namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Counter-clockwise hull (Andrew's monotone chain), no collinear points.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    if (pts.size() < 3) return pts;
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace

Rgb bone_color(int joint) {
    static constexpr std::array<Rgb, 8> palette = {{
        {255, 200, 0},    // spine and head
        {0, 200, 0},      // left leg
        {200, 0, 0},      // right leg
        {0, 120, 255},    // left arm
        {255, 120, 0},    // right arm
        {120, 60, 200},   // left fingers
        {200, 60, 120},   // right fingers
        {160, 160, 60},   // jaw
    }};
    switch (joint) {
        case 1: case 4: case 7: case 10: return palette[1];
        case 2: case 5: case 8: case 11: return palette[2];
        case 13: case 16: case 18: case 20: return palette[3];
        case 14: case 17: case 19: case 21: return palette[4];
        case kJawJoint: return palette[7];
        default: break;
    }
    if (joint >= kLeftHandBegin && joint < kRightHandBegin) return palette[5];
    if (joint >= kRightHandBegin) return palette[6];
    return palette[0];
}

void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb color) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        img.set(x0, y0, color);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void fill_disc(Image& img, double cx, double cy, int radius, Rgb color) {
    const double r2 = static_cast<double>(radius) * radius;
    const int x_lo = static_cast<int>(std::floor(cx - radius)), x_hi = static_cast<int>(std::ceil(cx + radius));
    const int y_lo = static_cast<int>(std::floor(cy - radius)), y_hi = static_cast<int>(std::ceil(cy + radius));
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r2) img.set(x, y, color);
        }
    }
}

void fill_convex_hull(Image& img, const std::vector<Eigen::Vector2d>& points, Rgb color,
                      Eigen::Vector2d* area_centroid) {
    const auto hull = convex_hull(points);
    if (hull.empty()) return;
    if (area_centroid) {
        double area = 0.0;
        Eigen::Vector2d c = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < hull.size(); ++i) {
            const auto& a = hull[i];
            const auto& b = hull[(i + 1) % hull.size()];
            const double w = a.x() * b.y() - b.x() * a.y();
            area += w;
            c += w * (a + b);
        }
        *area_centroid = std::abs(area) > 1e-12 ? Eigen::Vector2d(c / (3.0 * area)) : hull.front();
    }
    double min_x = hull[0].x(), max_x = min_x, min_y = hull[0].y(), max_y = min_y;
    for (const auto& p : hull) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    for (int y = static_cast<int>(std::ceil(min_y)); y <= static_cast<int>(std::floor(max_y)); ++y) {
        for (int x = static_cast<int>(std::ceil(min_x)); x <= static_cast<int>(std::floor(max_x)); ++x) {
            const Eigen::Vector2d p(x, y);
            bool inside = true;
            for (std::size_t i = 0; i < hull.size() && inside; ++i) {
                inside = cross2(hull[i], hull[(i + 1) % hull.size()], p) >= 0.0;
            }
            if (inside) img.set(x, y, color);
        }
    }
}

RenderedFrame render_skeleton_frame(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                                    const Camera& camera, int width, int height, const PartMarkers& markers) {
    if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
    RenderedFrame out;
    out.image = Image(width, height);
    out.keypoints = project(forward_kinematics(model, pose, global_orient), camera);
    const auto px = [&](int q) {
        return std::array<int, 2>{static_cast<int>(std::lround(out.keypoints(0, q))),
                                  static_cast<int>(std::lround(out.keypoints(1, q)))};
    };
    for (int j = 0; j < kSkeletonJoints; ++j) {
        const int parent = model.joint(j).parent;
        if (parent < 0) continue;
        const auto a = px(parent), b = px(j);
        draw_line(out.image, a[0], a[1], b[0], b[1], bone_color(j));
    }
    std::vector<Eigen::Vector2d> face;
    for (int l = 0; l < kFaceLandmarks; ++l) face.emplace_back(out.keypoints.col(kSkeletonJoints + l));
    fill_convex_hull(out.image, face, markers.face, &out.face_centroid);
    fill_disc(out.image, out.keypoints(0, kLeftWrist), out.keypoints(1, kLeftWrist), markers.hand_radius,
              markers.left_hand);
    fill_disc(out.image, out.keypoints(0, kRightWrist), out.keypoints(1, kRightWrist), markers.hand_radius,
              markers.right_hand);
    return out;
}

Image render_skeleton(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                      const Camera& camera, int width, int height, const PartMarkers& markers) {
    return render_skeleton_frame(model, pose, global_orient, camera, width, height, markers).image;
}

PartCrops find_part_crops(const Image& img, int crop_size, const PartMarkers& markers) {
    if (crop_size <= 0 || crop_size > img.width || crop_size > img.height) {
        throw InvalidArgument("crop size must fit inside the image");
    }
    std::array<Eigen::Vector2d, 3> sum{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    std::array<long long, 3> count{0, 0, 0};
    const std::array<Rgb, 3> colors{markers.face, markers.left_hand, markers.right_hand};
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.at(x, y);
            for (int k = 0; k < 3; ++k) {
                if (c == colors[k]) {
                    sum[k] += Eigen::Vector2d(x, y);
                    ++count[k];
                }
            }
        }
    }
    const std::array<Part, 3> parts{Part::Face, Part::LeftHand, Part::RightHand};
    std::array<CropBox, 3> boxes;
    for (int k = 0; k < 3; ++k) {
        if (count[k] == 0) throw MarkerMissing(parts[k]);
        CropBox& b = boxes[k];
        b.center = sum[k] / static_cast<double>(count[k]);
        b.size = crop_size;
        b.x = std::clamp(static_cast<int>(std::lround(b.center.x() - crop_size / 2.0)), 0, img.width - crop_size);
        b.y = std::clamp(static_cast<int>(std::lround(b.center.y() - crop_size / 2.0)), 0, img.height - crop_size);
    }
    return {boxes[0], boxes[1], boxes[2]};
}

Image crop(const Image& img, const CropBox& box) {
    Image out(box.size, box.size);
    for (int y = 0; y < box.size; ++y) {
        for (int x = 0; x < box.size; ++x) {
            const int sx = box.x + x, sy = box.y + y;
            if (sx >= 0 && sy >= 0 && sx < img.width && sy < img.height) out.set(x, y, img.at(sx, sy));
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
    const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

Image decode_ppm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    const auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto read_int = [&]() -> long long {
        skip_space();
        long long v = 0;
        const std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
        if (pos == start || v > (1LL << 31)) throw MalformedHeader("PPM header field is not a number");
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw MalformedHeader("not a binary PPM (P6)");
    pos = 2;
    const long long w = read_int(), h = read_int(), maxval = read_int();
    if (w <= 0 || h <= 0 || maxval != 255) throw MalformedHeader("unsupported PPM dimensions or maxval");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw MalformedHeader("missing PPM header terminator");
    ++pos;
    const std::size_t payload = static_cast<std::size_t>(3 * w * h);
    if (bytes.size() - pos != payload) throw MalformedHeader("PPM pixel payload has the wrong length");
    Image img(static_cast<int>(w), static_cast<int>(h));
    std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), img.pixels.begin());
    return img;
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
    const auto bytes = encode_ppm(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
    const std::string data = detail::read_text_file(path);
    return decode_ppm(std::vector<std::uint8_t>(data.begin(), data.end()));
}

}  // namespace gestsynth
