#pragma once

#include "gestsynth/errors.hpp"
#include "gestsynth/skeleton.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace gestsynth {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(3) * w * h, 0) {}

    Rgb at(int x, int y) const {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= width || y >= height) return;
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }
    friend bool operator==(const Image&, const Image&) = default;
};

// Reserved marker colors; bone drawing never uses them.
struct PartMarkers {
    Rgb left_hand{255, 0, 255};
    Rgb right_hand{0, 255, 255};
    Rgb face{255, 255, 255};
    int hand_radius = 12;

    bool reserved(Rgb c) const { return c == left_hand || c == right_hand || c == face; }
};

struct RenderedFrame {
    Image image;
    Keypoints2d keypoints;            // projected joints and landmarks
    Eigen::Vector2d face_centroid;    // area centroid of the face polygon
};

RenderedFrame render_skeleton_frame(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                                    const Camera& camera, int width, int height, const PartMarkers& markers = {});

Image render_skeleton(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                      const Camera& camera, int width, int height, const PartMarkers& markers = {});

// Bone color per child joint.
Rgb bone_color(int joint);

void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb color);
void fill_disc(Image& img, double cx, double cy, int radius, Rgb color);
// Convex hull of the points, filled.
void fill_convex_hull(Image& img, const std::vector<Eigen::Vector2d>& points, Rgb color,
                      Eigen::Vector2d* area_centroid = nullptr);

struct CropBox {
    int x = 0, y = 0;  // top-left
    int size = 0;
    Eigen::Vector2d center{0.0, 0.0};  // centroid of the marker pixels
};

struct PartCrops {
    CropBox face;
    CropBox left_hand;
    CropBox right_hand;
};

PartCrops find_part_crops(const Image& img, int crop_size = 128, const PartMarkers& markers = {});
Image crop(const Image& img, const CropBox& box);

void write_ppm(const Image& img, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const Image& img);
Image decode_ppm(const std::vector<std::uint8_t>& bytes);

}  // namespace gestsynth
