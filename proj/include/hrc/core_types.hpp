#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

#define HRC_DEFINE_ERROR(Name)                                                                     \
    class Name : public Error                                                                      \
    {                                                                                              \
      public:                                                                                      \
        using Error::Error;                                                                        \
    }

HRC_DEFINE_ERROR(DegenerateDirection);
HRC_DEFINE_ERROR(NonFiniteValue);
HRC_DEFINE_ERROR(InvalidParameter);

/// Direction vectors shorter than this are treated as degenerate (meters).
inline constexpr double kDegenerateEps = 1e-9;

struct Vec3
{
    double x{0.0};
    double y{0.0};
    double z{0.0};

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3& operator+=(const Vec3& o)
    {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o)
    {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double s)
    {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    constexpr double squared_norm() const { return x * x + y * y + z * z; }
    bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Throws NonFiniteValue when any component is NaN or infinite.
void require_finite(const Vec3& v, const char* what);

/// Unit vector pointing from `from` toward `to`.
/// Throws DegenerateDirection when the points are closer than kDegenerateEps.
Vec3 unit_vector(const Vec3& from, const Vec3& to);

double distance(const Vec3& a, const Vec3& b);

/// A physical object on the tabletop.
struct Element
{
    int id{0};
    std::string label;
    Vec3 position;
    double radius{0.04};
};

struct Scene
{
    Vec3 table_size{1.80, 0.76, 0.06};
    double table_height{0.73};
    std::vector<Element> elements;
    Vec3 destination;
    Vec3 robot_start;
    Vec3 hand_start;

    /// Index of the element with the given label, or -1.
    int find_label(const std::string& label) const;
    /// Throws InvalidParameter if elements overlap or poses leave the tabletop workspace.
    void validate() const;
};

/// Potential-field and kinematic parameters. Lengths in meters, speeds in m/s.
struct ApfParams
{
    double attractive_gain{1.0};      // A
    double attractive_length{0.2};    // alpha_a
    double repulsive_gain{1.5};       // R
    double repulsive_shape{0.16};     // rho_r
    double repulsive_decay{6.0};      // alpha_r
    double k_b{0.3};
    double k_c{0.3};
    double safety_time{1.0};          // t_s
    double robot_speed{0.4};          // v_r
    double human_speed{0.4};          // v_h
    double max_speed{0.4};            // v_max
    double force_gain{0.4};

    /// Throws InvalidParameter when any invariant is violated.
    void validate() const;
};

} // namespace hrc
