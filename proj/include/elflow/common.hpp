#pragma once
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace elflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
// rotation by +pi/2
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

using Field = std::vector<Vec2>;

enum class ErrorKind {
    ZeroSegment,
    DimensionMismatch,
    NonPositiveMu,
    ConstraintViolation,
    InvalidArgument,
    NonFinite,
    NoConvergence,
    SingularJacobian,
    EmptyTrace,
    InsufficientSamples,
    StepFailure,
    ConfigParse,
    Io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace elflow
