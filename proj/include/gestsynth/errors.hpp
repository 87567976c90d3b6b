#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace gestsynth {

// Base of every error raised by the library. The CLI maps any Error to a
// nonzero exit code.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

#define GESTSYNTH_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                        \
       public:                                                         \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    };

GESTSYNTH_DEFINE_ERROR(SilentInput)
GESTSYNTH_DEFINE_ERROR(TooShort)
GESTSYNTH_DEFINE_ERROR(BehindCamera)
GESTSYNTH_DEFINE_ERROR(NonFinite)
GESTSYNTH_DEFINE_ERROR(LengthMismatch)
GESTSYNTH_DEFINE_ERROR(DimMismatch)
GESTSYNTH_DEFINE_ERROR(OutOfRange)
GESTSYNTH_DEFINE_ERROR(FpsMismatch)
GESTSYNTH_DEFINE_ERROR(IoError)
GESTSYNTH_DEFINE_ERROR(MalformedHeader)
GESTSYNTH_DEFINE_ERROR(MissingSidecar)
GESTSYNTH_DEFINE_ERROR(TimestampBeyondAudio)
GESTSYNTH_DEFINE_ERROR(InvalidArgument)

#undef GESTSYNTH_DEFINE_ERROR

class UnknownCharacter : public Error {
   public:
    explicit UnknownCharacter(char32_t c)
        : Error("UnknownCharacter: U+" + hex(c)), character(c) {}
    char32_t character;

   private:
    static std::string hex(char32_t c) {
        static const char* digits = "0123456789ABCDEF";
        std::string s;
        for (int shift = 20; shift >= 0; shift -= 4) {
            s += digits[(c >> shift) & 0xF];
        }
        return s.substr(s.find_first_not_of('0') == std::string::npos
                            ? s.size() - 4
                            : std::min(s.find_first_not_of('0'), s.size() - 4));
    }
};

class NonFiniteLoss : public Error {
   public:
    explicit NonFiniteLoss(std::size_t epoch_index)
        : Error("NonFiniteLoss: epoch " + std::to_string(epoch_index)),
          epoch(epoch_index) {}
    std::size_t epoch;
};

enum class Part { Face, LeftHand, RightHand };

inline const char* part_name(Part p) {
    switch (p) {
        case Part::Face: return "face";
        case Part::LeftHand: return "left_hand";
        case Part::RightHand: return "right_hand";
    }
    return "?";
}

class MarkerMissing : public Error {
   public:
    explicit MarkerMissing(Part p)
        : Error(std::string("MarkerMissing: ") + part_name(p)), part(p) {}
    Part part;
};

}  // namespace gestsynth
