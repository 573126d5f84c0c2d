#pragma once

#include <stdexcept>
#include <string>

namespace homolens {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error { public: using Error::Error; };
class InvalidSpec : public Error { public: using Error::Error; };
class ZeroNormalizedLayer : public Error { public: using Error::Error; };
class ZeroWeightNorm : public Error { public: using Error::Error; };
class WeightCollapse : public Error { public: using Error::Error; };
class NonFiniteUpdate : public Error { public: using Error::Error; };
class UndefinedRatio : public Error { public: using Error::Error; };
class IndexOutOfRange : public Error { public: using Error::Error; };
class InvalidConstants : public Error { public: using Error::Error; };
class InvalidNoiseRate : public Error { public: using Error::Error; };
class NonZeroBayesRequired : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

} // namespace homolens
