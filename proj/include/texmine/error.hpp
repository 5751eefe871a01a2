#ifndef TEXMINE_ERROR_HPP
#define TEXMINE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace texmine {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error { public: using Error::Error; };
class UnsupportedFormat : public Error { public: using Error::Error; };
class CorruptImage : public Error { public: using Error::Error; };
class ImageTooSmall : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
class GridTooSmall : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class InputDirMissing : public IoError { public: using IoError::IoError; };
class OutputNotWritable : public IoError { public: using IoError::IoError; };
class ManifestInvalid : public Error { public: using Error::Error; };
class PortInUse : public Error { public: using Error::Error; };

} // namespace texmine

#endif // TEXMINE_ERROR_HPP
