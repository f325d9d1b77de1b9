#ifndef WISER_ERRORS_HPP
#define WISER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wiser {

// All toolkit failures derive from Error and carry a stable class name
// for machine-parsable CLI output ("error: <Class>: <message>").
class Error : public std::runtime_error {
public:
    Error(std::string cls, const std::string& msg)
        : std::runtime_error(cls + ": " + msg), cls_(std::move(cls)) {}
    const std::string& cls() const { return cls_; }

private:
    std::string cls_;
};

#define WISER_DEFINE_ERROR(Name)                                           \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}       \
    }

WISER_DEFINE_ERROR(MalformedHeader);
WISER_DEFINE_ERROR(TruncatedPayload);
WISER_DEFINE_ERROR(IoFailure);
WISER_DEFINE_ERROR(BadMagic);
WISER_DEFINE_ERROR(ShapeOverflow);
WISER_DEFINE_ERROR(DimensionMismatch);
WISER_DEFINE_ERROR(ShapeMismatch);
WISER_DEFINE_ERROR(ParseError);
WISER_DEFINE_ERROR(WrongKernelCount);
WISER_DEFINE_ERROR(NonZeroSum);
WISER_DEFINE_ERROR(IndexOutOfRange);
WISER_DEFINE_ERROR(BadConfig);
WISER_DEFINE_ERROR(DegenerateVariance);
WISER_DEFINE_ERROR(ZeroMeanDenominator);
WISER_DEFINE_ERROR(TooSmall);
WISER_DEFINE_ERROR(TooFewSamples);
WISER_DEFINE_ERROR(IncompatibleShape);
WISER_DEFINE_ERROR(WrongBottomMode);
WISER_DEFINE_ERROR(DegenerateKernel);
WISER_DEFINE_ERROR(EmptyDataset);
WISER_DEFINE_ERROR(DivergedLoss);
WISER_DEFINE_ERROR(NoInput);

#undef WISER_DEFINE_ERROR

}  // namespace wiser

#endif
