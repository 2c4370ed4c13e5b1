#include "dsgp4kit/error.hpp"

namespace dsgp4kit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::JetSizeMismatch: return "jet_size_mismatch";
    case ErrorCode::JetSlotOutOfRange: return "jet_slot_out_of_range";
    case ErrorCode::JetDomain: return "jet_domain";
    case ErrorCode::BadLength: return "bad_length";
    case ErrorCode::BadChecksum: return "bad_checksum";
    case ErrorCode::BadLineNumber: return "bad_line_number";
    case ErrorCode::IdMismatch: return "id_mismatch";
    case ErrorCode::UnparsableField: return "unparsable_field";
    case ErrorCode::FieldOverflow: return "field_overflow";
    case ErrorCode::BadDayOfYear: return "bad_day_of_year";
    case ErrorCode::DeepSpaceUnsupported: return "deep_space_unsupported";
    case ErrorCode::EccentricityOutOfRange: return "eccentricity_out_of_range";
    case ErrorCode::MeanMotionNonPositive: return "mean_motion_non_positive";
    case ErrorCode::Decayed: return "decayed";
    case ErrorCode::NegativeSemiLatus: return "negative_semi_latus";
    case ErrorCode::KeplerNonConvergence: return "kepler_non_convergence";
    case ErrorCode::NonPsdInput: return "non_psd_input";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::SingularNormalMatrix: return "singular_normal_matrix";
    case ErrorCode::NonConvergence: return "non_convergence";
    case ErrorCode::HyperbolicState: return "hyperbolic_state";
    case ErrorCode::DivergedLoss: return "diverged_loss";
    case ErrorCode::SplitOverlap: return "split_overlap";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::NoOverlap: return "no_overlap";
    case ErrorCode::InvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace dsgp4kit
