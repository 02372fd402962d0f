use std::fmt;

use serde::{Deserialize, Serialize};

/// Non-fatal conditions an algorithm ran into. They end up in reports and can
/// be escalated to a failure by the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// No point carried this label; a farthest-point center was substituted.
    EmptyClass { label: usize },
    /// Only `present` of `k` labels had any labeled point; no centers were invented.
    MissingLabels { present: usize, k: usize },
    /// A class is smaller than the requested minimum size.
    SmallClass { label: usize, size: usize, min: usize },
    /// A random projection failed its distortion check and was replaced by the identity.
    ProjectionFallback { stage: String, worst_ratio: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::EmptyClass { label } => {
                write!(f, "label {label} has no points; used farthest-point fallback center")
            }
            Warning::MissingLabels { present, k } => {
                write!(f, "only {present} of {k} labels survived; returned {present} centers")
            }
            Warning::SmallClass { label, size, min } => {
                write!(f, "label {label} has {size} points, below the minimum {min}")
            }
            Warning::ProjectionFallback { stage, worst_ratio } => write!(
                f,
                "{stage} projection distortion {worst_ratio:.4} outside contract; using identity"
            ),
        }
    }
}
