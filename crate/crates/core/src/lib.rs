//! Surgery of closed piecewise-geodesic curves into pieces with uniformly
//! bounded Morrey norm, and atomic decompositions of boundaryless
//! 1-currents carried by edge flows.
//!
//! Every output carries a certificate of evaluated inequalities that can be
//! re-checked from the raw curves alone with [`verify`].

pub mod curve;
pub mod cuts;
pub mod current;
pub mod decompose;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod morrey;
pub mod regularity;
pub mod space;
pub mod surgery;
pub mod verify;

pub use current::{Evaluation, Lipschitz, TestForm, WeightedCurrent};
pub use curve::{Curve, CurveLeg, Piece};
pub use cuts::{CutOutcome, CutRecord, CutType, MorreyBracket};
pub use decompose::{AtomicDecomposition, EdgeFlow, FlowEdge};
pub use error::{Error, Result};
pub use morrey::{ball_mass, certify_upper, morrey_norm, morrey_upper_bound_edges, MorreyEstimate};
pub use regularity::{is_den_curve, is_lsi, minimal_violating_interval};
pub use space::{GeodesicEdge, Leg, Point, Space};
pub use surgery::{surgery, surgery_eta, BoundCheck, SurgeryCertificate, SurgeryParams, SurgeryResult};
pub use verify::Verification;

