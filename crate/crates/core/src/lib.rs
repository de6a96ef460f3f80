//! Numerical and exact verification toolkit for convex hypersurfaces whose
//! hyperplane-section volumes are polynomial, and for the finite stationary
//! phase expansions such surfaces produce.

pub mod cancel;
pub mod error;
pub mod exactpoly;
pub mod oscillatory;
pub mod polydetect;
pub mod quadrature;
pub mod sections;
pub mod stphase;
pub mod surfaces;

pub use cancel::CancelToken;
pub use error::{Error, Result};
pub use exactpoly::MultiPoly;
pub use oscillatory::{CutoffSpec, ExpansionFit, OscOptions, OscSample};
pub use polydetect::{Model, PolyVerdict};
pub use sections::{SectionOptions, VolumeMethod, VolumeProfile};
pub use stphase::{DeltaCheck, LeadingTerms, MorseChart, QuadPhaseExpansion};
pub use surfaces::{GraphSurface, QuadricKind, QuadricSpec, SurfaceSpec, TangentFrame};
