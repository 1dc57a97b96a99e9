//! Gated Haar-cascade person detection, zone-based visual tracking with
//! MAVLink velocity output, and a closed-loop simulator to exercise them.

pub mod cascade;
pub mod dataset;
pub mod gated;
pub mod haar;
pub mod imaging;
pub mod mavlink;
pub mod ned;
pub mod sim;
pub mod tracker;

pub use cascade::{Cascade, CascadeError, Detection};
pub use gated::{detect_gated, select_target, GateParams, GatedDetection};
pub use imaging::{GrayImage, IntegralPair, Rect};
pub use ned::Ned;
pub use tracker::{TrackerConfig, VelocityCommand};
