//! Contracting hierarchical observer for fusing pose measurements with biased
//! IMU data.
//!
//! The crate is organised bottom-up:
//!
//! * [`quat`] quaternion and small-matrix algebra,
//! * [`attitude`] the geometric orientation observer with gyro-bias estimation
//!   and its Lyapunov / contraction diagnostics,
//! * [`synthesis`] observability, canonical-form gain synthesis, LMI
//!   certificate checks and the time-varying metric,
//! * [`translation`] the contracting position / velocity / accel-bias observer,
//! * [`observer`] the cascaded attitude + translation observer,
//! * [`truth`] ground-truth kinematics and synthetic sensor streams,
//! * [`batch`] data-parallel batch evaluation (rayon behind the `parallel`
//!   feature, sequential otherwise).

pub mod attitude;
pub mod batch;
pub mod error;
pub mod integrate;
pub mod observer;
pub mod quat;
pub mod synthesis;
pub mod translation;
pub mod truth;

pub use attitude::{AttitudeDiagnostics, AttitudeGains, AttitudeInput, AttitudeState};
pub use error::{Error, Result};
pub use integrate::{Stage, StageInputs};
pub use observer::{HierarchicalObserver, HierarchicalState, OmegaDotMode};
pub use quat::{error_quat, skew, Mat3, Quat, RotationMatrix, Vec3};
pub use synthesis::{ContractionCertificate, TranslationGains};
pub use translation::{AttitudeFeed, GravityVector, TranslationInput, TranslationState};
pub use truth::{ImuSample, MotionProfile, PoseMeasurement, SinusoidalProfile, TruthState};
