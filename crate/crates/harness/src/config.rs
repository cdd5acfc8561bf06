//! Run configuration, loaded from TOML with dotted sections.

use std::path::{Path, PathBuf};

use hierobs::attitude::AttitudeGains;
use hierobs::{GravityVector, Quat, TranslationGains, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shipped reference configuration.
pub const TABLE1_TOML: &str = include_str!("../configs/table1.toml");

/// Largest accepted deviation from unit norm for configured quaternions.
/// Four-digit entries such as `0.7071` are within this and get normalized.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-3;

/// Half-width of the box the randomized position and velocity estimates are drawn from.
pub const RANDOM_INIT_HALF_WIDTH: f64 = 5.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedMode {
    /// Translation observer sees the true attitude and body rate.
    True,
    /// Translation observer sees the attitude observer's estimates.
    #[default]
    Estimated,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaDotSource {
    /// Analytic for the true feed, finite differences for the estimated feed.
    #[default]
    Auto,
    Analytic,
    Fd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub duration: f64,
    pub gravity: [f64; 3],
    #[serde(default)]
    pub feed: FeedMode,
    #[serde(default)]
    pub omega_dot: OmegaDotSource,
    #[serde(default)]
    pub omega_dot_bias_rate: bool,
    pub lowpass_tau: f64,
    #[serde(default = "one")]
    pub pose_decimation: usize,
    #[serde(default)]
    pub hold_inputs: bool,
    #[serde(default)]
    pub randomize_init: bool,
    #[serde(default)]
    pub seed: u64,
    /// Time from which the pose source reports `−q` instead of `q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip_sign_at: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    /// Scalar-first quaternion.
    pub q0: [f64; 4],
    pub p0: [f64; 3],
    pub v0: [f64; 3],
    pub gyro_bias: [f64; 3],
    pub accel_bias: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSection {
    pub c1: f64,
    pub c2: f64,
    pub lambda: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Gyro-bias error bound used for the attitude threshold line, rad/s.
    pub gyro_bias_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sim: SimSection,
    pub truth: StateSection,
    pub estimate: StateSection,
    pub gains: GainSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::table1()
    }
}

impl RunConfig {
    pub fn table1() -> Self {
        Self::from_toml_str(TABLE1_TOML).expect("shipped config is valid")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sim;
        positive("sim.dt", s.dt)?;
        positive("sim.duration", s.duration)?;
        if !(s.lowpass_tau >= 0.0 && s.lowpass_tau.is_finite()) {
            return Err(Error::invalid("sim.lowpass_tau", "must be finite and nonnegative"));
        }
        if s.pose_decimation == 0 {
            return Err(Error::invalid("sim.pose_decimation", "must be at least 1"));
        }
        if s.gravity.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("sim.gravity", "must be finite"));
        }
        if let Some(t) = s.flip_sign_at {
            if !t.is_finite() {
                return Err(Error::invalid("sim.flip_sign_at", "must be finite"));
            }
        }
        for (section, st) in [("truth", &self.truth), ("estimate", &self.estimate)] {
            check_quaternion(section, &st.q0)?;
            let all = st.p0.iter().chain(&st.v0).chain(&st.gyro_bias).chain(&st.accel_bias);
            if all.into_iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(section, "initial state must be finite"));
            }
        }
        self.attitude_gains()?;
        self.translation_gains()?;
        positive("gains.lambda", self.gains.lambda)?;
        positive("analysis.gyro_bias_bound", self.analysis.gyro_bias_bound)?;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.sim.duration / self.sim.dt).round() as usize
    }

    pub fn attitude_gains(&self) -> Result<AttitudeGains> {
        Ok(AttitudeGains::new(self.gains.c1, self.gains.c2)?)
    }

    pub fn translation_gains(&self) -> Result<TranslationGains> {
        Ok(TranslationGains::new(self.gains.k1, self.gains.k2, self.gains.k3)?)
    }

    pub fn gravity(&self) -> GravityVector {
        GravityVector(Vec3::from(self.sim.gravity))
    }

    /// Resolves `auto` for the configured feed.
    pub fn omega_dot_source(&self) -> OmegaDotSource {
        match (self.sim.omega_dot, self.sim.feed) {
            (OmegaDotSource::Auto, FeedMode::True) => OmegaDotSource::Analytic,
            (OmegaDotSource::Auto, FeedMode::Estimated) => OmegaDotSource::Fd,
            (src, _) => src,
        }
    }

    pub fn truth_init(&self) -> InitialState {
        InitialState::from_section(&self.truth)
    }

    /// Observer initial state. With `randomize_init` the attitude is drawn
    /// uniformly on the sphere and each position and velocity component
    /// uniformly from `±RANDOM_INIT_HALF_WIDTH`; bias estimates keep their
    /// configured values.
    pub fn estimate_init(&self) -> InitialState {
        let mut init = InitialState::from_section(&self.estimate);
        if self.sim.randomize_init {
            let mut rng = ChaCha8Rng::seed_from_u64(self.sim.seed);
            init.q = Quat::random(&mut rng);
            let w = RANDOM_INIT_HALF_WIDTH;
            init.p = Vec3::from_fn(|_, _| rng.random_range(-w..w));
            init.v = Vec3::from_fn(|_, _| rng.random_range(-w..w));
        }
        init
    }
}

/// Initial values with the configured quaternion normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialState {
    pub q: Quat,
    pub p: Vec3,
    pub v: Vec3,
    pub gyro_bias: Vec3,
    pub accel_bias: Vec3,
}

impl InitialState {
    fn from_section(s: &StateSection) -> Self {
        Self {
            q: Quat::from_array(s.q0).normalize(),
            p: Vec3::from(s.p0),
            v: Vec3::from(s.v0),
            gyro_bias: Vec3::from(s.gyro_bias),
            accel_bias: Vec3::from(s.accel_bias),
        }
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, &format!("must be positive and finite, got {x}")))
    }
}

fn check_quaternion(section: &'static str, q: &[f64; 4]) -> Result<()> {
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > QUATERNION_NORM_TOLERANCE || !norm.is_finite() {
        return Err(Error::invalid(section, &format!("q0 has norm {norm}, expected 1")));
    }
    Ok(())
}
