//! Problem instance and solver configuration.
//!
//! Every length is stored in wavelengths and every speed in wavelengths per
//! second. Powers are kept in dBm for round-tripping, but the linear
//! normalized powers `P_k / sigma^2` are computed once at construction and
//! are the only power quantities the solvers read.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a dBm (or dB) quantity to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Number of sliding tracks `M`.
    pub num_tracks: usize,
    /// Antennas on each track `N`, spaced half a wavelength apart.
    pub antennas_per_track: usize,
    /// Horizontal span `L` available to the tracks.
    pub span: f64,
    /// Minimum horizontal distance between neighbouring tracks.
    pub min_separation: f64,
    /// Maximum track speed in wavelengths per second.
    pub max_speed: f64,
}

impl ArrayGeometry {
    pub fn new(
        num_tracks: usize,
        antennas_per_track: usize,
        span: f64,
        min_separation: f64,
        max_speed: f64,
    ) -> Result<Self> {
        let geometry = ArrayGeometry {
            num_tracks,
            antennas_per_track,
            span,
            min_separation,
            max_speed,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tracks < 1 {
            return Err(Error::field("geometry.M", "must be at least 1"));
        }
        if self.antennas_per_track < 1 {
            return Err(Error::field("geometry.N", "must be at least 1"));
        }
        if !(self.span.is_finite() && self.span > 0.0) {
            return Err(Error::field("geometry.L", "must be finite and positive"));
        }
        if !(self.min_separation.is_finite() && self.min_separation > 0.0) {
            return Err(Error::field("geometry.d_min", "must be finite and positive"));
        }
        if !(self.max_speed.is_finite() && self.max_speed >= 0.0) {
            return Err(Error::field("geometry.V_max", "must be finite and non-negative"));
        }
        let required = (self.num_tracks - 1) as f64 * self.min_separation;
        if required > self.span {
            return Err(Error::InfeasibleGeometry {
                required,
                span: self.span,
            });
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.num_tracks * self.antennas_per_track
    }

    /// Vertical antenna offsets on a track: `0, 1/2, ..., (N-1)/2`.
    pub fn vertical_offsets(&self) -> Vec<f64> {
        (0..self.antennas_per_track).map(|n| 0.5 * n as f64).collect()
    }

    /// Room left for the tracks once the minimum gaps are subtracted,
    /// `L - (M-1) d_min`.
    pub fn free_span(&self) -> f64 {
        (self.span - (self.num_tracks - 1) as f64 * self.min_separation).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    /// Elevation angle of arrival, radians.
    pub elevation: f64,
    /// Azimuth angle of arrival, radians.
    pub azimuth: f64,
    /// Transmit power, dBm.
    pub power_dbm: f64,
    /// Linear large-scale channel gain `beta`.
    pub gain: f64,
}

impl UserSpec {
    pub fn new(elevation: f64, azimuth: f64, power_dbm: f64, gain: f64) -> Self {
        UserSpec {
            elevation,
            azimuth,
            power_dbm,
            gain,
        }
    }

    /// Horizontal virtual AoA, `cos(theta) cos(phi)`.
    pub fn horizontal_aoa(&self) -> f64 {
        self.elevation.cos() * self.azimuth.cos()
    }

    /// Vertical virtual AoA, `sin(theta)`.
    pub fn vertical_aoa(&self) -> f64 {
        self.elevation.sin()
    }

    fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("users[{index}].{name}");
        if !self.elevation.is_finite() {
            return Err(Error::field(field("theta"), "must be finite"));
        }
        if !self.azimuth.is_finite() {
            return Err(Error::field(field("phi"), "must be finite"));
        }
        if !self.power_dbm.is_finite() {
            return Err(Error::field(field("power_dbm"), "must be finite"));
        }
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(Error::field(field("beta"), "must be finite and positive"));
        }
        Ok(())
    }
}

/// A validated problem instance. Immutable once built; the `with_*`
/// constructors return modified, re-validated copies.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    geometry: ArrayGeometry,
    users: Vec<UserSpec>,
    noise_dbm: f64,
    horizon: f64,
    normalized_power: Vec<f64>,
}

impl Scenario {
    pub fn new(geometry: ArrayGeometry, users: Vec<UserSpec>, noise_dbm: f64, horizon: f64) -> Result<Self> {
        geometry.validate()?;
        if users.is_empty() {
            return Err(Error::field("users", "at least one user is required"));
        }
        for (index, user) in users.iter().enumerate() {
            user.validate(index)?;
        }
        if !noise_dbm.is_finite() {
            return Err(Error::field("noise_dbm", "must be finite"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::field("horizon_T", "must be finite and positive"));
        }
        let normalized_power: Vec<f64> = users.iter().map(|u| db_to_linear(u.power_dbm - noise_dbm)).collect();
        for (index, p) in normalized_power.iter().enumerate() {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::field(
                    format!("users[{index}].power_dbm"),
                    "normalized power must be finite and positive",
                ));
            }
        }
        Ok(Scenario {
            geometry,
            users,
            noise_dbm,
            horizon,
            normalized_power,
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn users(&self) -> &[UserSpec] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn noise_dbm(&self) -> f64 {
        self.noise_dbm
    }

    /// Time horizon `T` in seconds.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Linear `P_k / sigma^2`.
    pub fn normalized_power(&self, k: usize) -> f64 {
        self.normalized_power[k]
    }

    pub fn gain(&self, k: usize) -> f64 {
        self.users[k].gain
    }

    /// Receive SNR scale `P_k beta_k / sigma^2` of user `k` per antenna.
    pub fn snr(&self, k: usize) -> f64 {
        self.normalized_power[k] * self.users[k].gain
    }

    pub fn with_geometry(&self, geometry: ArrayGeometry) -> Result<Self> {
        Scenario::new(geometry, self.users.clone(), self.noise_dbm, self.horizon)
    }

    pub fn with_span(&self, span: f64) -> Result<Self> {
        self.with_geometry(ArrayGeometry {
            span,
            ..self.geometry.clone()
        })
    }

    pub fn with_max_speed(&self, max_speed: f64) -> Result<Self> {
        self.with_geometry(ArrayGeometry {
            max_speed,
            ..self.geometry.clone()
        })
    }

    pub fn with_users(&self, users: Vec<UserSpec>) -> Result<Self> {
        Scenario::new(self.geometry.clone(), users, self.noise_dbm, self.horizon)
    }

    /// Replaces the users by the first `k` entries of the sweep angle tables,
    /// all with the power and gain of the current first user.
    pub fn with_table_users(&self, k: usize) -> Result<Self> {
        if k == 0 || k > SWEEP_ELEVATIONS.len() {
            return Err(Error::field(
                "K",
                format!("must be between 1 and {}", SWEEP_ELEVATIONS.len()),
            ));
        }
        let template = &self.users[0];
        let users = SWEEP_ELEVATIONS
            .iter()
            .zip(SWEEP_AZIMUTHS)
            .take(k)
            .map(|(&theta, phi)| UserSpec::new(theta, phi, template.power_dbm, template.gain))
            .collect();
        self.with_users(users)
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Scenario::new(self.geometry.clone(), self.users.clone(), self.noise_dbm, horizon)
    }

    /// Copy of the scenario whose elevation and azimuth angles are all
    /// offset by `error` radians, as seen by a receiver with biased angle
    /// estimates.
    pub fn apply_aoa_error(&self, error: f64) -> Scenario {
        let mut perturbed = self.clone();
        for user in &mut perturbed.users {
            user.elevation += error;
            user.azimuth += error;
        }
        perturbed
    }

    /// Serializes to the TOML scenario schema, optionally with a solver table.
    pub fn to_toml(&self, solver: Option<&SolverConfig>) -> String {
        let file = ScenarioFile::from_resolved(self, solver.cloned());
        toml::to_string(&file).expect("scenario serializes to TOML")
    }
}

/// Knobs for every solver in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Random initial patterns per weighted-sum evaluation.
    pub num_starts: usize,
    pub sca_max_iters: usize,
    /// Relative objective improvement below which SCA is stationary.
    pub sca_rel_tol: f64,
    pub ellipsoid_max_iters: usize,
    /// Stop once the ellipsoid width `sqrt(g'Bg)` along the last
    /// objective cut falls below this.
    pub ellipsoid_tol: f64,
    /// `|sum(mu) - 1|` below which the weights count as lying on the simplex.
    pub simplex_tol: f64,
    /// Max-norm distance under which two stationary patterns are merged.
    pub pattern_merge_tol: f64,
    /// Relative objective gap under which patterns jointly maximize the
    /// weighted sum.
    pub concurrent_max_rel_tol: f64,
    pub grid_step: f64,
    pub quadrature_samples_per_segment: usize,
    /// Smoothing temperature of the soft-min used by the max-min SCA
    /// (static baseline with three or more tracks).
    pub softmin_temperature: f64,
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            num_starts: 12,
            sca_max_iters: 100,
            sca_rel_tol: 1e-5,
            ellipsoid_max_iters: 500,
            ellipsoid_tol: 1e-4,
            simplex_tol: 1e-7,
            pattern_merge_tol: 0.05,
            concurrent_max_rel_tol: 1e-3,
            grid_step: 0.01,
            quadrature_samples_per_segment: 200,
            softmin_temperature: 1e-3,
            rng_seed: 0x5eed,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, geometry: &ArrayGeometry) -> Result<()> {
        let positive = |name: &str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::field(format!("solver.{name}"), "must be strictly positive"))
            }
        };
        if self.num_starts == 0 {
            return Err(Error::field("solver.num_starts", "must be at least 1"));
        }
        if self.sca_max_iters == 0 {
            return Err(Error::field("solver.sca_max_iters", "must be at least 1"));
        }
        if self.ellipsoid_max_iters == 0 {
            return Err(Error::field("solver.ellipsoid_max_iters", "must be at least 1"));
        }
        if self.quadrature_samples_per_segment < 2 {
            return Err(Error::field(
                "solver.quadrature_samples_per_segment",
                "must be at least 2",
            ));
        }
        positive("sca_rel_tol", self.sca_rel_tol)?;
        positive("ellipsoid_tol", self.ellipsoid_tol)?;
        positive("simplex_tol", self.simplex_tol)?;
        positive("pattern_merge_tol", self.pattern_merge_tol)?;
        positive("concurrent_max_rel_tol", self.concurrent_max_rel_tol)?;
        positive("grid_step", self.grid_step)?;
        positive("softmin_temperature", self.softmin_temperature)?;
        if self.grid_step > geometry.min_separation {
            return Err(Error::field("solver.grid_step", "must not exceed d_min"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    #[default]
    Wavelength,
    Meter,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    #[serde(rename = "M")]
    num_tracks: usize,
    #[serde(rename = "N")]
    antennas_per_track: usize,
    #[serde(rename = "L")]
    span: f64,
    d_min: f64,
    #[serde(rename = "V_max")]
    max_speed: f64,
    #[serde(default)]
    unit: LengthUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wavelength_m: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathLoss {
    beta0: f64,
    r: f64,
    alpha0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserSection {
    theta: f64,
    phi: f64,
    power_dbm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path_loss: Option<PathLoss>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    noise_dbm: f64,
    #[serde(rename = "horizon_T")]
    horizon: f64,
    geometry: GeometrySection,
    users: Vec<UserSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<SolverConfig>,
}

impl ScenarioFile {
    fn from_resolved(scenario: &Scenario, solver: Option<SolverConfig>) -> Self {
        let g = &scenario.geometry;
        ScenarioFile {
            noise_dbm: scenario.noise_dbm,
            horizon: scenario.horizon,
            geometry: GeometrySection {
                num_tracks: g.num_tracks,
                antennas_per_track: g.antennas_per_track,
                span: g.span,
                d_min: g.min_separation,
                max_speed: g.max_speed,
                unit: LengthUnit::Wavelength,
                wavelength_m: None,
            },
            users: scenario
                .users
                .iter()
                .map(|u| UserSection {
                    theta: u.elevation,
                    phi: u.azimuth,
                    power_dbm: u.power_dbm,
                    beta: Some(u.gain),
                    path_loss: None,
                })
                .collect(),
            solver,
        }
    }

    fn resolve(self) -> Result<(Scenario, SolverConfig)> {
        let g = self.geometry;
        let scale = match g.unit {
            LengthUnit::Wavelength => 1.0,
            LengthUnit::Meter => {
                let lambda = g
                    .wavelength_m
                    .ok_or_else(|| Error::field("geometry.wavelength_m", "required when unit = \"meter\""))?;
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::field("geometry.wavelength_m", "must be finite and positive"));
                }
                1.0 / lambda
            }
        };
        let geometry = ArrayGeometry::new(
            g.num_tracks,
            g.antennas_per_track,
            g.span * scale,
            g.d_min * scale,
            g.max_speed * scale,
        )?;
        let users = self
            .users
            .into_iter()
            .enumerate()
            .map(|(index, u)| {
                let gain = match (u.beta, u.path_loss) {
                    (Some(beta), None) => beta,
                    (None, Some(pl)) => pl.beta0 * pl.r.powf(-pl.alpha0),
                    (Some(_), Some(_)) => {
                        return Err(Error::field(
                            format!("users[{index}]"),
                            "give either `beta` or `path_loss`, not both",
                        ))
                    }
                    (None, None) => {
                        return Err(Error::field(format!("users[{index}]"), "missing `beta` or `path_loss`"))
                    }
                };
                Ok(UserSpec::new(u.theta, u.phi, u.power_dbm, gain))
            })
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario::new(geometry, users, self.noise_dbm, self.horizon)?;
        let solver = self.solver.unwrap_or_default();
        solver.validate(scenario.geometry())?;
        Ok((scenario, solver))
    }
}

/// Parses a TOML scenario document into a scenario and its solver settings.
pub fn parse_config(text: &str) -> Result<(Scenario, SolverConfig)> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.resolve()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(Scenario, SolverConfig)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    load_config(path).map(|(scenario, _)| scenario)
}

/// Elevation angles of the nine-user table used for user-count sweeps.
pub const SWEEP_ELEVATIONS: [f64; 9] = [1.41, 1.14, 1.81, 0.18, 3.12, 2.91, 0.73, 1.09, 2.98];
/// Azimuth angles paired with [`SWEEP_ELEVATIONS`].
pub const SWEEP_AZIMUTHS: [f64; 9] = [0.72, 0.69, 1.65, 2.23, 2.28, 0.41, 1.62, 0.59, 0.38];

/// The two-track, three-user reference instance: `L = 20`, `d_min = 0.5`,
/// 10 dBm transmit power and `beta / sigma^2 = 1`.
pub fn reference_scenario() -> Scenario {
    use std::f64::consts::PI;
    let elevations = [PI / 7.0, PI / 6.7, PI / 6.0];
    let azimuths = [PI / 7.2, PI / 6.5, PI / 5.8];
    let users = elevations
        .iter()
        .zip(azimuths)
        .map(|(&theta, phi)| UserSpec::new(theta, phi, 10.0, 1.0))
        .collect();
    let geometry = ArrayGeometry::new(2, 3, 20.0, 0.5, 1.0).expect("reference geometry");
    Scenario::new(geometry, users, 0.0, 100.0).expect("reference scenario")
}

/// The first `k` users of the sweep angle tables on a three-track,
/// three-antenna array, otherwise as in [`reference_scenario`].
pub fn user_table_scenario(k: usize) -> Result<Scenario> {
    let geometry = ArrayGeometry::new(3, 3, 20.0, 0.5, 1.0)?;
    reference_scenario().with_geometry(geometry)?.with_table_users(k)
}
