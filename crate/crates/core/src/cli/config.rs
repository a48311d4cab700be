//! JSON scenario configuration. Values are in the units named by each key
//! (dB, dBm, Hz, s, m); conversion to linear SI happens in [`resolve`].

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::channel::{NoiseSpec, PathSpec, PulseShape, Scene, TargetSpec};
use crate::grid::{allocate_users, Allocation, AllocationScheme, GridSpec};
use crate::metrics::MterVariant;
use crate::receiver::{PeriodogramConfig, Refinement};
use crate::rng::trial_rng;
use crate::units::{db_to_linear, SPEED_OF_LIGHT};
use crate::waveform::Qam;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub allocation: AllocationConfig,
    pub scene: SceneConfig,
    pub power: PowerConfig,
    pub noise: NoiseConfig,
    pub sensing: SensingConfig,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Subcarrier count `M`.
    pub m: usize,
    /// Symbol count `N`.
    pub n: usize,
    pub delta_f_hz: f64,
    pub t_cp_s: f64,
    pub f0_hz: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 1024, n: 128, delta_f_hz: 1e9 / 1024.0, t_cp_s: 0.102e-6, f0_hz: 30e9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct AllocationConfig {
    /// Number of UEs `K`.
    pub k: usize,
    /// Communication band width in subcarriers.
    pub m_com: usize,
    /// Occupancy of the communication band.
    pub eta: f64,
    pub scheme: AllocationScheme,
    /// Master seed; `--seed` overrides it.
    pub seed: u64,
    /// Shift of the communication band from the grid center, in subcarriers.
    pub band_offset: i64,
    pub qam_order: usize,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        Self {
            k: 1,
            m_com: 512,
            eta: 0.5,
            scheme: AllocationScheme::RandomUniform,
            seed: 0,
            band_offset: 0,
            qam_order: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    /// One entry per UE.
    pub ues: Vec<UeConfig>,
    pub targets: Vec<TargetConfig>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self { ues: vec![UeConfig::default()], targets: vec![TargetConfig::default()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct UeConfig {
    pub paths: Vec<PathConfig>,
}

impl Default for UeConfig {
    fn default() -> Self {
        Self { paths: vec![PathConfig::default()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct PathConfig {
    pub range_m: f64,
    pub velocity_mps: f64,
    /// Amplitude beam gain; defaults to `√L`.
    pub beam_gain: Option<f64>,
    /// Path variance override in dB; defaults to free-space loss.
    pub gain_db: Option<f64>,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self { range_m: 50.0, velocity_mps: 0.0, beam_gain: None, gain_db: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    pub rcs_m2: f64,
    pub range_m: f64,
    pub velocity_mps: f64,
    /// Amplitude beam gain (Tx and Rx combined); defaults to `L`.
    pub beam_gain: Option<f64>,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { rcs_m2: 1.0, range_m: 50.0, velocity_mps: 0.0, beam_gain: None }
    }
}

/// Either a fixed total power with a sensing ratio, or the minimum-power
/// allocation that meets the listed targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PowerConfig {
    Fixed {
        #[serde(default = "default_p_tot_dbm")]
        p_tot_dbm: f64,
        /// Per-subcarrier sensing-to-communication power ratio.
        #[serde(default = "default_sensing_ratio_db")]
        sensing_ratio_db: f64,
    },
    Solve(SolveConfig),
}

fn default_p_tot_dbm() -> f64 {
    43.0
}

fn default_sensing_ratio_db() -> f64 {
    -30.0
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig::Fixed { p_tot_dbm: default_p_tot_dbm(), sensing_ratio_db: default_sensing_ratio_db() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// UE SDNR threshold.
    pub gamma_ft_db: f64,
    /// Sensing SDNR threshold.
    pub gamma_dd_db: f64,
    /// Required in-band over out-of-band power.
    pub aclr_rel_db: f64,
    /// Out-of-band power spectral density cap.
    pub aclr_abs_dbm_per_hz: f64,
    pub p_max_dbm: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { gamma_ft_db: 10.0, gamma_dd_db: 10.0, aclr_rel_db: 0.0, aclr_abs_dbm_per_hz: -40.0, p_max_dbm: 43.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub noise_figure_db: f64,
    /// Antenna count `L`.
    pub antennas: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { noise_figure_db: 10.0, antennas: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SensingConfig {
    pub impulse_delay_bin: usize,
    pub impulse_doppler_bin: i64,
    pub pulse: PulseShape,
    /// Remove the known communication echo at the BS before estimation.
    pub bs_cancellation: bool,
    /// Remove the known sensing signal at the UE.
    pub ue_cancellation: bool,
    pub max_targets: usize,
    pub min_separation_bins: usize,
    /// Detection threshold over the estimated noise floor.
    pub threshold_db: f64,
    pub refinement: Refinement,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            impulse_delay_bin: 0,
            impulse_doppler_bin: 0,
            pulse: PulseShape::Flat,
            bs_cancellation: false,
            ue_cancellation: false,
            max_targets: 1,
            min_separation_bins: 2,
            threshold_db: 10.0,
            refinement: Refinement::None,
        }
    }
}

/// Which sweep to run and its axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    SdnrVsRange(SdnrVsRange),
    CrbRatioEta(CrbRatioEta),
    CrbRatioTwoTargets(CrbRatioTwoTargets),
    MterSweep(MterSweep),
    AmbiguitySlice(AmbiguitySlice),
    RateVsPower(RateVsPower),
    MontecarloEstimation(MontecarloEstimation),
    PowerAllocation(PowerAllocation),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::SdnrVsRange(SdnrVsRange::default())
    }
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::SdnrVsRange(_) => "sdnr-vs-range",
            ExperimentConfig::CrbRatioEta(_) => "crb-ratio-eta",
            ExperimentConfig::CrbRatioTwoTargets(_) => "crb-ratio-two-targets",
            ExperimentConfig::MterSweep(_) => "mter-sweep",
            ExperimentConfig::AmbiguitySlice(_) => "ambiguity-slice",
            ExperimentConfig::RateVsPower(_) => "rate-vs-power",
            ExperimentConfig::MontecarloEstimation(_) => "montecarlo-estimation",
            ExperimentConfig::PowerAllocation(_) => "power-allocation",
        }
    }
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
}

fn lin_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SdnrVsRange {
    pub ranges_m: Vec<f64>,
}

impl Default for SdnrVsRange {
    fn default() -> Self {
        Self { ranges_m: log_space(1.0, 1000.0, 31) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct CrbRatioEta {
    pub etas: Vec<f64>,
    pub band_fractions: Vec<f64>,
    /// Treat the communication echo as interference for the dual-domain
    /// estimator.
    pub colored_noise: bool,
}

impl Default for CrbRatioEta {
    fn default() -> Self {
        Self {
            etas: lin_space(0.1, 1.0, 10),
            band_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            colored_noise: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct CrbRatioTwoTargets {
    /// `(τ2 − τ1)/Δτ`
    pub separations: Vec<f64>,
    pub band_fractions: Vec<f64>,
    pub eta: f64,
    pub colored_noise: bool,
}

impl Default for CrbRatioTwoTargets {
    fn default() -> Self {
        Self {
            separations: lin_space(0.1, 3.0, 30),
            band_fractions: vec![0.1, 0.2, 0.3],
            eta: 0.5,
            colored_noise: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct MterSweep {
    pub band_fractions: Vec<f64>,
    pub eta: f64,
    /// Samples per main-lobe axis.
    pub samples: usize,
    pub variant: MterVariant,
}

impl Default for MterSweep {
    fn default() -> Self {
        Self { band_fractions: lin_space(0.1, 1.0, 10), eta: 1.0, samples: 33, variant: MterVariant::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct AmbiguitySlice {
    pub band_fractions: Vec<f64>,
    pub eta: f64,
    /// Half-width of the delay axis in delay bins.
    pub tau_max_bins: f64,
    pub points: usize,
}

impl Default for AmbiguitySlice {
    fn default() -> Self {
        Self { band_fractions: vec![0.1, 0.3, 0.5, 1.0], eta: 1.0, tau_max_bins: 20.0, points: 401 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct RateVsPower {
    pub p_tot_dbm: Vec<f64>,
    pub ue_ranges_m: Vec<f64>,
}

impl Default for RateVsPower {
    fn default() -> Self {
        Self { p_tot_dbm: lin_space(-20.0, 60.0, 41), ue_ranges_m: vec![10.0, 50.0, 100.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct MontecarloEstimation {
    pub trials: usize,
}

impl Default for MontecarloEstimation {
    fn default() -> Self {
        Self { trials: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PowerAllocation {}

/// One problem with a configuration, located by its dotted key path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn issue(path: impl Into<String>, message: impl Into<String>) -> Issue {
    Issue { path: path.into(), message: message.into() }
}

/// Schema-level parse; type errors carry the path of the offending key.
pub fn parse(text: &str) -> std::result::Result<ScenarioConfig, Issue> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        issue(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })
}

pub fn schema() -> schemars::schema::RootSchema {
    schemars::schema_for!(ScenarioConfig)
}

fn positive(issues: &mut Vec<Issue>, path: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        issues.push(issue(path, format!("must be positive, got {v}")));
    }
}

fn finite(issues: &mut Vec<Issue>, path: &str, v: f64) {
    if !v.is_finite() {
        issues.push(issue(path, format!("must be finite, got {v}")));
    }
}

fn fractions(issues: &mut Vec<Issue>, path: &str, values: &[f64]) {
    if values.is_empty() {
        issues.push(issue(path, "must not be empty"));
    }
    for (i, v) in values.iter().enumerate() {
        if !(*v > 0.0 && *v <= 1.0) {
            issues.push(issue(format!("{path}[{i}]"), format!("must lie in (0, 1], got {v}")));
        }
    }
}

impl ScenarioConfig {
    /// Range checks beyond the schema types. An empty list means valid.
    pub fn check(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let g = &self.grid;
        if g.m < 2 {
            out.push(issue("grid.m", format!("must be >= 2, got {}", g.m)));
        }
        if g.n < 2 {
            out.push(issue("grid.n", format!("must be >= 2, got {}", g.n)));
        }
        if g.m % 2 == 1 {
            out.push(issue("grid.m", "must be even"));
        }
        if g.n % 2 == 1 {
            out.push(issue("grid.n", "must be even"));
        }
        positive(&mut out, "grid.delta_f_hz", g.delta_f_hz);
        if !(g.t_cp_s.is_finite() && g.t_cp_s >= 0.0) {
            out.push(issue("grid.t_cp_s", format!("must be non-negative, got {}", g.t_cp_s)));
        }
        positive(&mut out, "grid.f0_hz", g.f0_hz);

        let a = &self.allocation;
        if a.m_com == 0 || a.m_com > g.m {
            out.push(issue("allocation.m_com", format!("must lie in [1, {}], got {}", g.m, a.m_com)));
        }
        if !(a.eta > 0.0 && a.eta <= 1.0) {
            out.push(issue("allocation.eta", format!("must lie in (0, 1], got {}", a.eta)));
        }
        if Qam::new(a.qam_order).is_err() {
            out.push(issue("allocation.qam_order", format!("unsupported QAM order {}", a.qam_order)));
        }
        if self.scene.ues.len() != a.k {
            out.push(issue(
                "scene.ues",
                format!("{} UEs described but allocation.k = {}", self.scene.ues.len(), a.k),
            ));
        }
        for (k, ue) in self.scene.ues.iter().enumerate() {
            if ue.paths.is_empty() {
                out.push(issue(format!("scene.ues[{k}].paths"), "a UE needs at least one path"));
            }
            for (u, p) in ue.paths.iter().enumerate() {
                let base = format!("scene.ues[{k}].paths[{u}]");
                positive(&mut out, &format!("{base}.range_m"), p.range_m);
                finite(&mut out, &format!("{base}.velocity_mps"), p.velocity_mps);
                if let Some(b) = p.beam_gain {
                    if !(b.is_finite() && b >= 0.0) {
                        out.push(issue(format!("{base}.beam_gain"), "must be non-negative"));
                    }
                }
                if let Some(db) = p.gain_db {
                    finite(&mut out, &format!("{base}.gain_db"), db);
                }
            }
        }
        for (q, t) in self.scene.targets.iter().enumerate() {
            let base = format!("scene.targets[{q}]");
            positive(&mut out, &format!("{base}.rcs_m2"), t.rcs_m2);
            positive(&mut out, &format!("{base}.range_m"), t.range_m);
            finite(&mut out, &format!("{base}.velocity_mps"), t.velocity_mps);
            if let Some(b) = t.beam_gain {
                if !(b.is_finite() && b >= 0.0) {
                    out.push(issue(format!("{base}.beam_gain"), "must be non-negative"));
                }
            }
        }

        match &self.power {
            PowerConfig::Fixed { p_tot_dbm, sensing_ratio_db } => {
                finite(&mut out, "power.p_tot_dbm", *p_tot_dbm);
                finite(&mut out, "power.sensing_ratio_db", *sensing_ratio_db);
            }
            PowerConfig::Solve(s) => {
                finite(&mut out, "power.gamma_ft_db", s.gamma_ft_db);
                finite(&mut out, "power.gamma_dd_db", s.gamma_dd_db);
                finite(&mut out, "power.aclr_rel_db", s.aclr_rel_db);
                finite(&mut out, "power.aclr_abs_dbm_per_hz", s.aclr_abs_dbm_per_hz);
                finite(&mut out, "power.p_max_dbm", s.p_max_dbm);
            }
        }

        finite(&mut out, "noise.noise_figure_db", self.noise.noise_figure_db);
        if self.noise.antennas == 0 {
            out.push(issue("noise.antennas", "must be at least 1"));
        }

        let s = &self.sensing;
        if s.impulse_delay_bin >= g.m {
            out.push(issue("sensing.impulse_delay_bin", format!("must be < M = {}", g.m)));
        }
        let half = (g.n / 2) as i64;
        if !(-half..half).contains(&s.impulse_doppler_bin) {
            out.push(issue("sensing.impulse_doppler_bin", format!("must lie in [{}, {}]", -half, half - 1)));
        }
        if let PulseShape::RaisedCosine { rolloff } = s.pulse {
            if !(0.0..=1.0).contains(&rolloff) {
                out.push(issue("sensing.pulse.rolloff", format!("must lie in [0, 1], got {rolloff}")));
            }
        }
        if s.max_targets == 0 {
            out.push(issue("sensing.max_targets", "must be at least 1"));
        }
        finite(&mut out, "sensing.threshold_db", s.threshold_db);

        let e = "experiment";
        match &self.experiment {
            ExperimentConfig::SdnrVsRange(x) => {
                if x.ranges_m.is_empty() {
                    out.push(issue(format!("{e}.ranges_m"), "must not be empty"));
                }
                for (i, r) in x.ranges_m.iter().enumerate() {
                    positive(&mut out, &format!("{e}.ranges_m[{i}]"), *r);
                }
                if self.scene.targets.is_empty() {
                    out.push(issue("scene.targets", "sdnr-vs-range needs a target"));
                }
            }
            ExperimentConfig::CrbRatioEta(x) => {
                fractions(&mut out, &format!("{e}.etas"), &x.etas);
                fractions(&mut out, &format!("{e}.band_fractions"), &x.band_fractions);
                if self.scene.targets.is_empty() {
                    out.push(issue("scene.targets", "crb-ratio-eta needs a target"));
                }
            }
            ExperimentConfig::CrbRatioTwoTargets(x) => {
                fractions(&mut out, &format!("{e}.band_fractions"), &x.band_fractions);
                fractions(&mut out, &format!("{e}.eta"), &[x.eta]);
                for (i, v) in x.separations.iter().enumerate() {
                    finite(&mut out, &format!("{e}.separations[{i}]"), *v);
                }
                if self.scene.targets.is_empty() {
                    out.push(issue("scene.targets", "crb-ratio-two-targets needs a target"));
                }
            }
            ExperimentConfig::MterSweep(x) => {
                fractions(&mut out, &format!("{e}.band_fractions"), &x.band_fractions);
                fractions(&mut out, &format!("{e}.eta"), &[x.eta]);
                if x.samples < crate::metrics::ambiguity::MIN_LOBE_SAMPLES {
                    out.push(issue(format!("{e}.samples"), "at least 8 samples per main-lobe axis are required"));
                }
            }
            ExperimentConfig::AmbiguitySlice(x) => {
                fractions(&mut out, &format!("{e}.band_fractions"), &x.band_fractions);
                fractions(&mut out, &format!("{e}.eta"), &[x.eta]);
                positive(&mut out, &format!("{e}.tau_max_bins"), x.tau_max_bins);
                if x.tau_max_bins > g.m as f64 {
                    out.push(issue(format!("{e}.tau_max_bins"), "must not exceed M"));
                }
                if x.points < 2 {
                    out.push(issue(format!("{e}.points"), "must be at least 2"));
                }
            }
            ExperimentConfig::RateVsPower(x) => {
                for (i, v) in x.p_tot_dbm.iter().enumerate() {
                    finite(&mut out, &format!("{e}.p_tot_dbm[{i}]"), *v);
                }
                for (i, v) in x.ue_ranges_m.iter().enumerate() {
                    positive(&mut out, &format!("{e}.ue_ranges_m[{i}]"), *v);
                }
                if a.k == 0 {
                    out.push(issue("allocation.k", "rate-vs-power needs a UE"));
                }
            }
            ExperimentConfig::MontecarloEstimation(x) => {
                if x.trials == 0 {
                    out.push(issue(format!("{e}.trials"), "must be at least 1"));
                }
                if self.scene.targets.is_empty() {
                    out.push(issue("scene.targets", "montecarlo-estimation needs a target"));
                }
                if a.k == 0 {
                    out.push(issue("allocation.k", "montecarlo-estimation needs a UE"));
                }
            }
            ExperimentConfig::PowerAllocation(_) => {
                if !matches!(self.power, PowerConfig::Solve(_)) {
                    out.push(issue("power.mode", "power-allocation requires mode \"solve\""));
                }
            }
        }
        if a.k >= 1 && a.m_com >= 1 && a.m_com <= g.m && a.eta > 0.0 && a.eta <= 1.0 {
            let count = crate::grid::allocated_count(a.eta, a.m_com, g.n);
            if count < a.k {
                out.push(issue(
                    "allocation.k",
                    format!("eta·M_com·N = {count} resources cannot serve {} UEs", a.k),
                ));
            }
        }
        out
    }

    /// Physics warnings that do not block a run.
    pub fn warnings(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let t_cp = self.grid.t_cp_s;
        for (q, t) in self.scene.targets.iter().enumerate() {
            let delay = 2.0 * t.range_m / SPEED_OF_LIGHT;
            if delay > t_cp {
                out.push(issue(
                    format!("scene.targets[{q}].range_m"),
                    format!(
                        "round-trip delay {:.1} ns exceeds the cyclic prefix {:.1} ns; the echo is not circular",
                        delay * 1e9,
                        t_cp * 1e9
                    ),
                ));
            }
        }
        for (k, ue) in self.scene.ues.iter().enumerate() {
            for (u, p) in ue.paths.iter().enumerate() {
                let delay = p.range_m / SPEED_OF_LIGHT;
                if delay > t_cp {
                    out.push(issue(
                        format!("scene.ues[{k}].paths[{u}].range_m"),
                        format!("path delay {:.1} ns exceeds the cyclic prefix {:.1} ns", delay * 1e9, t_cp * 1e9),
                    ));
                }
            }
        }
        out
    }
}

/// Seed stream reserved for drawing the allocation.
pub const ALLOCATION_STREAM: u64 = u64::MAX;

/// Linear-SI view of a checked configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: GridSpec,
    pub scene: Scene,
    pub noise: NoiseSpec,
    pub qam: Qam,
    pub impulse: (usize, i64),
    pub pulse: PulseShape,
    pub periodogram: PeriodogramConfig,
    pub seed: u64,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

pub fn resolve(cfg: &ScenarioConfig, seed: u64) -> Result<Resolved> {
    let issues = cfg.check();
    if let Some(first) = issues.first() {
        return Err(Error::Config(first.to_string()));
    }
    let g = &cfg.grid;
    let grid = GridSpec::new(g.m, g.n, g.delta_f_hz, g.t_cp_s, g.f0_hz).map_err(config_err)?;
    let l = cfg.noise.antennas as f64;
    let mut ues = Vec::with_capacity(cfg.scene.ues.len());
    for ue in &cfg.scene.ues {
        let mut paths = Vec::with_capacity(ue.paths.len());
        for p in &ue.paths {
            let zeta = p.beam_gain.unwrap_or(l.sqrt());
            let mut path = PathSpec::line_of_sight(g.f0_hz, p.range_m, p.velocity_mps, zeta).map_err(config_err)?;
            if let Some(db) = p.gain_db {
                path.variance = db_to_linear(db);
            }
            paths.push(path);
        }
        ues.push(paths);
    }
    let targets = cfg
        .scene
        .targets
        .iter()
        .map(|t| TargetSpec::new(t.rcs_m2, t.range_m, t.velocity_mps, t.beam_gain.unwrap_or(l)))
        .collect::<Result<Vec<_>>>()
        .map_err(config_err)?;
    let s = &cfg.sensing;
    Ok(Resolved {
        grid,
        scene: Scene { ues, targets },
        noise: NoiseSpec::thermal(&grid, cfg.noise.noise_figure_db, cfg.noise.antennas).map_err(config_err)?,
        qam: Qam::new(cfg.allocation.qam_order).map_err(config_err)?,
        impulse: (s.impulse_delay_bin, s.impulse_doppler_bin),
        pulse: s.pulse,
        periodogram: PeriodogramConfig {
            max_targets: s.max_targets,
            min_separation: s.min_separation_bins,
            threshold: db_to_linear(s.threshold_db),
            refinement: s.refinement,
        },
        seed,
    })
}

impl Resolved {
    /// The configured UE allocation, drawn from a stream of the master seed
    /// that no trial uses.
    pub fn allocation(&self, cfg: &AllocationConfig) -> Result<Allocation> {
        if cfg.k == 0 {
            return Ok(Allocation::empty(&self.grid));
        }
        allocate_users(&self.grid, cfg.k, cfg.m_com, cfg.eta, cfg.scheme, cfg.band_offset, &mut trial_rng(self.seed, ALLOCATION_STREAM))
            .map_err(config_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_table_one() {
        let cfg = parse("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert!(cfg.check().is_empty());
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let e = parse(r#"{"grid": {"m": 64, "bogus": 1}}"#).unwrap_err();
        assert!(e.path.starts_with("grid"), "{e}");
        assert!(e.message.contains("bogus"), "{e}");
    }

    #[test]
    fn type_error_has_path() {
        let e = parse(r#"{"noise": {"antennas": "many"}}"#).unwrap_err();
        assert_eq!(e.path, "noise.antennas");
    }

    #[test]
    fn negative_spacing_flagged() {
        let cfg = parse(r#"{"grid": {"delta_f_hz": -1.0}}"#).unwrap();
        let issues = cfg.check();
        assert_eq!(issues[0].path, "grid.delta_f_hz");
    }

    #[test]
    fn too_few_resources_for_ues() {
        let cfg = parse(
            r#"{"grid": {"m": 4, "n": 2}, "allocation": {"k": 3, "m_com": 1, "eta": 1.0},
                "scene": {"ues": [{}, {}, {}]}}"#,
        )
        .unwrap();
        assert!(cfg.check().iter().any(|i| i.path == "allocation.k"), "{:?}", cfg.check());
    }

    #[test]
    fn experiment_tag_and_fields() {
        let cfg = parse(r#"{"experiment": {"name": "mter-sweep", "band_fractions": [0.3]}}"#).unwrap();
        let ExperimentConfig::MterSweep(m) = &cfg.experiment else { panic!() };
        assert_eq!(m.band_fractions, vec![0.3]);
        assert!(parse(r#"{"experiment": {"name": "mter-sweep", "nope": 1}}"#).is_err());
        assert!(parse(r#"{"experiment": {"name": "unknown"}}"#).is_err());
    }

    #[test]
    fn solve_mode_parses() {
        let cfg = parse(r#"{"power": {"mode": "solve", "gamma_ft_db": 5}}"#).unwrap();
        let PowerConfig::Solve(s) = cfg.power else { panic!() };
        assert_eq!(s.gamma_ft_db, 5.0);
        assert_eq!(s.p_max_dbm, 43.0);
    }

    #[test]
    fn cp_warning_beyond_cover() {
        let mut cfg = ScenarioConfig::default();
        cfg.scene.ues[0].paths[0].range_m = 10.0;
        cfg.scene.targets[0].range_m = 15.0;
        assert!(cfg.warnings().is_empty());
        cfg.scene.targets[0].range_m = 50.0;
        assert_eq!(cfg.warnings().len(), 1);
    }
}
