//! The experiment sweeps. Each returns a [`Table`] plus summary values; rows
//! come out in axis order whatever the thread count.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{
    AmbiguitySlice, CrbRatioEta, CrbRatioTwoTargets, ExperimentConfig, MontecarloEstimation, MterSweep,
    PowerConfig, RateVsPower, Resolved, ScenarioConfig, SdnrVsRange, SolveConfig,
};
use crate::channel::{
    comm_channel_ft, friis_gain, sensing_channel_ft, add_noise, apply_channel, Side, TargetSpec,
};
use crate::error::{Error, Result};
use crate::grid::{allocate_users, Allocation, GridSpec};
use crate::metrics::{
    ambiguity, crb_ratio_point, fim_two_targets, m_com_for, mter_of, CrbSetup, NoiseModel, TwoTargets,
    WaveformKind,
};
use crate::powalloc::{self, AllocProblem, AllocSolution, Status};
use crate::receiver::{
    achievable_rate, bs_dd_receive, cancel_ofdm, coupling_matrix, periodogram_estimate, sensing_sdnr, ue_sdnr,
    ue_sdnr_bound, UeComponents,
};
use crate::rng::trial_rng;
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};
use crate::waveform::{compose_tx, sensing_sinusoid, synth_comm, PowerPlan};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

/// CSV table with a description for every column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[(&'static str, &'static str)]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(c, _)| *c == name)
    }

    /// Floats print in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.columns.iter().map(|(c, _)| *c).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::F(v) => write_float(&mut out, *v),
                    Cell::I(v) => write!(out, "{v}").unwrap(),
                    Cell::S(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip digits, switching to exponent form outside
/// `[1e-4, 1e15)` so tiny CRBs stay readable.
fn write_float(out: &mut String, v: f64) {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        write!(out, "{v}").unwrap();
    } else {
        write!(out, "{v:e}").unwrap();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Map<String, Value>,
    /// Set when the scenario has no feasible power allocation.
    pub infeasible: Option<String>,
}

impl Outcome {
    fn table(table: Table) -> Self {
        Self { table, summary: Map::new(), infeasible: None }
    }
}

/// Runs the configured experiment; `trials` overrides the Monte Carlo count.
pub fn run(cfg: &ScenarioConfig, res: &Resolved, trials: Option<usize>) -> Result<Outcome> {
    match &cfg.experiment {
        ExperimentConfig::SdnrVsRange(x) => sdnr_vs_range(cfg, res, x),
        ExperimentConfig::CrbRatioEta(x) => crb_ratio_eta(cfg, res, x),
        ExperimentConfig::CrbRatioTwoTargets(x) => crb_ratio_two_targets(cfg, res, x),
        ExperimentConfig::MterSweep(x) => mter_sweep(cfg, res, x),
        ExperimentConfig::AmbiguitySlice(x) => ambiguity_slice(cfg, res, x),
        ExperimentConfig::RateVsPower(x) => rate_vs_power(cfg, res, x),
        ExperimentConfig::MontecarloEstimation(x) => {
            let mut x = x.clone();
            if let Some(t) = trials {
                x.trials = t;
            }
            montecarlo(cfg, res, &x)
        }
        ExperimentConfig::PowerAllocation(_) => power_allocation(cfg, res),
    }
}

fn fixed_power(cfg: &ScenarioConfig, what: &str) -> Result<(f64, f64)> {
    match cfg.power {
        PowerConfig::Fixed { p_tot_dbm, sensing_ratio_db } => {
            Ok((dbm_to_watts(p_tot_dbm), db_to_linear(sensing_ratio_db)))
        }
        PowerConfig::Solve(_) => Err(Error::Config(format!("power.mode: {what} needs a fixed power split"))),
    }
}

/// The minimum-power problem for the configured scene and allocation.
pub fn alloc_problem(cfg: &ScenarioConfig, res: &Resolved, allocation: &Allocation, s: &SolveConfig) -> AllocProblem {
    let grid = &res.grid;
    let f0 = grid.f0();
    AllocProblem {
        ue_gains: (0..res.scene.ues.len()).map(|k| res.scene.ue_gain(k)).collect(),
        ue_resources: allocation.user_sets().iter().map(Vec::len).collect(),
        target_gains: res.scene.targets.iter().map(|t| t.gain(f0)).collect(),
        coupling: coupling_matrix(grid, &res.scene.targets, &res.pulse),
        m: grid.m(),
        m_com: if allocation.users() == 0 { cfg.allocation.m_com } else { allocation.m_com() },
        n: grid.n(),
        gamma_ft: db_to_linear(s.gamma_ft_db),
        gamma_dd: db_to_linear(s.gamma_dd_db),
        aclr_rel: db_to_linear(s.aclr_rel_db),
        aclr_abs: dbm_to_watts(s.aclr_abs_dbm_per_hz),
        delta_f: grid.delta_f(),
        sigma_z2: res.noise.sigma_z2,
        antennas: res.noise.antennas,
        p_max: dbm_to_watts(s.p_max_dbm),
    }
}

fn certificate_text(sol: &AllocSolution) -> String {
    let names: Vec<String> = sol.certificate.iter().map(ToString::to_string).collect();
    format!("no feasible power allocation; unsatisfiable constraints: {}", names.join(", "))
}

/// The power plan for a run: the fixed split, or the LP optimum.
pub fn power_plan(cfg: &ScenarioConfig, res: &Resolved, allocation: &Allocation) -> Result<PowerPlan> {
    match &cfg.power {
        PowerConfig::Fixed { p_tot_dbm, sensing_ratio_db } => PowerPlan::from_total(
            &res.grid,
            allocation,
            dbm_to_watts(*p_tot_dbm),
            db_to_linear(*sensing_ratio_db),
        ),
        PowerConfig::Solve(s) => {
            let sol = powalloc::solve(&alloc_problem(cfg, res, allocation, s))?;
            if sol.status == Status::Infeasible {
                return Err(Error::Infeasible(certificate_text(&sol)));
            }
            PowerPlan::new(
                &res.grid,
                allocation,
                sol.p_com_k.iter().map(|x| x.sqrt()).collect(),
                sol.p_sen.sqrt(),
            )
        }
    }
}

fn db(x: f64) -> f64 {
    linear_to_db(x)
}

fn sdnr_vs_range(cfg: &ScenarioConfig, res: &Resolved, x: &SdnrVsRange) -> Result<Outcome> {
    let grid = &res.grid;
    let allocation = res.allocation(&cfg.allocation)?;
    let plan = power_plan(cfg, res, &allocation)?;
    let base = res.scene.targets[0];
    let mut table = Table::new(&[
        ("range_m", "BS-target range (m)"),
        ("sdnr_db", "expected DD SDNR at the nearest bin, including straddle loss (dB)"),
        ("sdnr_bound_db", "closed-form DD SDNR upper bound (dB)"),
        ("snr_cancelled_db", "DD SNR bound with the communication echo cancelled at the BS (dB)"),
    ]);
    let rows: Vec<Vec<Cell>> = x
        .ranges_m
        .par_iter()
        .map(|&r| {
            let t = [TargetSpec { range: r, ..base }];
            let with = sensing_sdnr(grid, &t, &plan, &allocation, &res.noise, &res.pulse, res.impulse, false);
            let without = sensing_sdnr(grid, &t, &plan, &allocation, &res.noise, &res.pulse, res.impulse, true);
            vec![r.into(), db(with.sdnr[0]).into(), db(with.bound[0]).into(), db(without.bound[0]).into()]
        })
        .collect();
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Outcome::table(table))
}

fn crb_setup(cfg: &ScenarioConfig, res: &Resolved, what: &str, colored: bool) -> Result<CrbSetup> {
    let (p_tot, ratio) = fixed_power(cfg, what)?;
    let t = res.scene.targets[0];
    let f0 = res.grid.f0();
    Ok(CrbSetup {
        grid: res.grid,
        p_tot,
        sensing_ratio: ratio,
        sigma_z2: res.noise.variance(Side::Bs),
        targets: TwoTargets::single(Complex64::new(t.gain(f0).sqrt(), 0.0), t.delay(), t.doppler(f0)),
        scheme: cfg.allocation.scheme,
        colored,
    })
}

const CRB_COLUMNS: [(&str, &str); 4] = [
    ("m_com", "communication subcarriers"),
    ("crb_ofdm_s2", "OFDM CRB on the first delay (s^2)"),
    ("crb_dual_s2", "dual-domain CRB on the first delay (s^2)"),
    ("ratio_db", "root-CRB ratio OFDM over dual-domain (dB); positive favours dual-domain"),
];

fn crb_ratio_eta(cfg: &ScenarioConfig, res: &Resolved, x: &CrbRatioEta) -> Result<Outcome> {
    let setup = crb_setup(cfg, res, "crb-ratio-eta", x.colored_noise)?;
    let mut cols = vec![("band_fraction", "M_com/M requested"), ("eta", "achieved occupancy")];
    cols.extend(CRB_COLUMNS);
    let mut table = Table::new(&cols);
    let points: Vec<(f64, f64)> =
        x.band_fractions.iter().flat_map(|&f| x.etas.iter().map(move |&e| (f, e))).collect();
    let rows = points
        .par_iter()
        .map(|&(f, e)| {
            let p = crb_ratio_point(&setup, m_com_for(&setup.grid, f), e)?;
            Ok(vec![f.into(), p.eta.into(), p.m_com.into(), p.crb_ofdm.into(), p.crb_dual.into(), p.ratio_db.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Outcome::table(table))
}

fn crb_ratio_two_targets(cfg: &ScenarioConfig, res: &Resolved, x: &CrbRatioTwoTargets) -> Result<Outcome> {
    let mut setup = crb_setup(cfg, res, "crb-ratio-two-targets", x.colored_noise)?;
    setup.targets.beta2 = setup.targets.beta1;
    let dtau = setup.grid.resolution().delta_tau;
    let mut cols = vec![("band_fraction", "M_com/M requested"), ("separation_bins", "(tau2 - tau1)/delta_tau")];
    cols.extend(CRB_COLUMNS);
    let mut table = Table::new(&cols);
    let points: Vec<(f64, f64)> =
        x.band_fractions.iter().flat_map(|&f| x.separations.iter().map(move |&s| (f, s))).collect();
    let rows = points
        .par_iter()
        .map(|&(f, s)| {
            let mut st = setup.clone();
            st.targets.tau2 = st.targets.tau1 + s * dtau;
            let p = crb_ratio_point(&st, m_com_for(&st.grid, f), x.eta)?;
            Ok(vec![f.into(), s.into(), p.m_com.into(), p.crb_ofdm.into(), p.crb_dual.into(), p.ratio_db.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Outcome::table(table))
}

/// Unit power on every resource an OFDM allocation of this shape occupies.
pub fn ofdm_power(cfg: &ScenarioConfig, grid: &GridSpec, m_com: usize, eta: f64, seed: u64) -> Result<Vec<f64>> {
    let a = &cfg.allocation;
    let alloc = allocate_users(grid, 1, m_com, eta, a.scheme, 0, &mut trial_rng(seed, super::config::ALLOCATION_STREAM))?;
    Ok(alloc.mask(grid).into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
}

fn mter_sweep(cfg: &ScenarioConfig, res: &Resolved, x: &MterSweep) -> Result<Outcome> {
    let grid = res.grid;
    let mut table = Table::new(&[
        ("waveform", "dual-domain, otfs or ofdm"),
        ("band_fraction", "M_com/M of the OFDM allocation; 1 for full-band waveforms"),
        ("eta", "occupancy of the OFDM allocation; 1 for full-band waveforms"),
        ("mter", "main-lobe to total energy ratio"),
    ]);
    let flat = vec![1.0; grid.len()];
    let mut jobs: Vec<(&str, f64, WaveformKind)> =
        vec![("dual-domain", 1.0, WaveformKind::DualDomain), ("otfs", 1.0, WaveformKind::Otfs)];
    jobs.extend(x.band_fractions.iter().map(|&f| ("ofdm", f, WaveformKind::Ofdm)));
    let rows = jobs
        .par_iter()
        .map(|&(name, f, kind)| {
            let (p, eta) = if kind == WaveformKind::Ofdm {
                (ofdm_power(cfg, &grid, m_com_for(&grid, f), x.eta, res.seed)?, x.eta)
            } else {
                (flat.clone(), 1.0)
            };
            let v = mter_of(&p, &grid, kind, x.variant, x.samples)?;
            Ok(vec![name.into(), f.into(), eta.into(), v.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    let mut out = Outcome::table(table);
    out.summary.insert("mter_variant".into(), serde_json::to_value(x.variant).unwrap());
    Ok(out)
}

fn ambiguity_slice(cfg: &ScenarioConfig, res: &Resolved, x: &AmbiguitySlice) -> Result<Outcome> {
    let grid = res.grid;
    let dtau = grid.resolution().delta_tau;
    let taus: Vec<f64> = (0..x.points)
        .map(|i| (-x.tau_max_bins + 2.0 * x.tau_max_bins * i as f64 / (x.points - 1) as f64) * dtau)
        .collect();
    let mut table = Table::new(&[
        ("waveform", "dual-domain or ofdm"),
        ("band_fraction", "M_com/M of the OFDM allocation; 1 for dual-domain"),
        ("tau_bins", "delay offset in delay bins"),
        ("tau_s", "delay offset (s)"),
        ("chi_db", "|chi(tau, 0)| relative to its peak (dB)"),
    ]);
    let mut jobs: Vec<(&str, f64)> = vec![("dual-domain", 1.0)];
    jobs.extend(x.band_fractions.iter().map(|&f| ("ofdm", f)));
    let blocks = jobs
        .par_iter()
        .map(|&(name, f)| {
            let (p, kind) = if name == "ofdm" {
                (ofdm_power(cfg, &grid, m_com_for(&grid, f), x.eta, res.seed)?, WaveformKind::Ofdm)
            } else {
                (vec![1.0; grid.len()], WaveformKind::DualDomain)
            };
            let map = ambiguity(&p, &grid, kind, &taus, &[0.0])?;
            let peak: f64 = p.iter().sum();
            Ok(taus
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    vec![
                        name.into(),
                        f.into(),
                        (t / dtau).into(),
                        t.into(),
                        (20.0 * (map.at(i, 0) / peak).log10()).into(),
                    ]
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    blocks.into_iter().flatten().for_each(|r| table.push(r));
    Ok(Outcome::table(table))
}

fn rate_vs_power(cfg: &ScenarioConfig, res: &Resolved, x: &RateVsPower) -> Result<Outcome> {
    let (_, ratio) = fixed_power(cfg, "rate-vs-power")?;
    let grid = res.grid;
    let allocation = res.allocation(&cfg.allocation)?;
    let zeta = res.scene.ues[0].first().map(|p| p.beam_gain).unwrap_or(1.0);
    let sigma_z2 = res.noise.sigma_z2;
    let mut table = Table::new(&[
        ("ue_range_m", "BS-UE range (m)"),
        ("p_tot_dbm", "total emitted power (dBm)"),
        ("snr_ofdm_db", "OFDM SNR bound (dB)"),
        ("sdnr_dual_db", "dual-domain SDNR bound without UE cancellation (dB)"),
        ("rate_ofdm", "OFDM achievable rate (bit/s/Hz)"),
        ("rate_dual", "dual-domain achievable rate without UE cancellation (bit/s/Hz)"),
        ("rate_dual_cancelled", "dual-domain achievable rate with UE cancellation (bit/s/Hz)"),
    ]);
    for &r in &x.ue_ranges_m {
        let kappa2 = friis_gain(grid.f0(), r) * zeta * zeta;
        for &p_dbm in &x.p_tot_dbm {
            let p = dbm_to_watts(p_dbm);
            let ofdm = PowerPlan::ofdm_only(&grid, &allocation, p)?;
            let dual = PowerPlan::from_total(&grid, &allocation, p, ratio)?;
            let s_ofdm = ue_sdnr_bound(kappa2, ofdm.sigma_com()[0].powi(2), 0.0, sigma_z2, false);
            let sc = dual.sigma_com()[0].powi(2);
            let ss = dual.sigma_sen_ft().powi(2);
            let s_dual = ue_sdnr_bound(kappa2, sc, ss, sigma_z2, false);
            let s_canc = ue_sdnr_bound(kappa2, sc, ss, sigma_z2, true);
            table.push(vec![
                r.into(),
                p_dbm.into(),
                db(s_ofdm).into(),
                db(s_dual).into(),
                achievable_rate(s_ofdm, &grid).into(),
                achievable_rate(s_dual, &grid).into(),
                achievable_rate(s_canc, &grid).into(),
            ]);
        }
    }
    Ok(Outcome::table(table))
}

/// Relative Monte Carlo tolerance on the UE SDNR bound for `resources`
/// averaged samples.
pub fn sdnr_tolerance(resources: usize) -> f64 {
    3.0 / (resources as f64).sqrt()
}

fn montecarlo(cfg: &ScenarioConfig, res: &Resolved, x: &MontecarloEstimation) -> Result<Outcome> {
    let grid = res.grid;
    let allocation = res.allocation(&cfg.allocation)?;
    let plan = power_plan(cfg, res, &allocation)?;
    let target = res.scene.targets[0];
    let f0 = grid.f0();
    let sensing_unit = sensing_sinusoid(&grid, res.impulse.0, res.impulse.1);
    let sensing_part = sensing_unit.scaled(Complex64::new(plan.sigma_sen_dd(&grid), 0.0));
    let kappa2 = res.scene.ue_gain(0);
    let bound = ue_sdnr_bound(
        kappa2,
        plan.sigma_com()[0].powi(2),
        plan.sigma_sen_ft().powi(2),
        res.noise.sigma_z2,
        cfg.sensing.ue_cancellation,
    );
    let tol = sdnr_tolerance(allocation.user_sets()[0].len());
    let bs_cancel = cfg.sensing.bs_cancellation;

    let rows = (0..x.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(res.seed, t);
            let comm = synth_comm(&grid, &allocation, &res.qam, &plan, &mut rng)?;
            let tx = compose_tx(&comm, &plan, &sensing_unit)?;
            let h_sen = sensing_channel_ft(&grid, &res.scene.targets, &res.pulse, &mut rng)?;
            let mut y = add_noise(&apply_channel(&h_sen, &tx.x)?, &res.noise, Side::Bs, &mut rng);
            if bs_cancel {
                y = cancel_ofdm(&y, &apply_channel(&h_sen, &comm)?)?;
            }
            let est = periodogram_estimate(&bs_dd_receive(&y)?, res.impulse, &res.periodogram)?;

            let h_ue = comm_channel_ft(&grid, &res.scene.ues[0], &res.pulse, &mut rng)?;
            let comp = UeComponents::receive(&h_ue, &comm, &sensing_part, &res.noise, &mut rng)?;
            let sdnr = ue_sdnr(&comp, &allocation.user_sets()[0], cfg.sensing.ue_cancellation)?;

            let (detected, tau, nu, range, vel, err) = match est.detections.first() {
                Some(d) => (1, d.tau, d.nu, d.range, d.velocity, d.tau - target.delay()),
                None => (0, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            Ok(vec![
                (t as usize).into(),
                (detected as usize).into(),
                tau.into(),
                nu.into(),
                range.into(),
                vel.into(),
                err.into(),
                db(sdnr).into(),
                (if sdnr <= bound * (1.0 + tol) { 1usize } else { 0 }).into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(&[
        ("trial", "trial index; seeds stream `trial` of the master seed"),
        ("detected", "1 when a peak passed the detection gate"),
        ("tau_hat_s", "estimated delay of the strongest peak (s)"),
        ("nu_hat_hz", "estimated Doppler of the strongest peak (Hz)"),
        ("range_hat_m", "estimated range (m)"),
        ("velocity_hat_mps", "estimated radial velocity (m/s)"),
        ("tau_error_s", "estimated minus true delay (s)"),
        ("ue_sdnr_db", "empirical SDNR at UE 0 (dB)"),
        ("within_bound", "1 when the empirical UE SDNR is below the bound times (1 + tolerance)"),
    ]);
    let errs: Vec<f64> = rows
        .iter()
        .filter_map(|r| match r[6] {
            Cell::F(v) if v.is_finite() => Some(v),
            _ => None,
        })
        .collect();
    let dominated = rows.iter().filter(|r| r[8] == Cell::I(1)).count();
    rows.into_iter().for_each(|r| table.push(r));

    let sen2 = plan.sigma_sen_ft().powi(2);
    let noise_model = if bs_cancel {
        NoiseModel::White { sigma_z2: res.noise.variance(Side::Bs) }
    } else {
        NoiseModel::DualDomainColored {
            sigma_z2: res.noise.variance(Side::Bs),
            p_com: plan.comm_power_grid(&grid, &allocation),
        }
    };
    let beta = Complex64::new(target.gain(f0).sqrt(), 0.0);
    let fim = fim_two_targets(
        &vec![sen2; grid.len()],
        &grid,
        &TwoTargets::single(beta, target.delay(), target.doppler(f0)),
        &noise_model,
    )?;
    let mut out = Outcome::table(table);
    let rmse = if errs.is_empty() {
        f64::NAN
    } else {
        (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt()
    };
    let s = &mut out.summary;
    s.insert("trials".into(), json!(x.trials));
    s.insert("detection_rate".into(), json!(errs.len() as f64 / x.trials.max(1) as f64));
    s.insert("rmse_tau_s".into(), json!(rmse));
    s.insert("root_crb_tau_s".into(), json!(fim.crb_tau[0][0].sqrt()));
    s.insert("ue_sdnr_bound_db".into(), json!(db(bound)));
    s.insert("ue_sdnr_tolerance".into(), json!(tol));
    s.insert("within_bound_fraction".into(), json!(dominated as f64 / x.trials.max(1) as f64));
    s.insert("refinement".into(), serde_json::to_value(res.periodogram.refinement).unwrap());
    Ok(out)
}

fn power_allocation(cfg: &ScenarioConfig, res: &Resolved) -> Result<Outcome> {
    let PowerConfig::Solve(s) = &cfg.power else {
        return Err(Error::Config("power.mode: power-allocation requires mode \"solve\"".into()));
    };
    let allocation = res.allocation(&cfg.allocation)?;
    let problem = alloc_problem(cfg, res, &allocation, s);
    let sol = powalloc::solve(&problem)?;
    let mut table = Table::new(&[
        ("quantity", "p_com (per-resource power of one UE), p_sen (per-subcarrier sensing power), p_tot, p_ib or p_ob"),
        ("index", "UE index for p_com, 0 otherwise"),
        ("power_w", "power (W)"),
        ("power_dbm", "power (dBm)"),
    ]);
    for (k, p) in sol.p_com_k.iter().enumerate() {
        table.push(vec!["p_com".into(), k.into(), (*p).into(), watts_to_dbm(*p).into()]);
    }
    for (name, v) in [("p_sen", sol.p_sen), ("p_tot", sol.p_tot), ("p_ib", sol.p_ib), ("p_ob", sol.p_ob)] {
        table.push(vec![name.into(), 0usize.into(), v.into(), watts_to_dbm(v).into()]);
    }
    let mut out = Outcome::table(table);
    let sm = &mut out.summary;
    sm.insert("status".into(), serde_json::to_value(sol.status).unwrap());
    sm.insert("tight_constraints".into(), json!(sol.tight_constraints.iter().map(ToString::to_string).collect::<Vec<_>>()));
    sm.insert("certificate".into(), json!(sol.certificate.iter().map(ToString::to_string).collect::<Vec<_>>()));
    let aclr = if sol.p_ob > 0.0 { json!(db(sol.p_ib / sol.p_ob)) } else { Value::Null };
    sm.insert("aclr_rel_achieved_db".into(), aclr);
    sm.insert("sdnr_model".into(), json!("closed-form SDNR upper bounds with equal power per resource"));
    if sol.status == Status::Infeasible {
        out.infeasible = Some(certificate_text(&sol));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = Table::new(&[("a", "x"), ("b", "y")]);
        for v in [0.1, 1.5e-22, 123456.789, -2.5e-7, 0.0, 1e300] {
            t.push(vec![v.into(), 3usize.into()]);
        }
        let csv = t.to_csv();
        let parsed: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(parsed, vec![0.1, 1.5e-22, 123456.789, -2.5e-7, 0.0, 1e300]);
        assert!(csv.contains("1.5e-22,3"));
    }
}
