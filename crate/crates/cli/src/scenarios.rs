//! Scenario drivers and CSV export.

use std::fmt::Write as _;

use amt_core::closed::rabi::{MINUS, PLUS};
use amt_core::closed::{
    avoided_crossing, closed_adiabatic_margin, propagate_adiabatic, propagate_exact, rabi_family,
    rabi_sweep_protocol, ClosedMargin, ClosedTrajectoryRecord, EigenModes, NormalModes, RabiModes,
};
use amt_core::numerics::linalg::{c, fidelity};
use amt_core::numerics::{linspace, CMatrix};
use amt_core::open::jordan::DEFAULT_CLUSTER_TOL;
use amt_core::open::liouville::DensityMatrix;
use amt_core::open::{
    instantaneous_steady_state, jordan_decompose, lvn_propagate, projected_mode_change,
    projected_mode_change_recursive, vsystem_analytic, LiouvillianFamily, OpenTrajectoryRecord,
    VSystemAnalytic, VSystemParams,
};
use amt_core::{AmtError, ModulationProtocol, TimeGrid};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{InitialMode, Scenario, ScenarioConfig};
use crate::Error;

/// Below this `gamma_bar / Delta_p` the quasi-stationary closed form is not
/// expected to hold.
pub const REGIME_RATIO_FLOOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioOutput {
    pub files: Vec<OutputFile>,
    pub derived: Value,
    pub warnings: Vec<String>,
}

/// Plain CSV table; every value is written with `{:.12e}` so reruns are
/// byte-identical.
#[derive(Debug, Clone)]
pub struct Csv {
    header: Vec<&'static str>,
    body: String,
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            body: String::new(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.header.len(), "csv row width");
        for (k, v) in values.iter().enumerate() {
            if k > 0 {
                self.body.push(',');
            }
            let _ = write!(self.body, "{v:.12e}");
        }
        self.body.push('\n');
    }

    /// A row whose leading cell is text.
    pub fn labelled_row(&mut self, label: &str, values: &[f64]) {
        assert_eq!(values.len() + 1, self.header.len(), "csv row width");
        self.body.push_str(label);
        for v in values {
            let _ = write!(self.body, ",{v:.12e}");
        }
        self.body.push('\n');
    }

    pub fn finish(self, name: impl Into<String>) -> OutputFile {
        OutputFile {
            name: name.into(),
            contents: format!("{}\n{}", self.header.join(","), self.body),
        }
    }
}

/// File-name tag for a rate: `1e-3`, `1e0`, `inf`.
pub fn rate_tag(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:e}")
    }
}

/// JSON number, or its [`rate_tag`] when not finite.
pub fn finite_or_tag(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(rate_tag(x))
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, Error> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::RabiSweep => rabi_sweep(cfg),
        Scenario::VsystemTurnon => vsystem_turnon(cfg),
        Scenario::AdiabaticityCheck => adiabaticity_check(cfg),
        Scenario::JordanSelftest => jordan_selftest(),
    }
}

// ---------------------------------------------------------------------------
// driven two-level sweep

pub struct RabiRun {
    pub rate: f64,
    pub tau: f64,
    pub protocol: ModulationProtocol,
    pub initial_mode: usize,
    pub exact: ClosedTrajectoryRecord,
    pub adiabatic: ClosedTrajectoryRecord,
    pub margin: ClosedMargin,
}

impl RabiRun {
    /// Final population in the mode the run started in.
    pub fn retention(&self) -> f64 {
        self.exact.final_populations()[self.initial_mode]
    }
}

fn mode_index(m: InitialMode) -> usize {
    match m {
        InitialMode::Minus => MINUS,
        InitialMode::Plus => PLUS,
    }
}

pub fn rabi_run(cfg: &ScenarioConfig, rate: f64) -> Result<RabiRun, AmtError> {
    let family = rabi_family(
        cfg.delta0,
        C64::from_polar(cfg.coupling, cfg.coupling_phase),
    );
    let modes = RabiModes::new(family);
    let protocol = rabi_sweep_protocol(cfg.delta0, rate, cfg.sweep_convention)?;
    let tau = protocol.tau();
    let grid = TimeGrid::with_max_step(0.0, tau, cfg.max_step)?;
    let samples = linspace(0.0, tau, cfg.samples);
    let n = mode_index(cfg.initial_mode);
    let psi0 = modes.modes(0.0, protocol.lambda(0.0))?.mode(n);
    let exact = propagate_exact(&family, &protocol, &modes, &psi0, &grid, &samples)?;
    let adiabatic = propagate_adiabatic(&family, &protocol, &modes, n, &grid, &samples)?;
    let margin = closed_adiabatic_margin(&family, &protocol, &modes, (MINUS, PLUS), &samples)?;
    Ok(RabiRun {
        rate,
        tau,
        protocol,
        initial_mode: n,
        exact,
        adiabatic,
        margin,
    })
}

const RABI_COLUMNS: [&str; 9] = [
    "t_over_tau",
    "t",
    "omega_t",
    "delta_t",
    "pop_minus",
    "pop_plus",
    "fidelity_vs_adiabatic",
    "margin_lhs",
    "margin_rhs",
];

fn rabi_csv(
    delta0: f64,
    rec: &ClosedTrajectoryRecord,
    reference: &ClosedTrajectoryRecord,
    tau: f64,
) -> Csv {
    let mut csv = Csv::new(&RABI_COLUMNS);
    for k in 0..rec.times.len() {
        let omega = rec.lambdas[k];
        csv.row(&[
            rec.times[k] / tau,
            rec.times[k],
            omega,
            delta0 - 0.5 * omega,
            rec.mode_populations[k][MINUS],
            rec.mode_populations[k][PLUS],
            fidelity(&rec.states[k], &reference.states[k]),
            rec.margin_lhs[k],
            rec.margin_rhs[k],
        ]);
    }
    csv
}

fn rabi_sweep(cfg: &ScenarioConfig) -> Result<ScenarioOutput, Error> {
    let runs: Vec<RabiRun> = cfg
        .sweep_rates
        .par_iter()
        .map(|&rate| rabi_run(cfg, rate))
        .collect::<Result<_, _>>()?;
    let mut out = ScenarioOutput::default();
    let mut summary = Vec::new();
    for run in &runs {
        let csv = rabi_csv(cfg.delta0, &run.exact, &run.adiabatic, run.tau);
        out.files
            .push(csv.finish(format!("rabi_rate_{}.csv", rate_tag(run.rate))));
        let omegas: Vec<f64> = run
            .exact
            .lambdas
            .iter()
            .map(|&w| {
                let d = cfg.delta0 - 0.5 * w;
                (d * d + cfg.coupling * cfg.coupling).sqrt()
            })
            .collect();
        summary.push(json!({
            "rate": run.rate,
            "tau": run.tau,
            "retention": run.retention(),
            "rabi_frequency_min": omegas.iter().cloned().fold(f64::INFINITY, f64::min),
            "rabi_frequency_max": omegas.iter().cloned().fold(0.0, f64::max),
            "margin": run.margin,
            "max_norm_drift": run.exact.max_norm_drift,
        }));
    }
    // the infinitely slow reference is rate independent on the t / tau axis
    if let Some(slowest) = runs.iter().min_by(|a, b| a.rate.total_cmp(&b.rate)) {
        let csv = rabi_csv(
            cfg.delta0,
            &slowest.adiabatic,
            &slowest.adiabatic,
            slowest.tau,
        );
        out.files.push(csv.finish("rabi_adiabatic.csv"));
    }
    out.derived = json!({ "runs": summary });
    Ok(out)
}

// ---------------------------------------------------------------------------
// V-system turn-on

pub struct VSystemRun {
    pub alpha: f64,
    pub params: VSystemParams,
    pub record: OpenTrajectoryRecord,
    pub analytic: VSystemAnalytic,
    /// Real part of the excited coherence of the instantaneous steady state.
    pub steady_coherence: Vec<f64>,
    pub steady_states: Vec<CMatrix>,
}

impl VSystemRun {
    pub fn max_abs_coherence(&self) -> f64 {
        self.record
            .coherence
            .iter()
            .map(|z| z.re.abs())
            .fold(0.0, f64::max)
    }
}

/// `log_count` log-spaced times from `1e-2 / gamma_bar` plus `lin_count`
/// evenly spaced times, merged with `0` and `t_end`.
pub fn hybrid_samples(t_end: f64, gamma_bar: f64, log_count: usize, lin_count: usize) -> Vec<f64> {
    let mut ts = vec![0.0, t_end];
    let t_min = (1e-2 / gamma_bar).min(t_end);
    if log_count > 1 {
        let (a, b) = (t_min.ln(), t_end.ln());
        ts.extend(linspace(a, b, log_count).into_iter().map(f64::exp));
    }
    ts.extend(linspace(0.0, t_end, lin_count));
    for t in ts.iter_mut() {
        *t = t.clamp(0.0, t_end);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t_end);
    ts
}

pub fn vsystem_run(cfg: &ScenarioConfig, alpha: f64, samples: &[f64]) -> Result<VSystemRun, Error> {
    let params = cfg.vsystem_params(alpha)?;
    let family = params.family()?;
    let t_end = *samples.last().expect("samples");
    let protocol = params.turn_on(t_end);
    let grid = if cfg.adaptive {
        TimeGrid::adaptive(0.0, t_end, cfg.rel_tol, cfg.abs_tol)?
    } else {
        TimeGrid::with_max_step(0.0, t_end, cfg.open_step / params.gamma_bar())?
    };
    let rho0 = DensityMatrix::basis_state(3, 0);
    let record = lvn_propagate(&family, &protocol, &rho0, &grid, samples)?;
    let analytic = vsystem_analytic(&params, samples, cfg.coherence_sign)?;
    let mut steady_coherence = Vec::with_capacity(samples.len());
    let mut steady_states = Vec::with_capacity(samples.len());
    for (&t, &lambda) in record.times.iter().zip(&record.lambdas) {
        let ss = instantaneous_steady_state(&family, t, lambda)?;
        steady_coherence.push(ss.0[(1, 2)].re);
        steady_states.push(ss.0);
    }
    Ok(VSystemRun {
        alpha,
        params,
        record,
        analytic,
        steady_coherence,
        steady_states,
    })
}

const VSYSTEM_COLUMNS: [&str; 10] = [
    "t_gamma",
    "nbar_t",
    "rho_gg",
    "rho_e1e1",
    "rho_e2e2",
    "re_coh",
    "im_coh",
    "analytic_e1e1",
    "analytic_coh",
    "steadystate_coh",
];

fn vsystem_csv(run: &VSystemRun) -> Csv {
    let gb = run.params.gamma_bar();
    let rec = &run.record;
    let mut csv = Csv::new(&VSYSTEM_COLUMNS);
    for k in 0..rec.times.len() {
        csv.row(&[
            rec.times[k] * gb,
            rec.lambdas[k],
            rec.populations[k][0],
            rec.populations[k][1],
            rec.populations[k][2],
            rec.coherence[k].re,
            rec.coherence[k].im,
            run.analytic.rho_e1e1[k],
            run.analytic.coherence[k],
            run.steady_coherence[k],
        ]);
    }
    csv
}

/// Warning text when the quasi-stationary regime is not reached.
pub fn regime_warning(params: &VSystemParams) -> Option<String> {
    let ratio = params.regime_ratio();
    (ratio < REGIME_RATIO_FLOOR * (1.0 - 1e-9)).then(|| {
        format!(
            "gamma_bar / Delta_p = {ratio:.3} is below {REGIME_RATIO_FLOOR}; the closed-form curves are outside their regime"
        )
    })
}

fn vsystem_turnon(cfg: &ScenarioConfig) -> Result<ScenarioOutput, Error> {
    let base = cfg.vsystem_params(0.0)?;
    let gb = base.gamma_bar();
    let samples = hybrid_samples(
        cfg.t_end_gamma / gb,
        gb,
        cfg.log_samples,
        cfg.linear_samples,
    );
    let runs: Vec<VSystemRun> = cfg
        .alphas
        .par_iter()
        .map(|&a| vsystem_run(cfg, a, &samples))
        .collect::<Result<_, _>>()?;
    let mut out = ScenarioOutput::default();
    out.warnings.extend(regime_warning(&base));
    let mut summary = Vec::new();
    for run in &runs {
        out.files
            .push(vsystem_csv(run).finish(format!("vsystem_alpha_{}.csv", rate_tag(run.alpha))));
        summary.push(json!({
            "alpha": finite_or_tag(run.alpha),
            "max_abs_re_coherence": run.max_abs_coherence(),
            "max_trace_drift": run.record.max_trace_drift,
            "min_eigenvalue": run.record.min_eigenvalue,
        }));
    }
    out.derived = json!({
        "gamma_bar": gb,
        "delta_p": base.delta_p(),
        "nbar": base.nbar,
        "regime_ratio": base.regime_ratio(),
        "coherence_lifetime": base.coherence_lifetime(),
        "t_end": samples.last(),
        "runs": summary,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// static avoided crossing

#[derive(Debug, Clone, Serialize)]
pub struct CrossingRun {
    pub rate: f64,
    pub tau: f64,
    pub margin: ClosedMargin,
    /// Final population of the starting (lower) eigenstate.
    pub retention: f64,
    /// `1 - exp(-pi gap^2 / (4 rate))`.
    pub landau_zener_retention: f64,
    pub max_norm_drift: f64,
}

pub fn crossing_run(
    gap: f64,
    lambda_max: f64,
    rate: f64,
    max_step: f64,
    samples: usize,
) -> Result<CrossingRun, AmtError> {
    let family = avoided_crossing(gap);
    let modes = EigenModes::new(&family);
    let tau = 2.0 * lambda_max / rate;
    let protocol = ModulationProtocol::linear(tau, -lambda_max, lambda_max);
    let grid = TimeGrid::with_max_step(0.0, tau, max_step)?;
    // odd count so the sample grid hits the minimum gap
    let times = linspace(0.0, tau, samples | 1);
    let psi0 = modes.modes(0.0, -lambda_max)?.mode(0);
    let rec = propagate_exact(&family, &protocol, &modes, &psi0, &grid, &times)?;
    let margin = closed_adiabatic_margin(&family, &protocol, &modes, (0, 1), &times)?;
    Ok(CrossingRun {
        rate,
        tau,
        margin,
        retention: rec.final_populations()[0],
        landau_zener_retention: -(-std::f64::consts::PI * gap * gap / (4.0 * rate)).exp_m1(),
        max_norm_drift: rec.max_norm_drift,
    })
}

fn adiabaticity_check(cfg: &ScenarioConfig) -> Result<ScenarioOutput, Error> {
    let runs: Vec<CrossingRun> = cfg
        .sweep_rates
        .par_iter()
        .map(|&r| crossing_run(cfg.gap, cfg.lambda_max, r, cfg.max_step, cfg.samples))
        .collect::<Result<_, _>>()?;
    let mut csv = Csv::new(&[
        "rate",
        "tau",
        "margin_ratio",
        "retention",
        "landau_zener_retention",
    ]);
    for r in &runs {
        csv.row(&[
            r.rate,
            r.tau,
            r.margin.ratio,
            r.retention,
            r.landau_zener_retention,
        ]);
    }
    Ok(ScenarioOutput {
        files: vec![csv.finish("adiabaticity_check.csv")],
        derived: json!({ "gap": cfg.gap, "lambda_max": cfg.lambda_max, "runs": runs }),
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Jordan-chain checks

#[derive(Debug, Clone, Serialize)]
pub struct JordanCase {
    pub name: String,
    pub chain_lengths: Vec<usize>,
    pub certified: bool,
    pub max_residual: f64,
    pub biorthonormality_error: f64,
    /// Largest `|closed - recursive| / max(1, |recursive|)` over all chain
    /// entry pairs; `NaN` when no perturbation was checked.
    pub closed_vs_recursion: f64,
}

/// Fixed complex entries in `[-0.5, 0.5)` drawn from `seed`.
pub fn scrambled(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, n, |_, _| {
        c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
    })
}

/// Jordan matrix with blocks of the given sizes and eigenvalues.
pub fn jordan_matrix(blocks: &[(usize, C64)]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.0).sum();
    let mut l = CMatrix::zeros(n, n);
    let mut at = 0;
    for &(size, ev) in blocks {
        for k in 0..size {
            l[(at + k, at + k)] = ev;
            if k + 1 < size {
                l[(at + k, at + k + 1)] = c(1.0, 0.0);
            }
        }
        at += size;
    }
    l
}

fn check_case(
    name: &str,
    l: &CMatrix,
    dl: Option<&CMatrix>,
    cluster_tol: f64,
) -> Result<JordanCase, AmtError> {
    let dec = jordan_decompose(l, cluster_tol)?;
    let mut worst = f64::NAN;
    if let Some(dl) = dl {
        worst = 0.0;
        for a in 0..dec.chains.len() {
            for b in 0..dec.chains.len() {
                // the mode change is only defined between distinct eigenvalues
                let gap = (dec.chains[a].eigenvalue - dec.chains[b].eigenvalue).norm();
                if a == b || gap <= 1e-9 * dec.scale.max(1.0) {
                    continue;
                }
                for i in 0..dec.chains[a].len() {
                    for j in 0..dec.chains[b].len() {
                        let closed = projected_mode_change(&dec, dl, (a, i), (b, j))?;
                        let rec = projected_mode_change_recursive(&dec, dl, (a, i), (b, j))?;
                        worst = f64::max(worst, (closed - rec).norm() / rec.norm().max(1.0));
                    }
                }
            }
        }
    }
    Ok(JordanCase {
        name: name.into(),
        chain_lengths: dec.chain_lengths(),
        certified: dec.certified,
        max_residual: dec.max_residual(),
        biorthonormality_error: dec.biorthonormality_error,
        closed_vs_recursion: worst,
    })
}

/// Constructed generators with chains `{1, 2, 3}` (canonical and under a
/// fixed similarity) and the V-system generator at several occupations.
pub fn jordan_cases() -> Result<Vec<JordanCase>, AmtError> {
    let blocks = [(1, c(-0.3, 0.0)), (2, c(-1.0, 0.5)), (3, c(-2.0, -0.4))];
    let canonical = jordan_matrix(&blocks);
    let s = scrambled(6, 11) + CMatrix::identity(6, 6) * c(2.0, 0.0);
    let s_inv = s.clone().try_inverse().ok_or(AmtError::NoConvergence)?;
    let similar = &s * &canonical * &s_inv;
    let dl = scrambled(6, 29) * c(2.0, 0.0);
    let mut cases = vec![
        check_case("chains_1_2_3", &canonical, Some(&dl), DEFAULT_CLUSTER_TOL)?,
        // defective clusters split by O(eps^(1/3)) under a similarity
        check_case("chains_1_2_3_similar", &similar, Some(&dl), 1e-4)?,
    ];
    for nbar in [0.0, 0.0194, 0.1, 1.0] {
        let f = VSystemParams::desk_scale(nbar, 1.0).family()?;
        let l = f.liouvillian(0.0, nbar).matrix;
        let dl = f.d_dlambda(0.0, nbar).matrix;
        cases.push(check_case(
            &format!("vsystem_nbar_{nbar}"),
            &l,
            Some(&dl),
            DEFAULT_CLUSTER_TOL,
        )?);
    }
    Ok(cases)
}

fn jordan_selftest() -> Result<ScenarioOutput, Error> {
    let cases = jordan_cases()?;
    let mut csv = Csv::new(&[
        "case",
        "chains",
        "certified",
        "max_residual",
        "biorthonormality_error",
        "closed_vs_recursion",
    ]);
    for case in &cases {
        csv.labelled_row(
            &case.name,
            &[
                case.chain_lengths.len() as f64,
                case.certified as u8 as f64,
                case.max_residual,
                case.biorthonormality_error,
                case.closed_vs_recursion,
            ],
        );
    }
    let mut out = ScenarioOutput {
        files: vec![csv.finish("jordan_selftest.csv")],
        derived: json!({ "cases": cases }),
        warnings: Vec::new(),
    };
    for case in &cases {
        if !case.certified {
            out.warnings
                .push(format!("{}: decomposition not certified", case.name));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&[1.0, -0.5]);
        let f = csv.finish("x.csv");
        assert_eq!(f.contents, "a,b\n1.000000000000e0,-5.000000000000e-1\n");
    }

    #[test]
    fn rate_tags() {
        assert_eq!(rate_tag(1e-3), "1e-3");
        assert_eq!(rate_tag(10.0), "1e1");
        assert_eq!(rate_tag(f64::INFINITY), "inf");
    }

    #[test]
    fn hybrid_samples_are_sorted_and_bounded() {
        let ts = hybrid_samples(100.0, 1.0, 20, 11);
        assert_eq!(ts[0], 0.0);
        assert_eq!(*ts.last().unwrap(), 100.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!((ts[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn jordan_matrix_layout() {
        let l = jordan_matrix(&[(2, c(1.0, 0.0)), (1, c(3.0, 0.0))]);
        assert_eq!(l[(0, 1)], c(1.0, 0.0));
        assert_eq!(l[(1, 2)], c(0.0, 0.0));
        assert_eq!(l[(2, 2)], c(3.0, 0.0));
    }

    #[test]
    fn crossing_ratio_is_rate_over_gap_squared() {
        let run = crossing_run(1.0, 5.0, 0.5, 0.01, 101).unwrap();
        assert!((run.margin.ratio - 0.5).abs() < 1e-9, "{:?}", run.margin);
    }
}
