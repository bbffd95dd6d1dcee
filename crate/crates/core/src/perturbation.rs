//! First-order density-matrix perturbation theory for the Otto cycle.
//!
//! The unperturbed Hamiltonian is `gamma_x S_x^2`, diagonal in the
//! `x`-quantized basis `|n>`, and `gamma_y S_y^2` is the perturbation. To first
//! order the thermal state keeps its unperturbed `x`-basis populations and
//!
//! ```text
//! U = sum_n P_n gamma_x n^2 + sum_{n,m} P_n gamma_y m^2 P(n, m)
//! ```
//!
//! with `P(n, m) = |<n_x|m_y>|^2`. Populations are thermal at `B` (hot) and
//! `D` (cold) and are carried unchanged to `C` and `A`, so the work splits into
//! a spectral part `W_x` and the interference part `W_xy`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{transition_table_exact, TransitionTable};
use crate::spin::{CouplingPair, SpinSector};
use crate::sum::{compensated_dot, compensated_sum};
use crate::thermo::{run_otto_cycle, CycleResult, EngineParams};

/// Largest `N` for which the perturbative work is considered reliable.
pub const WORK_TRUSTED_MAX_N: u32 = 10;

/// Largest `N` for which perturbative internal energies are considered
/// reliable. Empirical.
pub const ENERGY_TRUSTED_MAX_N: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    /// End of the hot isochore.
    B,
    /// End of the cold isochore.
    D,
}

/// Canonical populations of the unperturbed `x`-basis levels.
#[derive(Debug, Clone, PartialEq)]
pub struct XBasisPopulations {
    pub sector: SpinSector,
    pub endpoint: Endpoint,
    pub temperature: f64,
    pub gamma_x: f64,
    /// Indexed like the sector labels, `n = -S..=S`.
    pub probs: Vec<f64>,
}

/// `P_n ∝ exp(-n^2 gamma_x / T)` over `n = -S..=S`.
pub fn xbasis_populations(
    sector: &SpinSector,
    gamma_x: f64,
    temperature: f64,
    endpoint: Endpoint,
) -> Result<XBasisPopulations> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidTemperature(temperature));
    }
    if !(gamma_x.is_finite() && gamma_x > 0.0) {
        return Err(Error::InvalidCoupling(format!(
            "gamma_x = {gamma_x} must be finite and > 0"
        )));
    }
    let n2: Vec<f64> = sector.labels().iter().map(|n| n * n).collect();
    let n2_min = n2.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = n2
        .iter()
        .map(|v| (-(v - n2_min) * gamma_x / temperature).exp())
        .collect();
    let z = compensated_sum(weights.iter().copied());
    Ok(XBasisPopulations {
        sector: *sector,
        endpoint,
        temperature,
        gamma_x,
        probs: weights.into_iter().map(|w| w / z).collect(),
    })
}

fn check_table(sector: &SpinSector, table: &TransitionTable) -> Result<()> {
    if table.sector() != *sector {
        return Err(Error::DimensionError {
            expected: sector.dim(),
            found: table.dim(),
        });
    }
    Ok(())
}

fn squared_labels(sector: &SpinSector) -> Vec<f64> {
    sector.labels().iter().map(|n| n * n).collect()
}

/// First-order internal energy for the given `x`-basis populations.
pub fn perturbative_internal_energy(
    sector: &SpinSector,
    probs: &[f64],
    gamma_x: f64,
    gamma_y: f64,
    table: &TransitionTable,
) -> Result<f64> {
    check_table(sector, table)?;
    if probs.len() != sector.dim() {
        return Err(Error::DimensionError {
            expected: sector.dim(),
            found: probs.len(),
        });
    }
    let n2 = squared_labels(sector);
    let m2 = table.second_moments();
    Ok(gamma_x * compensated_dot(probs, &n2) + gamma_y * compensated_dot(probs, &m2))
}

/// Whether perturbative internal energies at this size are outside the
/// trusted range.
pub fn energy_validity_hint(sector: &SpinSector) -> bool {
    sector.spins() > ENERGY_TRUSTED_MAX_N
}

/// `P_n^B - P_n^D` over `n = -S..=S`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPopulations {
    pub sector: SpinSector,
    pub values: Vec<f64>,
}

impl DeltaPopulations {
    pub fn get(&self, twice_n: i32) -> Option<f64> {
        self.sector.index_of(twice_n).map(|i| self.values[i])
    }
}

fn endpoint_populations(
    sector: &SpinSector,
    params: &EngineParams,
) -> Result<(
    XBasisPopulations,
    XBasisPopulations,
    CouplingPair,
    CouplingPair,
)> {
    params.validate()?;
    let n = sector.spins();
    let hot = params.hot.effective(params.mode, n);
    let cold = params.cold.effective(params.mode, n);
    let pb = xbasis_populations(sector, hot.gamma_x, params.t_hot, Endpoint::B)?;
    let pd = xbasis_populations(sector, cold.gamma_x, params.t_cold, Endpoint::D)?;
    Ok((pb, pd, hot, cold))
}

pub fn delta_populations(sector: &SpinSector, params: &EngineParams) -> Result<DeltaPopulations> {
    let (pb, pd, _, _) = endpoint_populations(sector, params)?;
    Ok(DeltaPopulations {
        sector: *sector,
        values: pb.probs.iter().zip(&pd.probs).map(|(b, d)| b - d).collect(),
    })
}

/// Spectral and interference parts of the first-order work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeWork {
    pub w_x: f64,
    pub w_xy: f64,
    pub w_total: f64,
    /// Set when `N` exceeds [`WORK_TRUSTED_MAX_N`].
    pub validity_hint: bool,
}

/// `W_x = sum_n dP_n dgamma_x n^2`, `W_xy = sum_{n,m} dP_n dgamma_y m^2 P(n,m)`,
/// with couplings Kac-rescaled in extensive mode.
pub fn perturbative_work(
    sector: &SpinSector,
    params: &EngineParams,
    table: &TransitionTable,
) -> Result<PerturbativeWork> {
    check_table(sector, table)?;
    let (pb, pd, hot, cold) = endpoint_populations(sector, params)?;
    let delta: Vec<f64> = pb.probs.iter().zip(&pd.probs).map(|(b, d)| b - d).collect();
    let n2 = squared_labels(sector);
    let m2 = table.second_moments();
    let w_x = (hot.gamma_x - cold.gamma_x) * compensated_dot(&delta, &n2);
    let w_xy = (hot.gamma_y - cold.gamma_y) * compensated_dot(&delta, &m2);
    Ok(PerturbativeWork {
        w_x,
        w_xy,
        w_total: w_x + w_xy,
        validity_hint: sector.spins() > WORK_TRUSTED_MAX_N,
    })
}

/// The four first-order internal energies assembled into a cycle.
pub fn perturbative_cycle(
    sector: &SpinSector,
    params: &EngineParams,
    table: &TransitionTable,
) -> Result<CycleResult> {
    let (pb, pd, hot, cold) = endpoint_populations(sector, params)?;
    let u = |p: &XBasisPopulations, c: &CouplingPair| {
        perturbative_internal_energy(sector, &p.probs, c.gamma_x, c.gamma_y, table)
    };
    let u_b = u(&pb, &hot)?;
    let u_a = u(&pd, &hot)?;
    let u_c = u(&pb, &cold)?;
    let u_d = u(&pd, &cold)?;
    Ok(CycleResult::from_energies(
        sector.spins(),
        u_a,
        u_b,
        u_c,
        u_d,
    ))
}

/// A work value together with the run that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkSample {
    pub sector: SpinSector,
    pub params: EngineParams,
    pub w: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn check_shared(a: &WorkSample, b: &WorkSample) -> Result<()> {
    let mismatch = |what: &str| Err(Error::ParameterMismatch(what.to_string()));
    if a.sector != b.sector {
        return mismatch("spin sector");
    }
    if a.params.mode != b.params.mode {
        return mismatch("scaling mode");
    }
    if a.params.hot.gamma_x != b.params.hot.gamma_x
        || a.params.cold.gamma_x != b.params.cold.gamma_x
    {
        return mismatch("gamma_x couplings");
    }
    if a.params.t_hot != b.params.t_hot || a.params.t_cold != b.params.t_cold {
        return mismatch("bath temperatures");
    }
    Ok(())
}

/// `W - W|_{gamma_y = 0}`; the reference run must have both `gamma_y` zero.
pub fn isolate_interference_baseline(full: &WorkSample, reference: &WorkSample) -> Result<f64> {
    check_shared(full, reference)?;
    if reference.params.hot.gamma_y != 0.0 || reference.params.cold.gamma_y != 0.0 {
        return Err(Error::ParameterMismatch(
            "reference run must have gamma_y = 0 on both strokes".to_string(),
        ));
    }
    Ok(full.w - reference.w)
}

/// `(W_+ - W_-)/2` for runs with opposite `gamma_y^H - gamma_y^L` of equal
/// magnitude. The result estimates `W_xy` of the `W_+` configuration.
pub fn isolate_interference_sign_flip(plus: &WorkSample, minus: &WorkSample) -> Result<f64> {
    check_shared(plus, minus)?;
    let dp = plus.params.delta_gamma_y();
    let dm = minus.params.delta_gamma_y();
    if !(dp > 0.0 && dm < 0.0) {
        return Err(Error::ParameterMismatch(format!(
            "need delta gamma_y > 0 for W_+ and < 0 for W_- (got {dp}, {dm})"
        )));
    }
    if !close(dp, -dm) {
        return Err(Error::ParameterMismatch(format!(
            "delta gamma_y magnitudes differ: {dp} vs {}",
            -dm
        )));
    }
    Ok((plus.w - minus.w) / 2.0)
}

/// Params with `gamma_y^H` and `gamma_y^L` exchanged, flipping the sign of
/// their difference.
pub fn mirrored_gamma_y(params: &EngineParams) -> EngineParams {
    let mut p = *params;
    std::mem::swap(&mut p.hot.gamma_y, &mut p.cold.gamma_y);
    p
}

/// Params with `gamma_y = 0` on both strokes.
pub fn without_gamma_y(params: &EngineParams) -> EngineParams {
    let mut p = *params;
    p.hot.gamma_y = 0.0;
    p.cold.gamma_y = 0.0;
    p
}

/// Restricted-band estimate `4 dP_k dgamma_y S^2 [P(k,S) - P(k+1,S)]` with
/// `k = 0` for integer and `k = 1/2` for half-integer `S`. A `k+1` outside the
/// sector contributes `P = 0`.
pub fn restricted_band_work(
    sector: &SpinSector,
    delta: &DeltaPopulations,
    delta_gamma_y: f64,
    table: &TransitionTable,
) -> Result<f64> {
    check_table(sector, table)?;
    if delta.sector != *sector {
        return Err(Error::DimensionError {
            expected: sector.dim(),
            found: delta.values.len(),
        });
    }
    let twice_k = (sector.twice_s() % 2) as i32;
    let top = sector.twice_s() as i32;
    let dp_k = delta.get(twice_k).expect("k is always in the sector");
    let p_k = table.get(twice_k, top)?;
    let p_k1 = table.get(twice_k + 2, top).unwrap_or(0.0);
    let s = sector.s();
    Ok(4.0 * dp_k * delta_gamma_y * s * s * (p_k - p_k1))
}

/// Both isolation protocols and the first-order prediction at one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReport {
    pub n: u32,
    pub w_full: f64,
    pub w_gamma_y_zero: f64,
    /// `W - W|_{gamma_y = 0}`, an estimate of `W_xy` for the given params.
    pub baseline: f64,
    pub w_plus: Option<f64>,
    pub w_minus: Option<f64>,
    /// `(W_+ - W_-)/2`, an estimate of `W_xy` at `+|dgamma_y|`. `None` when
    /// `dgamma_y = 0`.
    pub sign_flip: Option<f64>,
    /// First-order `W_xy` for the given params.
    pub w_xy_pert: f64,
    pub w_x_pert: f64,
    pub restricted_band: f64,
}

pub fn interference_report(
    sector: &SpinSector,
    params: &EngineParams,
) -> Result<InterferenceReport> {
    let sample = |p: EngineParams| -> Result<WorkSample> {
        Ok(WorkSample {
            sector: *sector,
            params: p,
            w: run_otto_cycle(sector, &p)?.w,
        })
    };
    let full = sample(*params)?;
    let zero = sample(without_gamma_y(params))?;
    let baseline = isolate_interference_baseline(&full, &zero)?;
    let dgy = params.delta_gamma_y();
    let (w_plus, w_minus, sign_flip) = if dgy == 0.0 {
        (None, None, None)
    } else {
        let mirrored = sample(mirrored_gamma_y(params))?;
        let (plus, minus) = if dgy > 0.0 {
            (full, mirrored)
        } else {
            (mirrored, full)
        };
        let flip = isolate_interference_sign_flip(&plus, &minus)?;
        (Some(plus.w), Some(minus.w), Some(flip))
    };
    let table = transition_table_exact(sector)?;
    let pert = perturbative_work(sector, params, &table)?;
    let delta = delta_populations(sector, params)?;
    let effective_dgy = params.hot.effective(params.mode, sector.spins()).gamma_y
        - params.cold.effective(params.mode, sector.spins()).gamma_y;
    Ok(InterferenceReport {
        n: sector.spins(),
        w_full: full.w,
        w_gamma_y_zero: zero.w,
        baseline,
        w_plus,
        w_minus,
        sign_flip,
        w_xy_pert: pert.w_xy,
        w_x_pert: pert.w_x,
        restricted_band: restricted_band_work(sector, &delta, effective_dgy, &table)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sector(twice_s: i64) -> SpinSector {
        SpinSector::new(twice_s).unwrap()
    }

    #[test]
    fn xbasis_high_temperature_is_uniform() {
        let p = xbasis_populations(&sector(7), 1.0, 1e12, Endpoint::B).unwrap();
        assert!(p.probs.iter().all(|x| (x - 1.0 / 8.0).abs() < 1e-9));
    }

    #[test]
    fn xbasis_spin_one_three_term_sum() {
        let p = xbasis_populations(&sector(2), 1.0, 0.1, Endpoint::D).unwrap();
        let e = (-10.0f64).exp();
        let z = 1.0 + 2.0 * e;
        assert!((p.probs[1] - 1.0 / z).abs() < 1e-15);
        assert!((p.probs[0] - e / z).abs() < 1e-18);
        assert!((p.probs[2] - e / z).abs() < 1e-18);
    }

    #[test]
    fn xbasis_parity_and_normalisation() {
        for twice_s in [1, 4, 9, 30] {
            let p = xbasis_populations(&sector(twice_s), 1.01, 0.4, Endpoint::B).unwrap();
            let d = p.probs.len();
            for i in 0..d {
                assert_eq!(p.probs[i], p.probs[d - 1 - i]);
            }
            assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(xbasis_populations(&sector(3), 1.0, 0.0, Endpoint::B).is_err());
    }

    #[test]
    fn unperturbed_and_spin_half_energies() {
        let s = sector(6);
        let t = transition_table_exact(&s).unwrap();
        let p = xbasis_populations(&s, 1.0, 0.3, Endpoint::B).unwrap();
        let u = perturbative_internal_energy(&s, &p.probs, 1.0, 0.0, &t).unwrap();
        let direct: f64 = s
            .labels()
            .iter()
            .zip(&p.probs)
            .map(|(n, q)| q * n * n)
            .sum();
        assert!((u - direct).abs() < 1e-15);

        let s = sector(1);
        let t = transition_table_exact(&s).unwrap();
        for temp in [0.01, 0.4, 100.0] {
            let p = xbasis_populations(&s, 1.3, temp, Endpoint::D).unwrap();
            let u = perturbative_internal_energy(&s, &p.probs, 1.3, 0.7, &t).unwrap();
            assert!((u - (1.3 + 0.7) / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn table_of_wrong_sector_is_rejected() {
        let t = transition_table_exact(&sector(3)).unwrap();
        let s = sector(4);
        assert!(perturbative_work(&s, &EngineParams::default(), &t).is_err());
    }

    #[test]
    fn zero_delta_gamma_y_kills_interference() {
        let s = sector(6);
        let t = transition_table_exact(&s).unwrap();
        let mut p = EngineParams::default();
        p.hot.gamma_y = 0.015;
        p.cold.gamma_y = 0.015;
        assert_eq!(perturbative_work(&s, &p, &t).unwrap().w_xy, 0.0);
    }

    #[test]
    fn spin_half_does_no_perturbative_work() {
        let s = sector(1);
        let t = transition_table_exact(&s).unwrap();
        let w = perturbative_work(&s, &EngineParams::default(), &t).unwrap();
        assert_eq!(w.w_x, 0.0);
        assert_eq!(w.w_xy, 0.0);
    }

    #[test]
    fn interference_is_constructive_for_even_n_at_default_params() {
        for n in (2..=10).step_by(2) {
            let s = sector(n);
            let t = transition_table_exact(&s).unwrap();
            let w = perturbative_work(&s, &EngineParams::default(), &t).unwrap();
            assert!(w.w_xy > 0.0, "N={n}");
            assert_eq!(w.w_total, w.w_x + w.w_xy);
            assert!(!w.validity_hint);
        }
        let s = sector(12);
        let t = transition_table_exact(&s).unwrap();
        assert!(
            perturbative_work(&s, &EngineParams::default(), &t)
                .unwrap()
                .validity_hint
        );
    }

    #[test]
    fn w_xy_is_odd_in_delta_gamma_y() {
        let s = sector(7);
        let t = transition_table_exact(&s).unwrap();
        let p = EngineParams::default();
        let a = perturbative_work(&s, &p, &t).unwrap();
        let b = perturbative_work(&s, &mirrored_gamma_y(&p), &t).unwrap();
        assert_eq!(a.w_xy, -b.w_xy);
        assert_eq!(a.w_x, b.w_x);
    }

    #[test]
    fn perturbative_cycle_reproduces_work_split() {
        let s = sector(8);
        let t = transition_table_exact(&s).unwrap();
        let p = EngineParams::default();
        let c = perturbative_cycle(&s, &p, &t).unwrap();
        let w = perturbative_work(&s, &p, &t).unwrap();
        assert!((c.w - w.w_total).abs() < 1e-14);
    }

    #[test]
    fn delta_populations_sum_to_zero_and_are_even() {
        for twice_s in [2, 5, 16, 17] {
            let s = sector(twice_s);
            let d = delta_populations(&s, &EngineParams::default()).unwrap();
            assert!(d.values.iter().sum::<f64>().abs() < 1e-12);
            let k = d.values.len();
            for i in 0..k {
                assert!((d.values[i] - d.values[k - 1 - i]).abs() < 1e-12);
            }
        }
    }

    fn sample(twice_s: i64, params: EngineParams) -> WorkSample {
        let sector = sector(twice_s);
        WorkSample {
            sector,
            params,
            w: run_otto_cycle(&sector, &params).unwrap().w,
        }
    }

    #[test]
    fn baseline_protocol() {
        let p = EngineParams::default();
        let full = sample(4, p);
        let reference = sample(4, without_gamma_y(&p));
        let same = WorkSample {
            w: reference.w,
            ..full
        };
        assert_eq!(
            isolate_interference_baseline(&same, &reference).unwrap(),
            0.0
        );
        let w_xy = isolate_interference_baseline(&full, &reference).unwrap();
        assert!(w_xy > 0.0);

        // with gamma_y = 0 the exact engine reproduces W_x
        let s = sector(4);
        let t = transition_table_exact(&s).unwrap();
        let pert = perturbative_work(&s, &p, &t).unwrap();
        assert!((reference.w - pert.w_x).abs() < 1e-12 * pert.w_x.abs());

        let other_n = sample(6, without_gamma_y(&p));
        assert!(matches!(
            isolate_interference_baseline(&full, &other_n),
            Err(Error::ParameterMismatch(_))
        ));
        assert!(isolate_interference_baseline(&full, &full).is_err());
        let mut hotter = without_gamma_y(&p);
        hotter.t_hot = 0.5;
        assert!(isolate_interference_baseline(&full, &sample(4, hotter)).is_err());
    }

    #[test]
    fn small_n_protocols_agree_with_first_order() {
        let p = EngineParams::default();
        let s = sector(2);
        let t = transition_table_exact(&s).unwrap();
        let pert = perturbative_work(&s, &p, &t).unwrap();
        let baseline =
            isolate_interference_baseline(&sample(2, p), &sample(2, without_gamma_y(&p))).unwrap();
        assert!((baseline - pert.w_xy).abs() <= 0.05 * pert.w_xy.abs());
    }

    #[test]
    fn sign_flip_protocol() {
        let minus = EngineParams::default();
        let plus = mirrored_gamma_y(&minus);
        let wp = sample(4, plus);
        let wm = sample(4, minus);
        let flip = isolate_interference_sign_flip(&wp, &wm).unwrap();
        let base = isolate_interference_baseline(&wm, &sample(4, without_gamma_y(&minus))).unwrap();
        // the flip estimates W_xy at +|dgamma_y|, the baseline at -|dgamma_y|
        assert!(flip < 0.0);
        assert!((flip.abs() - base).abs() <= 0.05 * base);

        let equal = WorkSample { w: wm.w, ..wp };
        assert_eq!(isolate_interference_sign_flip(&equal, &wm).unwrap(), 0.0);
        assert!(isolate_interference_sign_flip(&wm, &wp).is_err());
        let mut lopsided = plus;
        lopsided.hot.gamma_y = 0.03;
        assert!(isolate_interference_sign_flip(&sample(4, lopsided), &wm).is_err());
    }

    #[test]
    fn report_matches_protocols() {
        let p = EngineParams::default();
        let s = sector(4);
        let r = interference_report(&s, &p).unwrap();
        assert_eq!(r.baseline, r.w_full - r.w_gamma_y_zero);
        assert_eq!(r.w_minus, Some(r.w_full));
        assert!(r.sign_flip.unwrap() < 0.0);
        let mut flat = p;
        flat.hot.gamma_y = flat.cold.gamma_y;
        assert_eq!(interference_report(&s, &flat).unwrap().sign_flip, None);
    }

    #[test]
    fn restricted_band_examples() {
        let p = EngineParams::default();
        for twice_s in [2, 3, 6, 7, 10] {
            let s = sector(twice_s);
            let t = transition_table_exact(&s).unwrap();
            let d = delta_populations(&s, &p).unwrap();
            assert_eq!(restricted_band_work(&s, &d, 0.0, &t).unwrap(), 0.0);
            let w = restricted_band_work(&s, &d, p.delta_gamma_y(), &t).unwrap();
            assert!(w > 0.0, "2S={twice_s}");
            let full = perturbative_work(&s, &p, &t).unwrap();
            assert_eq!(w.signum(), full.w_xy.signum());
        }
        let s = sector(1);
        let t = transition_table_exact(&s).unwrap();
        let d = delta_populations(&s, &p).unwrap();
        assert_eq!(restricted_band_work(&s, &d, -0.01, &t).unwrap(), 0.0);
    }

    #[test]
    fn restricted_band_keeps_even_odd_alternation() {
        let p = EngineParams::default();
        let values: Vec<f64> = (2..=10)
            .map(|twice_s| {
                let s = sector(twice_s);
                let t = transition_table_exact(&s).unwrap();
                let d = delta_populations(&s, &p).unwrap();
                restricted_band_work(&s, &d, p.delta_gamma_y(), &t).unwrap()
            })
            .collect();
        let full: Vec<f64> = (2..=10)
            .map(|twice_s| {
                let s = sector(twice_s);
                let t = transition_table_exact(&s).unwrap();
                perturbative_work(&s, &p, &t).unwrap().w_xy
            })
            .collect();
        for w in [values, full] {
            // integer S (even N) above both half-integer neighbours
            for i in (2..w.len() - 1).step_by(2) {
                assert!(w[i] > w[i - 1] && w[i] > w[i + 1]);
            }
        }
    }
}
