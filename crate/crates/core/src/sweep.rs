//! Sweeps over the number of spins and the returns analysis built on them.
//!
//! Per-N evaluations run in parallel; rows are assembled in mode order, then
//! `N` ascending, so repeated sweeps are bit-identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturbation::{delta_populations, perturbative_cycle, perturbative_work};
use crate::phase_space::transition_table_exact;
use crate::spin::{ScalingMode, SpinSector};
use crate::thermo::{run_otto_cycle, EngineParams};

pub const MAX_SWEEP_N: u32 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub mode: ScalingMode,
    pub w: f64,
    pub q_in: f64,
    pub q_out: f64,
    pub eta_signed: Option<f64>,
    pub u_a: f64,
    pub u_b: f64,
    pub u_c: f64,
    pub u_d: f64,
    pub w_pert_x: f64,
    pub w_pert_xy: f64,
    /// First-order internal energy at `B`.
    pub u_b_pert: f64,
    pub parity: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn rows_for(&self, mode: ScalingMode) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    pub fn row(&self, mode: ScalingMode, n: u32) -> Option<&SweepRow> {
        self.rows_for(mode).find(|r| r.n == n)
    }

    /// `(N, f(row))` for every row of `mode`.
    pub fn series(&self, mode: ScalingMode, f: impl Fn(&SweepRow) -> f64) -> Vec<(u32, f64)> {
        self.rows_for(mode).map(|r| (r.n, f(r))).collect()
    }

    pub fn modes(&self) -> Vec<ScalingMode> {
        let mut out: Vec<ScalingMode> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.mode) {
                out.push(r.mode);
            }
        }
        out
    }
}

/// Exact and first-order results for a single `N`.
pub fn sweep_row(params: &EngineParams, n: u32) -> Result<SweepRow> {
    let sector = SpinSector::from_spins(n)?;
    let exact = run_otto_cycle(&sector, params)?;
    let table = transition_table_exact(&sector)?;
    let pert = perturbative_work(&sector, params, &table)?;
    let pert_cycle = perturbative_cycle(&sector, params, &table)?;
    Ok(SweepRow {
        n,
        mode: params.mode,
        w: exact.w,
        q_in: exact.q_in,
        q_out: exact.q_out,
        eta_signed: exact.eta_signed,
        u_a: exact.u_a,
        u_b: exact.u_b,
        u_c: exact.u_c,
        u_d: exact.u_d,
        w_pert_x: pert.w_x,
        w_pert_xy: pert.w_xy,
        u_b_pert: pert_cycle.u_b,
        parity: n % 2,
    })
}

/// Rows for every `N` in `n_from..=n_to` and every mode in `modes`;
/// `params.mode` is ignored.
pub fn sweep_cycle(
    params: &EngineParams,
    n_from: u32,
    n_to: u32,
    modes: &[ScalingMode],
) -> Result<SweepTable> {
    if n_from < 1 || n_from > n_to || n_to > MAX_SWEEP_N {
        return Err(Error::InvalidSector {
            twice_s: if n_from < 1 {
                n_from as i64
            } else {
                n_to as i64
            },
        });
    }
    params.validate()?;
    let mut rows = Vec::with_capacity(modes.len() * (n_to - n_from + 1) as usize);
    for &mode in modes {
        let p = params.with_mode(mode);
        let chunk: Vec<Result<SweepRow>> = (n_from..=n_to)
            .into_par_iter()
            .map(|n| sweep_row(&p, n).map_err(|e| e.at_size(n)))
            .collect();
        for r in chunk {
            rows.push(r?);
        }
    }
    Ok(SweepTable { rows })
}

/// Maximum and diminishing-returns points of the even-`N` work series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsAnalysis {
    pub mode: ScalingMode,
    pub n_max: u32,
    pub n_dim: Option<u32>,
    /// `(N, W(N) - W(N-2))` over even `N`.
    pub marginal: Vec<(u32, f64)>,
    /// `(N, W(N)/N)` over even `N`.
    pub productivity: Vec<(u32, f64)>,
    /// `(N, W(N+2) - 2W(N) + W(N-2))` over interior even `N`.
    pub second_difference: Vec<(u32, f64)>,
}

fn even_work(table: &SweepTable, mode: ScalingMode) -> Vec<(u32, f64)> {
    let mut v: Vec<(u32, f64)> = table
        .rows_for(mode)
        .filter(|r| r.n % 2 == 0)
        .map(|r| (r.n, r.w))
        .collect();
    v.sort_by_key(|p| p.0);
    v
}

pub fn returns_analysis(table: &SweepTable, mode: ScalingMode) -> Result<ReturnsAnalysis> {
    let w = even_work(table, mode);
    returns_from_series(&w, mode)
}

/// [`returns_analysis`] on a bare even-`N` series sorted by `N`.
pub fn returns_from_series(w: &[(u32, f64)], mode: ScalingMode) -> Result<ReturnsAnalysis> {
    if w.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "{} even-N rows for mode {mode}; need at least 6",
            w.len()
        )));
    }
    let mut n_max = w[0].0;
    let mut w_max = w[0].1;
    for &(n, v) in &w[1..] {
        if v > w_max {
            n_max = n;
            w_max = v;
        }
    }
    let marginal: Vec<(u32, f64)> = w
        .windows(2)
        .filter(|p| p[1].0 == p[0].0 + 2)
        .map(|p| (p[1].0, p[1].1 - p[0].1))
        .collect();
    let productivity = w.iter().map(|&(n, v)| (n, v / n as f64)).collect();
    let second_difference: Vec<(u32, f64)> = w
        .windows(3)
        .filter(|t| t[1].0 == t[0].0 + 2 && t[2].0 == t[1].0 + 2)
        .map(|t| (t[1].0, t[2].1 - 2.0 * t[1].1 + t[0].1))
        .collect();
    let n_dim = second_difference
        .windows(2)
        .find(|p| p[1].0 == p[0].0 + 2 && p[0].1 < 0.0 && p[1].1 < 0.0)
        .map(|p| p[0].0);
    Ok(ReturnsAnalysis {
        mode,
        n_max,
        n_dim,
        marginal,
        productivity,
        second_difference,
    })
}

/// `(N, eta_signed)` maximizing `eta_signed` over rows with `W > 0`.
pub fn efficiency_extrema(table: &SweepTable, mode: ScalingMode) -> Result<(u32, f64)> {
    let mut best: Option<(u32, f64)> = None;
    for r in table.rows_for(mode) {
        if r.w.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            continue;
        }
        if let Some(eta) = r.eta_signed {
            if best.is_none_or(|(_, b)| eta > b) {
                best = Some((r.n, eta));
            }
        }
    }
    best.ok_or(Error::NoEngineOperation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPopulationRow {
    pub n: u32,
    pub twice_labels: Vec<i32>,
    pub delta: Vec<f64>,
    /// `0, ±1` for integer `S`, `±1/2, ±3/2` for half-integer `S`, as twice
    /// the label.
    pub dominant: Vec<i32>,
    /// `sum_{dominant} |dP_n| / sum_n |dP_n|`, or 0 when every `dP_n` is zero.
    pub dominant_mass_fraction: f64,
}

impl DeltaPopulationRow {
    pub fn get(&self, twice_n: i32) -> Option<f64> {
        self.twice_labels
            .iter()
            .position(|&l| l == twice_n)
            .map(|i| self.delta[i])
    }
}

pub fn dominant_levels(sector: &SpinSector) -> Vec<i32> {
    let candidates: &[i32] = if sector.is_half_integer() {
        &[-3, -1, 1, 3]
    } else {
        &[-2, 0, 2]
    };
    candidates
        .iter()
        .copied()
        .filter(|&l| sector.index_of(l).is_some())
        .collect()
}

pub fn delta_population_report(
    params: &EngineParams,
    n_list: &[u32],
) -> Result<Vec<DeltaPopulationRow>> {
    n_list
        .iter()
        .map(|&n| {
            let sector = SpinSector::from_spins(n)?;
            let d = delta_populations(&sector, params).map_err(|e| e.at_size(n))?;
            let twice_labels: Vec<i32> = sector.twice_labels().collect();
            let dominant = dominant_levels(&sector);
            let total: f64 = d.values.iter().map(|v| v.abs()).sum();
            let dom: f64 = dominant
                .iter()
                .filter_map(|&l| d.get(l))
                .map(f64::abs)
                .sum();
            Ok(DeltaPopulationRow {
                n,
                twice_labels,
                delta: d.values,
                dominant,
                dominant_mass_fraction: if total > 0.0 { dom / total } else { 0.0 },
            })
        })
        .collect()
}

/// Mean over interior even `N` of `sign(v(N) - (v(N-1) + v(N+1))/2)`.
pub fn parity_oscillation_score(series: &[(u32, f64)]) -> Result<f64> {
    let consecutive = series.windows(2).all(|p| p[1].0 == p[0].0 + 1);
    if series.len() < 6 || !consecutive {
        return Err(Error::InsufficientData(
            "parity score needs at least 6 consecutive N values".to_string(),
        ));
    }
    let signs: Vec<f64> = series
        .windows(3)
        .filter(|t| t[1].0 % 2 == 0)
        .map(|t| {
            let d = t[1].1 - 0.5 * (t[0].1 + t[2].1);
            if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(signs.iter().sum::<f64>() / signs.len() as f64)
}

/// Least-squares `y = c0 + c1 x + c2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub r_squared: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + x * (self.c1 + x * self.c2)
    }
}

pub fn quadratic_fit(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(
            "quadratic fit needs at least 3 points".to_string(),
        ));
    }
    let k = points.len() as f64;
    let xm = points.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / k;
    // fit in the centred variable u = x - xm
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in points {
        let u = x - xm;
        let mut p = 1.0;
        for (i, si) in s.iter_mut().enumerate() {
            *si += p;
            if i < 3 {
                t[i] += p * (y - ym);
            }
            p *= u;
        }
    }
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let b = solve3(a, t).ok_or_else(|| {
        Error::InsufficientData("quadratic fit needs 3 distinct abscissae".to_string())
    })?;
    // back to powers of x
    let c2 = b[2];
    let c1 = b[1] - 2.0 * b[2] * xm;
    let c0 = ym + b[0] - b[1] * xm + b[2] * xm * xm;
    let fit = QuadraticFit {
        c0,
        c1,
        c2,
        r_squared: 0.0,
    };
    let ss_res: f64 = points.iter().map(|&(x, y)| (y - fit.eval(x)).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - ym).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(QuadraticFit { r_squared, ..fit })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut acc = b[i];
        for k in i + 1..3 {
            acc -= a[i][k] * x[k];
        }
        x[i] = acc / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_synthetic_series() {
        let w: Vec<(u32, f64)> = (1..=10)
            .map(|k| {
                let n = 2 * k;
                (n, -((n as f64) - 10.0).powi(2))
            })
            .collect();
        let r = returns_from_series(&w, ScalingMode::NonExtensive).unwrap();
        assert_eq!(r.n_max, 10);
        assert_eq!(r.n_dim, Some(4));
        assert_eq!(r.marginal[0], (4, 28.0));
        assert_eq!(r.productivity[0], (2, -32.0));
    }

    #[test]
    fn convex_series_has_no_onset() {
        let w: Vec<(u32, f64)> = (1..=8).map(|k| (2 * k, (k * k) as f64)).collect();
        let r = returns_from_series(&w, ScalingMode::Extensive).unwrap();
        assert_eq!(r.n_max, 16);
        assert_eq!(r.n_dim, None);
    }

    #[test]
    fn single_dip_is_not_an_onset() {
        let mut w: Vec<(u32, f64)> = (1..=8).map(|k| (2 * k, (k * k) as f64)).collect();
        w[3].1 += 5.0;
        let r = returns_from_series(&w, ScalingMode::NonExtensive).unwrap();
        assert_eq!(r.n_dim, None);
    }

    #[test]
    fn too_few_rows() {
        let w: Vec<(u32, f64)> = (1..=5).map(|k| (2 * k, 1.0)).collect();
        assert!(matches!(
            returns_from_series(&w, ScalingMode::NonExtensive),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn parity_score_examples() {
        let alt: Vec<(u32, f64)> = (2..=12)
            .map(|n| (n, if n % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        assert_eq!(parity_oscillation_score(&alt).unwrap(), 1.0);
        let lin: Vec<(u32, f64)> = (1..=10).map(|n| (n, 3.0 * n as f64)).collect();
        assert!(parity_oscillation_score(&lin).unwrap().abs() <= 1.0);
        assert!(parity_oscillation_score(&alt[..5]).is_err());
        let gap = vec![(1, 0.0), (2, 1.0), (3, 0.0), (5, 1.0), (6, 0.0), (7, 1.0)];
        assert!(parity_oscillation_score(&gap).is_err());
    }

    #[test]
    fn quadratic_fit_recovers_exact_polynomial() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let x = 2.0 + 2.0 * i as f64;
                (x, 0.5 - 0.25 * x + 3e-3 * x * x)
            })
            .collect();
        let f = quadratic_fit(&pts).unwrap();
        assert!((f.c2 - 3e-3).abs() < 1e-12);
        assert!((f.c1 + 0.25).abs() < 1e-10);
        assert!((f.c0 - 0.5).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(quadratic_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn sweep_rows_and_errors() {
        let p = EngineParams::default();
        let t = sweep_cycle(&p, 1, 6, &ScalingMode::ALL).unwrap();
        assert_eq!(t.rows.len(), 12);
        assert_eq!(t.modes(), ScalingMode::ALL.to_vec());
        for r in &t.rows {
            assert_eq!(r.parity, r.n % 2);
            assert_eq!(r.w, r.q_in + r.q_out);
        }
        let a = t.row(ScalingMode::Extensive, 1).unwrap();
        let b = t.row(ScalingMode::NonExtensive, 1).unwrap();
        assert_eq!(a.w, b.w);
        assert!(sweep_cycle(&p, 0, 4, &ScalingMode::ALL).is_err());
        assert!(sweep_cycle(&p, 5, 4, &ScalingMode::ALL).is_err());
        assert!(sweep_cycle(&p, 1, 501, &ScalingMode::ALL).is_err());
    }

    #[test]
    fn efficiency_requires_engine_rows() {
        let p = EngineParams::default();
        let t = sweep_cycle(&p, 1, 1, &[ScalingMode::NonExtensive]).unwrap();
        assert_eq!(
            efficiency_extrema(&t, ScalingMode::NonExtensive),
            Err(Error::NoEngineOperation)
        );
    }

    #[test]
    fn dominant_levels_by_parity() {
        assert_eq!(
            dominant_levels(&SpinSector::new(16).unwrap()),
            vec![-2, 0, 2]
        );
        assert_eq!(
            dominant_levels(&SpinSector::new(17).unwrap()),
            vec![-3, -1, 1, 3]
        );
        assert_eq!(dominant_levels(&SpinSector::new(1).unwrap()), vec![-1, 1]);
    }
}
