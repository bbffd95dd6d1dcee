//! Transition probabilities between `x`- and `y`-quantized spin states and
//! their semiclassical reading as interfering Kramers bands on the Bloch
//! sphere, plus the squeezed-vacuum photon-number distribution used as the
//! oscillator analogue.
//!
//! The exact table uses the real tridiagonal `S_x` eigenvectors `U` and the
//! quarter turn about `z` that maps `|m_x>` onto `|m_y>`:
//!
//! ```text
//! <n_x|m_y> = sum_k U[k][n] exp(-i pi k / 2) U[k][m]
//! ```
//!
//! which is the only complex arithmetic in the crate.
//!
//! Semiclassically, `P(n, m) = 4 a/(2 pi R) cos^2(A/(2R) - pi/4)` where `a` is
//! the area of one of the two lobes in which the unit-width bands around
//! `S_x = n` and `S_y = m` intersect, and `A` is the area of
//! `{S_x >= n} ∩ {S_y >= m}`. Both areas are integrated on a latitude-longitude
//! midpoint grid aligned with `z`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::eigen::eigendecompose;
use crate::error::{Error, Result};
use crate::spin::{collective_spin_matrix, RealSymMatrix, SpinAxis, SpinSector};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    Exact,
    Semiclassical,
}

/// `P(n, m)` over all label pairs of one sector; rows are `n` (x-quantized),
/// columns `m` (y-quantized), both ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    kind: TableKind,
    sector: SpinSector,
    values: Vec<f64>,
    allowed: Vec<bool>,
}

impl TransitionTable {
    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn sector(&self) -> SpinSector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    /// Value by basis indices.
    pub fn at(&self, n_index: usize, m_index: usize) -> f64 {
        self.values[n_index * self.dim() + m_index]
    }

    /// Value by doubled labels `(2n, 2m)`.
    pub fn get(&self, twice_n: i32, twice_m: i32) -> Result<f64> {
        let i = self.sector.checked_index(twice_n)?;
        let j = self.sector.checked_index(twice_m)?;
        Ok(self.at(i, j))
    }

    /// False where the semiclassical formula was undefined and zeroed.
    pub fn is_allowed(&self, n_index: usize, m_index: usize) -> bool {
        self.allowed[n_index * self.dim() + m_index]
    }

    pub fn row(&self, n_index: usize) -> &[f64] {
        let d = self.dim();
        &self.values[n_index * d..(n_index + 1) * d]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|j| (0..d).map(|i| self.at(i, j)).sum())
            .collect()
    }

    /// `sum_m m^2 P(n, m)` for every row `n`.
    pub fn second_moments(&self) -> Vec<f64> {
        let m2: Vec<f64> = self.sector.labels().iter().map(|m| m * m).collect();
        (0..self.dim())
            .map(|i| {
                let mut acc = CompensatedSum::new();
                for (p, w) in self.row(i).iter().zip(&m2) {
                    acc.add(p * w);
                }
                acc.value()
            })
            .collect()
    }
}

/// `exp(-i pi twice_k / 4)` with exact values at the eight octants.
fn quarter_turn_phase(twice_k: i32) -> (f64, f64) {
    const H: f64 = FRAC_1_SQRT_2;
    match twice_k.rem_euclid(8) {
        0 => (1.0, 0.0),
        1 => (H, -H),
        2 => (0.0, -1.0),
        3 => (-H, -H),
        4 => (-1.0, 0.0),
        5 => (-H, H),
        6 => (0.0, 1.0),
        _ => (H, H),
    }
}

/// Exact `P(n, m) = |<n_x|m_y>|^2`.
pub fn transition_table_exact(sector: &SpinSector) -> Result<TransitionTable> {
    let sx = RealSymMatrix::new(collective_spin_matrix(sector, SpinAxis::X))?;
    let spectrum = eigendecompose(&sx)?;
    let u = spectrum.eigenvectors();
    let dim = sector.dim();
    let phases: Vec<(f64, f64)> = sector.twice_labels().map(quarter_turn_phase).collect();

    let mut values = vec![0.0; dim * dim];
    for n in 0..dim {
        for m in n..dim {
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            for (k, &(c, s)) in phases.iter().enumerate() {
                let w = u[(k, n)] * u[(k, m)];
                re.add(w * c);
                im.add(w * s);
            }
            let p = re.value().powi(2) + im.value().powi(2);
            values[n * dim + m] = p;
            values[m * dim + n] = p;
        }
    }
    Ok(TransitionTable {
        kind: TableKind::Exact,
        sector: *sector,
        values,
        allowed: vec![true; dim * dim],
    })
}

/// Latitude-longitude midpoint grid over the full sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl QuadratureGrid {
    pub const PRODUCTION: QuadratureGrid = QuadratureGrid {
        n_theta: 2048,
        n_phi: 4096,
    };

    /// Same grid with both steps halved.
    pub fn refined(&self) -> QuadratureGrid {
        QuadratureGrid {
            n_theta: 2 * self.n_theta,
            n_phi: 2 * self.n_phi,
        }
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::PRODUCTION
    }
}

/// Lobe and lens areas for every label pair of a sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereAreas {
    sector: SpinSector,
    grid: QuadratureGrid,
    radius: f64,
    /// One lobe (`S_z > 0`) of the band intersection, `[n][m]`.
    lobe: Vec<f64>,
    /// `{S_x >= n} ∩ {S_y >= m}`, `[n][m]`.
    lens: Vec<f64>,
}

/// Kramers-band geometry of one label pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandGeometry {
    pub twice_s: u32,
    pub twice_n: i32,
    pub twice_m: i32,
    pub radius: f64,
    pub lobe_area: f64,
    pub lens_area: f64,
    pub phi: f64,
    pub classically_allowed: bool,
}

impl BandGeometry {
    /// `4 a/(2 pi R) cos^2(phi)`, or zero when the circles do not meet.
    pub fn semiclassical_probability(&self) -> f64 {
        if !self.classically_allowed {
            return 0.0;
        }
        4.0 * self.lobe_area / (2.0 * PI * self.radius) * self.phi.cos().powi(2)
    }
}

/// Whether the circles `S_x = n` and `S_y = m` meet on the sphere.
pub fn classically_allowed(sector: &SpinSector, twice_n: i32, twice_m: i32) -> bool {
    // n^2 + m^2 <= S(S+1) in doubled integers: tn^2 + tm^2 <= 2S(2S+2)
    let ts = sector.twice_s() as i64;
    let (tn, tm) = (twice_n as i64, twice_m as i64);
    tn * tn + tm * tm <= ts * (ts + 2)
}

impl SphereAreas {
    pub fn compute(sector: &SpinSector, grid: QuadratureGrid) -> Self {
        assert!(grid.n_theta > 0 && grid.n_phi > 0, "empty quadrature grid");
        let dim = sector.dim();
        let s = sector.s();
        let radius = sector.bloch_radius();
        let d_theta = PI / grid.n_theta as f64;
        let d_phi = 2.0 * PI / grid.n_phi as f64;
        let (cos_phi, sin_phi): (Vec<f64>, Vec<f64>) = (0..grid.n_phi)
            .map(|j| {
                let phi = (j as f64 + 0.5) * d_phi;
                (phi.cos(), phi.sin())
            })
            .unzip();

        let max_band = dim as i64 - 1;
        let lens_bins = dim + 1;
        let mut lobe_acc = vec![CompensatedSum::new(); dim * dim];
        let mut lens_acc = vec![CompensatedSum::new(); lens_bins * lens_bins];
        let mut lobe_count = vec![0u32; dim * dim];
        let mut lens_count = vec![0u32; lens_bins * lens_bins];
        let mut lobe_touched = Vec::new();
        let mut lens_touched = Vec::new();

        for i in 0..grid.n_theta {
            let theta = (i as f64 + 0.5) * d_theta;
            let (sin_t, cos_t) = theta.sin_cos();
            let weight = radius * radius * sin_t * d_theta * d_phi;
            let rho = radius * sin_t;
            let upper = cos_t > 0.0;
            for j in 0..grid.n_phi {
                let x = rho * cos_phi[j];
                let y = rho * sin_phi[j];
                // thresholds: number of labels n with n <= x
                let cx = ((x + s).floor() as i64 + 1).clamp(0, dim as i64) as usize;
                let cy = ((y + s).floor() as i64 + 1).clamp(0, dim as i64) as usize;
                let b = cx * lens_bins + cy;
                if lens_count[b] == 0 {
                    lens_touched.push(b);
                }
                lens_count[b] += 1;
                if upper {
                    let bx = ((x + s + 0.5).floor() as i64).clamp(0, max_band) as usize;
                    let by = ((y + s + 0.5).floor() as i64).clamp(0, max_band) as usize;
                    let b = bx * dim + by;
                    if lobe_count[b] == 0 {
                        lobe_touched.push(b);
                    }
                    lobe_count[b] += 1;
                }
            }
            for &b in &lens_touched {
                lens_acc[b].add(lens_count[b] as f64 * weight);
                lens_count[b] = 0;
            }
            for &b in &lobe_touched {
                lobe_acc[b].add(lobe_count[b] as f64 * weight);
                lobe_count[b] = 0;
            }
            lens_touched.clear();
            lobe_touched.clear();
        }

        let lobe: Vec<f64> = lobe_acc.iter().map(CompensatedSum::value).collect();
        // suffix sums: lens[a][b] = sum over cx >= a+1, cy >= b+1
        let hist: Vec<f64> = lens_acc.iter().map(CompensatedSum::value).collect();
        let mut suffix = vec![0.0; lens_bins * lens_bins];
        for cx in (0..lens_bins).rev() {
            for cy in (0..lens_bins).rev() {
                let mut v = hist[cx * lens_bins + cy];
                if cx + 1 < lens_bins {
                    v += suffix[(cx + 1) * lens_bins + cy];
                }
                if cy + 1 < lens_bins {
                    v += suffix[cx * lens_bins + cy + 1];
                }
                if cx + 1 < lens_bins && cy + 1 < lens_bins {
                    v -= suffix[(cx + 1) * lens_bins + cy + 1];
                }
                suffix[cx * lens_bins + cy] = v;
            }
        }
        let mut lens = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                lens[a * dim + b] = suffix[(a + 1) * lens_bins + b + 1].max(0.0);
            }
        }

        Self {
            sector: *sector,
            grid,
            radius,
            lobe,
            lens,
        }
    }

    pub fn sector(&self) -> SpinSector {
        self.sector
    }

    pub fn grid(&self) -> QuadratureGrid {
        self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn lobe_area(&self, n_index: usize, m_index: usize) -> f64 {
        self.lobe[n_index * self.sector.dim() + m_index]
    }

    pub fn lens_area(&self, n_index: usize, m_index: usize) -> f64 {
        self.lens[n_index * self.sector.dim() + m_index]
    }

    /// Geometry of a pair regardless of whether the circles intersect.
    pub fn geometry_unchecked(&self, twice_n: i32, twice_m: i32) -> Result<BandGeometry> {
        let i = self.sector.checked_index(twice_n)?;
        let j = self.sector.checked_index(twice_m)?;
        let lens_area = self.lens_area(i, j);
        Ok(BandGeometry {
            twice_s: self.sector.twice_s(),
            twice_n,
            twice_m,
            radius: self.radius,
            lobe_area: self.lobe_area(i, j),
            lens_area,
            phi: lens_area / (2.0 * self.radius) - FRAC_PI_4,
            classically_allowed: classically_allowed(&self.sector, twice_n, twice_m),
        })
    }

    pub fn geometry(&self, twice_n: i32, twice_m: i32) -> Result<BandGeometry> {
        let g = self.geometry_unchecked(twice_n, twice_m)?;
        if !g.classically_allowed {
            return Err(Error::ClassicallyForbidden {
                twice_s: self.sector.twice_s(),
                twice_n,
                twice_m,
            });
        }
        Ok(g)
    }

    pub fn semiclassical_table(&self) -> TransitionTable {
        let dim = self.sector.dim();
        let mut values = vec![0.0; dim * dim];
        let mut allowed = vec![false; dim * dim];
        for (i, tn) in self.sector.twice_labels().enumerate() {
            for (j, tm) in self.sector.twice_labels().enumerate() {
                let g = self
                    .geometry_unchecked(tn, tm)
                    .expect("labels come from the sector");
                values[i * dim + j] = g.semiclassical_probability();
                allowed[i * dim + j] = g.classically_allowed;
            }
        }
        TransitionTable {
            kind: TableKind::Semiclassical,
            sector: self.sector,
            values,
            allowed,
        }
    }
}

/// Band geometry of a single pair. Integrates the whole sphere; use
/// [`SphereAreas`] directly when several pairs of one sector are needed.
pub fn band_geometry(
    sector: &SpinSector,
    twice_n: i32,
    twice_m: i32,
    grid: QuadratureGrid,
) -> Result<BandGeometry> {
    sector.checked_index(twice_n)?;
    sector.checked_index(twice_m)?;
    if !classically_allowed(sector, twice_n, twice_m) {
        return Err(Error::ClassicallyForbidden {
            twice_s: sector.twice_s(),
            twice_n,
            twice_m,
        });
    }
    SphereAreas::compute(sector, grid).geometry(twice_n, twice_m)
}

pub fn transition_table_semiclassical(
    sector: &SpinSector,
    grid: QuadratureGrid,
) -> TransitionTable {
    SphereAreas::compute(sector, grid).semiclassical_table()
}

/// One `(n, m)` entry of the semiclassical-vs-exact comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub twice_n: i32,
    pub twice_m: i32,
    pub p_exact: f64,
    pub p_semiclassical: f64,
    pub lobe_area: f64,
    pub lens_area: f64,
    pub phi: f64,
    pub allowed: bool,
}

/// `P(k, S) - P(k+1, S)` in both evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopBandDifference {
    pub twice_k: i32,
    pub exact: f64,
    pub semiclassical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub sector: SpinSector,
    pub rows: Vec<ComparisonRow>,
    pub differences: Vec<TopBandDifference>,
}

/// Exact and semiclassical `P(n, m)` for the requested rows `n` over all `m`.
pub fn semiclassical_vs_exact_report(
    sector: &SpinSector,
    twice_n_list: &[i32],
    grid: QuadratureGrid,
) -> Result<ComparisonReport> {
    for &tn in twice_n_list {
        sector.checked_index(tn)?;
    }
    let exact = transition_table_exact(sector)?;
    let areas = SphereAreas::compute(sector, grid);
    let semi = areas.semiclassical_table();
    let top = sector.twice_s() as i32;

    let mut rows = Vec::new();
    for &tn in twice_n_list {
        for tm in sector.twice_labels() {
            let g = areas.geometry_unchecked(tn, tm)?;
            rows.push(ComparisonRow {
                twice_n: tn,
                twice_m: tm,
                p_exact: exact.get(tn, tm)?,
                p_semiclassical: semi.get(tn, tm)?,
                lobe_area: g.lobe_area,
                lens_area: g.lens_area,
                phi: g.phi,
                allowed: g.classically_allowed,
            });
        }
    }
    let differences = twice_n_list
        .iter()
        .filter(|&&tk| sector.index_of(tk + 2).is_some())
        .map(|&tk| {
            Ok(TopBandDifference {
                twice_k: tk,
                exact: exact.get(tk, top)? - exact.get(tk + 2, top)?,
                semiclassical: semi.get(tk, top)? - semi.get(tk + 2, top)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        sector: *sector,
        rows,
        differences,
    })
}

/// Photon-number distribution of a squeezed vacuum, `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockDistribution {
    pub r: f64,
    pub probs: Vec<f64>,
}

/// `P(2j) = (2j)! tanh^{2j}(r) / (4^j (j!)^2 cosh r)`, `P(odd) = 0`.
pub fn squeezed_vacuum_fock(r: f64, k_max: usize) -> Result<FockDistribution> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidSqueezing(r));
    }
    let t2 = r.tanh().powi(2);
    let mut probs = vec![0.0; k_max + 1];
    let mut p = 1.0 / r.cosh();
    let mut k = 0;
    while k <= k_max {
        probs[k] = p;
        let j = (k / 2) as f64;
        p *= t2 * (2.0 * j + 1.0) / (2.0 * j + 2.0);
        k += 2;
    }
    Ok(FockDistribution { r, probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn sector(twice_s: i64) -> SpinSector {
        SpinSector::new(twice_s).unwrap()
    }

    /// `P(n, m)` from complex diagonalization of `S_x` and `S_y`.
    fn brute_force_table(sector: &SpinSector) -> Vec<f64> {
        let dim = sector.dim();
        let sx = collective_spin_matrix(sector, SpinAxis::X);
        let k = collective_spin_matrix(sector, SpinAxis::Y);
        let sx = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(sx[(i, j)], 0.0));
        // S_y = -i K
        let sy = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(0.0, -k[(i, j)]));
        let label_index = |e: f64| ((e + sector.s()).round()) as usize;
        let ex = sx.symmetric_eigen();
        let ey = sy.symmetric_eigen();
        let mut p = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                let va = ex.eigenvectors.column(a);
                let vb = ey.eigenvectors.column(b);
                let amp = va.dotc(&vb);
                p[label_index(ex.eigenvalues[a]) * dim + label_index(ey.eigenvalues[b])] =
                    amp.norm_sqr();
            }
        }
        p
    }

    fn ln_factorial(n: u32) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    /// `|d^j_{m'm}(pi/2)|^2` from the explicit Wigner sum.
    fn wigner_d_squared(twice_j: i32, twice_mp: i32, twice_m: i32) -> f64 {
        let fact = |x: i32| -> f64 { (1..=x).map(|k| k as f64).product() };
        let (jpm, jmm) = ((twice_j + twice_m) / 2, (twice_j - twice_m) / 2);
        let (jpmp, jmmp) = ((twice_j + twice_mp) / 2, (twice_j - twice_mp) / 2);
        let pref = (fact(jpm) * fact(jmm) * fact(jpmp) * fact(jmmp)).sqrt();
        let dm = (twice_m - twice_mp) / 2;
        let mut sum = 0.0;
        for k in 0..=twice_j {
            let a = jpm - k;
            let b = jmmp - k;
            let c = k - dm;
            if a < 0 || b < 0 || c < 0 {
                continue;
            }
            let sign = if (k - dm) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign / (fact(a) * fact(k) * fact(b) * fact(c));
        }
        let d = pref * sum * 0.5f64.powf(twice_j as f64 / 2.0);
        d * d
    }

    #[test]
    fn spin_half_table() {
        let t = transition_table_exact(&sector(1)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((t.at(i, j) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spin_one_table() {
        let t = transition_table_exact(&sector(2)).unwrap();
        let expect = [[0.25, 0.5, 0.25], [0.5, 0.0, 0.5], [0.25, 0.5, 0.25]];
        let oracle = brute_force_table(&sector(2));
        for i in 0..3 {
            for j in 0..3 {
                assert!((t.at(i, j) - expect[i][j]).abs() < 1e-14);
                assert!((oracle[i * 3 + j] - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_complex_diagonalization_oracle() {
        for twice_s in 1..=8 {
            let s = sector(twice_s);
            let t = transition_table_exact(&s).unwrap();
            let oracle = brute_force_table(&s);
            for i in 0..s.dim() {
                for j in 0..s.dim() {
                    assert!(
                        (t.at(i, j) - oracle[i * s.dim() + j]).abs() < 1e-12,
                        "2S={twice_s} ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn matches_wigner_small_d() {
        for twice_s in [3, 6, 11, 20] {
            let s = sector(twice_s);
            let t = transition_table_exact(&s).unwrap();
            for tn in s.twice_labels() {
                for tm in s.twice_labels() {
                    let w = wigner_d_squared(twice_s as i32, tn, tm);
                    assert!((t.get(tn, tm).unwrap() - w).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn top_column_is_binomial() {
        for twice_s in [10, 41, 120, 200] {
            let s = sector(twice_s);
            let t = transition_table_exact(&s).unwrap();
            let ts = twice_s as u32;
            for (i, tn) in s.twice_labels().enumerate() {
                let k = i as u32;
                let ln_binom = ln_factorial(ts) - ln_factorial(k) - ln_factorial(ts - k);
                let expect = (ln_binom - ts as f64 * 2f64.ln()).exp();
                let got = t.get(tn, twice_s as i32).unwrap();
                assert!((got - expect).abs() < 1e-10, "2S={twice_s} 2n={tn}");
            }
        }
    }

    #[test]
    fn doubly_stochastic_and_symmetric() {
        for twice_s in [1, 2, 5, 16, 33, 80, 151, 200] {
            let s = sector(twice_s);
            let t = transition_table_exact(&s).unwrap();
            assert!(t.row_sums().iter().all(|r| (r - 1.0).abs() <= 1e-10));
            assert!(t.column_sums().iter().all(|c| (c - 1.0).abs() <= 1e-10));
            let d = s.dim();
            for i in 0..d {
                for j in 0..d {
                    let p = t.at(i, j);
                    assert!((-1e-15..=1.0 + 1e-12).contains(&p));
                    assert!((p - t.at(j, i)).abs() <= 1e-10);
                    assert!((p - t.at(d - 1 - i, d - 1 - j)).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn second_moment_is_half_of_perpendicular_casimir() {
        // sum_m m^2 P(n,m) = <n_x|S_y^2|n_x> = (S(S+1) - n^2)/2
        let s = sector(13);
        let t = transition_table_exact(&s).unwrap();
        for (n, m2) in s.labels().iter().zip(t.second_moments()) {
            assert!((m2 - (s.casimir() - n * n) / 2.0).abs() < 1e-10);
        }
    }

    const COARSE: QuadratureGrid = QuadratureGrid {
        n_theta: 512,
        n_phi: 1024,
    };

    #[test]
    fn quarter_sphere_and_cap_anchors() {
        for twice_s in [8, 16, 42] {
            let s = sector(twice_s);
            let areas = SphereAreas::compute(&s, QuadratureGrid::PRODUCTION);
            let r = s.bloch_radius();
            let g = areas.geometry(0, 0).unwrap();
            assert!((g.lens_area / (PI * r * r) - 1.0).abs() < 2e-3);
            let g = areas.geometry(0, twice_s as i32).unwrap();
            let cap = PI * r * (r - s.s());
            assert!((g.lens_area / cap - 1.0).abs() < 2e-3, "2S={twice_s}");
        }
    }

    #[test]
    fn band_partition_covers_sphere() {
        for twice_s in [1, 4, 9, 20] {
            let s = sector(twice_s);
            let areas = SphereAreas::compute(&s, COARSE);
            let r = s.bloch_radius();
            let d = s.dim();
            let total: f64 = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| 2.0 * areas.lobe_area(i, j))
                .sum();
            assert!((total / (4.0 * PI * r * r) - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn lobe_and_lens_bounds() {
        let s = sector(12);
        let areas = SphereAreas::compute(&s, COARSE);
        let r = s.bloch_radius();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                assert!((0.0..=2.0 * PI * r).contains(&areas.lobe_area(i, j)));
                assert!((0.0..=4.0 * PI * r * r).contains(&areas.lens_area(i, j)));
            }
        }
    }

    #[test]
    fn lens_is_monotone_in_both_labels() {
        let s = sector(11);
        let areas = SphereAreas::compute(&s, COARSE);
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                if i + 1 < s.dim() {
                    assert!(areas.lens_area(i + 1, j) <= areas.lens_area(i, j));
                }
                if j + 1 < s.dim() {
                    assert!(areas.lens_area(i, j + 1) <= areas.lens_area(i, j));
                }
            }
        }
    }

    #[test]
    fn forbidden_pairs() {
        let s = sector(4);
        // n = m = 2: 8 > 6
        assert!(!classically_allowed(&s, 4, 4));
        assert!(classically_allowed(&s, 2, 4));
        assert!(matches!(
            band_geometry(&s, 4, 4, COARSE),
            Err(Error::ClassicallyForbidden { .. })
        ));
        let t = transition_table_semiclassical(&s, COARSE);
        assert_eq!(t.kind(), TableKind::Semiclassical);
        assert_eq!(t.get(4, 4).unwrap(), 0.0);
        assert!(!t.is_allowed(4, 4));
        assert!(t.is_allowed(2, 2));
    }

    #[test]
    fn semiclassical_values_are_probabilities() {
        for twice_s in [1, 2, 7, 20] {
            let t = transition_table_semiclassical(&sector(twice_s), COARSE);
            for i in 0..t.dim() {
                for j in 0..t.dim() {
                    assert!((0.0..=1.0).contains(&t.at(i, j)));
                }
            }
        }
    }

    #[test]
    fn interference_angle_vanishes_for_top_band() {
        let s = sector(42);
        let g = band_geometry(&s, 0, 42, QuadratureGrid::PRODUCTION).unwrap();
        assert!(g.phi.abs() <= 0.05);
    }

    #[test]
    fn report_is_deterministic_and_top_difference_positive() {
        let s = sector(20);
        let a = semiclassical_vs_exact_report(&s, &[0, 2], COARSE).unwrap();
        let b = semiclassical_vs_exact_report(&s, &[0, 2], COARSE).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2 * s.dim());
        assert_eq!(a.differences.len(), 2);
        assert!(a.differences.iter().all(|d| d.exact > 0.0));
        let d0 = a.differences[0];
        assert_eq!(d0.exact.signum(), d0.semiclassical.signum());
        assert!(semiclassical_vs_exact_report(&s, &[1], COARSE).is_err());
    }

    #[test]
    fn squeezed_vacuum() {
        let f = squeezed_vacuum_fock(0.0, 10).unwrap();
        assert_eq!(f.probs[0], 1.0);
        assert!(f.probs[1..].iter().all(|&p| p == 0.0));

        let f = squeezed_vacuum_fock(0.5, 101).unwrap();
        assert!((f.probs[0] - 1.0 / 0.5f64.cosh()).abs() < 1e-15);
        assert!(f.probs.iter().skip(1).step_by(2).all(|&p| p == 0.0));
        let total: f64 = f.probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // second term from the closed form: tanh^2(r) / (2 cosh r)
        let expect = 0.5f64.tanh().powi(2) / (2.0 * 0.5f64.cosh());
        assert!((f.probs[2] - expect).abs() < 1e-15);

        assert_eq!(
            squeezed_vacuum_fock(-0.1, 4),
            Err(Error::InvalidSqueezing(-0.1))
        );
    }
}
