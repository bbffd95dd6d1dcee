//! Collective spin operators and the LMG Hamiltonian in the maximum-spin
//! Dicke sector.
//!
//! Every matrix lives in the `S_z` eigenbasis ordered `n = -S, -S+1, ..., S`.
//! `S_y` is purely imaginary in that basis, so it is carried through its real
//! antisymmetric proxy `K = i S_y`; then `S_y^2 = -K^2` and the Hamiltonian is
//! real symmetric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The `(2S+1)`-dimensional sector of total spin `S = N/2`.
///
/// Spin and magnetic quantum numbers are stored doubled so that half-integer
/// values stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinSector {
    twice_s: u32,
}

impl SpinSector {
    pub fn new(twice_s: i64) -> Result<Self> {
        if twice_s < 1 || twice_s > u32::MAX as i64 / 2 {
            return Err(Error::InvalidSector { twice_s });
        }
        Ok(Self {
            twice_s: twice_s as u32,
        })
    }

    /// Sector for `N` spin-1/2 particles.
    pub fn from_spins(n: u32) -> Result<Self> {
        Self::new(n as i64)
    }

    pub fn twice_s(&self) -> u32 {
        self.twice_s
    }

    /// Number of spins, `N = 2S`.
    pub fn spins(&self) -> u32 {
        self.twice_s
    }

    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn is_half_integer(&self) -> bool {
        self.twice_s % 2 == 1
    }

    /// `S(S+1)`.
    pub fn casimir(&self) -> f64 {
        let s = self.s();
        s * (s + 1.0)
    }

    /// Bloch-sphere radius `R_S = sqrt(S(S+1))`.
    pub fn bloch_radius(&self) -> f64 {
        self.casimir().sqrt()
    }

    /// Doubled magnetic numbers `2n`, ascending from `-2S` to `2S`.
    pub fn twice_labels(&self) -> impl Iterator<Item = i32> + Clone {
        let ts = self.twice_s as i32;
        (0..=ts).map(move |i| -ts + 2 * i)
    }

    /// Magnetic numbers `n` as floats, ascending.
    pub fn labels(&self) -> Vec<f64> {
        self.twice_labels().map(|t| t as f64 / 2.0).collect()
    }

    pub fn twice_label(&self, index: usize) -> i32 {
        -(self.twice_s as i32) + 2 * index as i32
    }

    /// Basis index of the doubled label `2n`, if it belongs to the sector.
    pub fn index_of(&self, twice_n: i32) -> Option<usize> {
        let ts = self.twice_s as i32;
        if twice_n.abs() > ts || (twice_n + ts) % 2 != 0 {
            return None;
        }
        Some(((twice_n + ts) / 2) as usize)
    }

    pub fn checked_index(&self, twice_n: i32) -> Result<usize> {
        self.index_of(twice_n).ok_or(Error::InvalidLabel {
            twice_s: self.twice_s,
            twice_n,
        })
    }
}

/// Whether the couplings are divided by `N` (Kac rescaling).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalingMode {
    NonExtensive,
    Extensive,
}

impl ScalingMode {
    pub const ALL: [ScalingMode; 2] = [ScalingMode::NonExtensive, ScalingMode::Extensive];

    /// Factor multiplying the bare couplings for a medium of `n` spins.
    pub fn coupling_factor(self, n: u32) -> f64 {
        match self {
            ScalingMode::NonExtensive => 1.0,
            ScalingMode::Extensive => 1.0 / n as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::NonExtensive => "nonextensive",
            ScalingMode::Extensive => "extensive",
        }
    }
}

impl std::fmt::Display for ScalingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScalingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nonextensive" => Ok(ScalingMode::NonExtensive),
            "extensive" => Ok(ScalingMode::Extensive),
            _ => Err(format!("unknown scaling mode '{s}'")),
        }
    }
}

/// `(gamma_x, gamma_y)` of `H = gamma_x S_x^2 + gamma_y S_y^2`.
///
/// `gamma_x` must be positive. `gamma_y` may be zero, which is the reference
/// run of the interference baseline protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPair {
    pub gamma_x: f64,
    pub gamma_y: f64,
}

impl CouplingPair {
    pub fn new(gamma_x: f64, gamma_y: f64) -> Result<Self> {
        let pair = Self { gamma_x, gamma_y };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_x.is_finite() && self.gamma_x > 0.0) {
            return Err(Error::InvalidCoupling(format!(
                "gamma_x = {} must be finite and > 0",
                self.gamma_x
            )));
        }
        if !(self.gamma_y.is_finite() && self.gamma_y >= 0.0) {
            return Err(Error::InvalidCoupling(format!(
                "gamma_y = {} must be finite and >= 0",
                self.gamma_y
            )));
        }
        Ok(())
    }

    /// Couplings as they enter the Hamiltonian of `n` spins.
    pub fn effective(&self, mode: ScalingMode, n: u32) -> CouplingPair {
        let f = mode.coupling_factor(n);
        CouplingPair {
            gamma_x: self.gamma_x * f,
            gamma_y: self.gamma_y * f,
        }
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    order: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                data.push(f(i, j));
            }
        }
        Self { order, data }
    }

    pub fn from_row_major(order: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != order * order {
            return Err(Error::DimensionError {
                expected: order * order,
                found: data.len(),
            });
        }
        Ok(Self { order, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.order, rhs.order, "matmul order mismatch");
        let n = self.order;
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> RealMatrix {
        RealMatrix {
            order: self.order,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn sub(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.order, rhs.order);
        RealMatrix {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.order, rhs.order);
        RealMatrix {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self[(i, j)].to_bits() == self[(j, i)].to_bits()))
    }
}

impl std::ops::Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.order + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.order + j]
    }
}

/// A [`RealMatrix`] whose entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix(RealMatrix);

impl RealSymMatrix {
    pub fn new(matrix: RealMatrix) -> Result<Self> {
        if !matrix.is_symmetric() {
            return Err(Error::InvalidCoupling(
                "matrix is not exactly symmetric".to_string(),
            ));
        }
        Ok(Self(matrix))
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }

    pub fn into_inner(self) -> RealMatrix {
        self.0
    }

    pub fn scale(&self, factor: f64) -> RealSymMatrix {
        RealSymMatrix(self.0.scale(factor))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }
}

impl std::ops::Index<(usize, usize)> for RealSymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

/// `<n+1|S_+|n> = sqrt(S(S+1) - n(n+1))` for the basis index of `n`.
fn raising_coefficient(sector: &SpinSector, index: usize) -> f64 {
    let n = sector.twice_label(index) as f64 / 2.0;
    (sector.casimir() - n * (n + 1.0)).max(0.0).sqrt()
}

/// Collective spin matrix in the `S_z` basis.
///
/// For [`SpinAxis::Y`] the real antisymmetric matrix `K = i S_y` is returned,
/// with `K[n+1][n] = +c/2` and `K[n][n+1] = -c/2`.
pub fn collective_spin_matrix(sector: &SpinSector, axis: SpinAxis) -> RealMatrix {
    let dim = sector.dim();
    let mut m = RealMatrix::zeros(dim);
    match axis {
        SpinAxis::Z => {
            for i in 0..dim {
                m[(i, i)] = sector.twice_label(i) as f64 / 2.0;
            }
        }
        SpinAxis::X => {
            for i in 0..dim - 1 {
                let c = 0.5 * raising_coefficient(sector, i);
                m[(i + 1, i)] = c;
                m[(i, i + 1)] = c;
            }
        }
        SpinAxis::Y => {
            for i in 0..dim - 1 {
                let c = 0.5 * raising_coefficient(sector, i);
                m[(i + 1, i)] = c;
                m[(i, i + 1)] = -c;
            }
        }
    }
    m
}

/// `H = gamma_x S_x^2 + gamma_y S_y^2`, Kac-rescaled by `1/N` in extensive mode.
///
/// The non-extensive matrix is assembled as `gamma_x S_x^2 - gamma_y K^2`
/// and, in extensive mode, every entry is then divided by `N`.
pub fn lmg_hamiltonian(
    sector: &SpinSector,
    couplings: &CouplingPair,
    mode: ScalingMode,
) -> Result<RealSymMatrix> {
    couplings.validate()?;
    let sx = collective_spin_matrix(sector, SpinAxis::X);
    let k = collective_spin_matrix(sector, SpinAxis::Y);
    let sx2 = sx.matmul(&sx);
    let k2 = k.matmul(&k);
    let dim = sector.dim();
    let mut h = RealMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] = couplings.gamma_x * sx2[(i, j)] - couplings.gamma_y * k2[(i, j)];
        }
    }
    if mode == ScalingMode::Extensive {
        let n = sector.spins() as f64;
        h = RealMatrix::from_fn(dim, |i, j| h[(i, j)] / n);
    }
    RealSymMatrix::new(h)
}
