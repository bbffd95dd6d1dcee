//! Canonical populations and the four-stroke quantum Otto cycle.
//!
//! Points of the cycle: `A` (hot Hamiltonian, cold populations), `B` (hot
//! Hamiltonian, hot thermal state), `C` (cold Hamiltonian, hot populations),
//! `D` (cold Hamiltonian, cold thermal state). The adiabats `B -> C` and
//! `D -> A` carry populations level by level in sorted-eigenvalue order.

use serde::{Deserialize, Serialize};

use crate::eigen::{eigendecompose, Spectrum};
use crate::error::{Error, Result};
use crate::spin::{lmg_hamiltonian, CouplingPair, ScalingMode, SpinSector};
use crate::sum::{compensated_dot, compensated_sum};

/// Couplings and bath temperatures of one engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub hot: CouplingPair,
    pub cold: CouplingPair,
    pub t_hot: f64,
    pub t_cold: f64,
    pub mode: ScalingMode,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            hot: CouplingPair {
                gamma_x: 1.01,
                gamma_y: 0.01,
            },
            cold: CouplingPair {
                gamma_x: 1.0,
                gamma_y: 0.02,
            },
            t_hot: 0.4,
            t_cold: 0.1,
            mode: ScalingMode::NonExtensive,
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        self.hot.validate()?;
        self.cold.validate()?;
        for t in [self.t_hot, self.t_cold] {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidTemperature(t));
            }
        }
        if self.t_hot <= self.t_cold {
            return Err(Error::InvalidTemperature(self.t_hot));
        }
        Ok(())
    }

    pub fn with_mode(mut self, mode: ScalingMode) -> Self {
        self.mode = mode;
        self
    }

    /// `gamma_y^H - gamma_y^L` of the bare couplings.
    pub fn delta_gamma_y(&self) -> f64 {
        self.hot.gamma_y - self.cold.gamma_y
    }

    pub fn delta_gamma_x(&self) -> f64 {
        self.hot.gamma_x - self.cold.gamma_x
    }

    /// Whether `gamma_x^H > gamma_y^H >> gamma_x^L > gamma_y^L > 0` holds,
    /// reading `>>` as at least a factor of ten. Other orderings are allowed.
    pub fn in_ordered_regime(&self) -> bool {
        self.hot.gamma_x > self.hot.gamma_y
            && self.hot.gamma_y >= 10.0 * self.cold.gamma_x
            && self.cold.gamma_x > self.cold.gamma_y
            && self.cold.gamma_y > 0.0
    }

    /// Multiply temperatures and all couplings by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        let s = |c: CouplingPair| CouplingPair {
            gamma_x: c.gamma_x * lambda,
            gamma_y: c.gamma_y * lambda,
        };
        Self {
            hot: s(self.hot),
            cold: s(self.cold),
            t_hot: self.t_hot * lambda,
            t_cold: self.t_cold * lambda,
            mode: self.mode,
        }
    }
}

/// Occupation probabilities aligned with a [`Spectrum`]'s eigenvalue order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalPopulations {
    pub probs: Vec<f64>,
    pub temperature: f64,
}

/// `p_k = exp(-(E_k - E_min)/T) / Z`.
pub fn gibbs_populations(spectrum: &Spectrum, temperature: f64) -> Result<ThermalPopulations> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidTemperature(temperature));
    }
    let e_min = spectrum.min();
    let weights: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .map(|e| (-(e - e_min) / temperature).exp())
        .collect();
    let z = compensated_sum(weights.iter().copied());
    Ok(ThermalPopulations {
        probs: weights.into_iter().map(|w| w / z).collect(),
        temperature,
    })
}

/// `sum_k p_k E_k` for any probability vector aligned with `spectrum`.
pub fn internal_energy(probs: &[f64], spectrum: &Spectrum) -> Result<f64> {
    if probs.len() != spectrum.len() {
        return Err(Error::DimensionError {
            expected: spectrum.len(),
            found: probs.len(),
        });
    }
    Ok(compensated_dot(probs, spectrum.eigenvalues()))
}

/// Energies and heats of one cycle. `eta` is `W/Q_in` when `Q_in > 0`;
/// `eta_signed` is `1 + Q_out/Q_in` whenever `Q_in != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub n: u32,
    pub u_a: f64,
    pub u_b: f64,
    pub u_c: f64,
    pub u_d: f64,
    pub q_in: f64,
    pub q_out: f64,
    pub w: f64,
    pub eta: Option<f64>,
    pub eta_signed: Option<f64>,
}

impl CycleResult {
    /// Assemble heats, work and efficiencies from the four internal energies.
    pub fn from_energies(n: u32, u_a: f64, u_b: f64, u_c: f64, u_d: f64) -> Self {
        let q_in = u_b - u_a;
        let q_out = u_d - u_c;
        let w = q_in + q_out;
        Self {
            n,
            u_a,
            u_b,
            u_c,
            u_d,
            q_in,
            q_out,
            w,
            eta: (q_in > 0.0).then(|| w / q_in),
            eta_signed: (q_in != 0.0).then(|| 1.0 + q_out / q_in),
        }
    }
}

/// The cycle evaluated on precomputed hot and cold spectra.
pub fn otto_cycle_from_spectra(
    n: u32,
    hot: &Spectrum,
    cold: &Spectrum,
    params: &EngineParams,
) -> Result<CycleResult> {
    if hot.len() != cold.len() {
        return Err(Error::DimensionError {
            expected: hot.len(),
            found: cold.len(),
        });
    }
    let p_hot = gibbs_populations(hot, params.t_hot)?;
    let p_cold = gibbs_populations(cold, params.t_cold)?;
    let u_b = internal_energy(&p_hot.probs, hot)?;
    let u_a = internal_energy(&p_cold.probs, hot)?;
    let u_d = internal_energy(&p_cold.probs, cold)?;
    let u_c = internal_energy(&p_hot.probs, cold)?;
    Ok(CycleResult::from_energies(n, u_a, u_b, u_c, u_d))
}

/// Hot and cold spectra of the working medium.
pub fn stroke_spectra(sector: &SpinSector, params: &EngineParams) -> Result<(Spectrum, Spectrum)> {
    let hot = eigendecompose(&lmg_hamiltonian(sector, &params.hot, params.mode)?)?;
    let cold = eigendecompose(&lmg_hamiltonian(sector, &params.cold, params.mode)?)?;
    Ok((hot, cold))
}

pub fn run_otto_cycle(sector: &SpinSector, params: &EngineParams) -> Result<CycleResult> {
    params.validate()?;
    let (hot, cold) = stroke_spectra(sector, params)?;
    otto_cycle_from_spectra(sector.spins(), &hot, &cold, params)
}
