//! Hyperspherical parametrization of pure states and samplers for the
//! isotropic (unitarily invariant) measure on them.
//!
//! A state in `C^D` is written with polar angles `θ_1..θ_{D-1}` in `[0, π/2)`
//! and azimuths `φ_1..φ_{D-1}` in `[0, 2π)`:
//!
//! ```text
//! |φ> = (cos θ_1,
//!        e^{iφ_1} sin θ_1 cos θ_2,
//!        ...,
//!        e^{iφ_k} sin θ_1 ... sin θ_k cos θ_{k+1},
//!        ...,
//!        e^{iφ_{D-1}} sin θ_1 ... sin θ_{D-1})
//! ```
//!
//! The invariant volume element in these coordinates is
//! `dν = D!/π^{D-1} ∏_k cos θ_k sin^{2(D-k)-1} θ_k dξ`, normalized so that
//! `∮ dν = D`. Each polar angle has marginal CDF `sin^{2(D-k)} θ_k`, which the
//! angle sampler inverts exactly.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{sym_projector, tensor, ComplexOperator, PureState};
use crate::shard::{block_rng, map_blocks};

/// Generalized polar and azimuthal angles of a pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct HypersphericalCoords {
    thetas: Vec<f64>,
    phis: Vec<f64>,
}

impl HypersphericalCoords {
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != phis.len() {
            return Err(Error::DimensionMismatch {
                left: thetas.len(),
                right: phis.len(),
            });
        }
        for (index, &value) in thetas.iter().enumerate() {
            if !(0.0..FRAC_PI_2).contains(&value) {
                return Err(Error::AngleOutOfRange {
                    name: "theta",
                    index,
                    value,
                    range: "[0, pi/2)",
                });
            }
        }
        for (index, &value) in phis.iter().enumerate() {
            if !(0.0..TAU).contains(&value) {
                return Err(Error::AngleOutOfRange {
                    name: "phi",
                    index,
                    value,
                    range: "[0, 2pi)",
                });
            }
        }
        Ok(Self { thetas, phis })
    }

    /// Hilbert-space dimension described by these angles.
    pub fn dim(&self) -> usize {
        self.thetas.len() + 1
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }
}

pub fn coords_to_state(xi: &HypersphericalCoords) -> PureState {
    let d = xi.dim();
    let mut amps = Vec::with_capacity(d);
    amps.push(Complex64::new(xi.thetas[0].cos(), 0.0));
    let mut sines = 1.0;
    for k in 1..d {
        sines *= xi.thetas[k - 1].sin();
        let radial = if k < d - 1 {
            sines * xi.thetas[k].cos()
        } else {
            sines
        };
        amps.push(Complex64::from_polar(radial, xi.phis[k - 1]));
    }
    PureState::normalized(amps).expect("hyperspherical amplitudes are never all zero")
}

/// Power of `sin θ_k` (1-based `k`) in the volume element for dimension `d`.
pub fn sine_exponent(d: usize, k: usize) -> i32 {
    (2 * (d - k) - 1) as i32
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn density_raw(thetas: &[f64], d: usize) -> f64 {
    let angular: f64 = thetas
        .iter()
        .enumerate()
        .map(|(i, t)| t.cos() * t.sin().powi(sine_exponent(d, i + 1)))
        .product();
    factorial(d) / PI.powi(d as i32 - 1) * angular
}

/// Differential volume `dν/dξ` at `xi`.
pub fn volume_density(xi: &HypersphericalCoords, d: usize) -> Result<f64> {
    if xi.dim() != d {
        return Err(Error::DimensionMismatch {
            left: xi.dim(),
            right: d,
        });
    }
    Ok(density_raw(&xi.thetas, d))
}

/// Integrates [`volume_density`] over the full angle domain: trapezoidal rule
/// with `theta_intervals` intervals on every `[0, π/2]` polar range. The
/// density does not depend on the azimuths, so each contributes exactly `2π`.
pub fn quadrature_volume(d: usize, theta_intervals: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, min: 2 });
    }
    let m = d - 1;
    let h = FRAC_PI_2 / theta_intervals as f64;
    let weight = |i: usize| if i == 0 || i == theta_intervals { 0.5 * h } else { h };

    let mut idx = vec![0usize; m];
    let mut thetas = vec![0.0; m];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            thetas[k] = i as f64 * h;
            w *= weight(i);
        }
        total += w * density_raw(&thetas, d);
        if !advance(&mut idx, theta_intervals + 1) {
            break;
        }
    }
    Ok(total * TAU.powi(m as i32))
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerId {
    Angles,
    Gaussian,
}

impl fmt::Display for SamplerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerId::Angles => "angles",
            SamplerId::Gaussian => "gaussian",
        })
    }
}

impl FromStr for SamplerId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "angles" => Ok(SamplerId::Angles),
            "gaussian" => Ok(SamplerId::Gaussian),
            other => Err(format!("unknown sampler '{other}' (expected angles|gaussian)")),
        }
    }
}

/// Haar-distributed pure states plus the parameters that reproduce them.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub dim: usize,
    pub states: Vec<PureState>,
    pub seed: u64,
    pub sampler: SamplerId,
    pub shards: usize,
}

/// Draws angles from the normalized volume element `dν / D`.
pub fn sample_angles<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HypersphericalCoords {
    let thetas = (1..d)
        .map(|k| {
            let inv = 1.0 / (2 * (d - k)) as f64;
            loop {
                let u: f64 = rng.random();
                let theta = u.powf(inv).asin();
                if theta < FRAC_PI_2 {
                    break theta;
                }
            }
        })
        .collect();
    let phis = (1..d)
        .map(|_| loop {
            let phi = rng.random::<f64>() * TAU;
            if phi < TAU {
                break phi;
            }
        })
        .collect();
    HypersphericalCoords { thetas, phis }
}

/// Normalized vector of i.i.d. standard complex Gaussians.
pub fn sample_gaussian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    loop {
        let amps: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(s) = PureState::normalized(amps) {
            return s;
        }
    }
}

pub fn sample_state<R: Rng + ?Sized>(d: usize, sampler: SamplerId, rng: &mut R) -> PureState {
    match sampler {
        SamplerId::Angles => coords_to_state(&sample_angles(d, rng)),
        SamplerId::Gaussian => sample_gaussian(d, rng),
    }
}

pub fn sample_haar(
    d: usize,
    n: usize,
    seed: u64,
    sampler: SamplerId,
    shards: usize,
) -> Result<SampleBatch> {
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, min: 2 });
    }
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let states = map_blocks(n, shards, |block, range| {
        let mut rng = block_rng(seed, block);
        range.map(|_| sample_state(d, sampler, &mut rng)).collect::<Vec<_>>()
    })
    .concat();
    Ok(SampleBatch {
        dim: d,
        states,
        seed,
        sampler,
        shards: shards.max(1),
    })
}

pub fn sample_haar_angles(d: usize, n: usize, seed: u64, shards: usize) -> Result<SampleBatch> {
    sample_haar(d, n, seed, SamplerId::Angles, shards)
}

pub fn sample_haar_gaussian(d: usize, n: usize, seed: u64, shards: usize) -> Result<SampleBatch> {
    sample_haar(d, n, seed, SamplerId::Gaussian, shards)
}

/// Empirical first and second moment operators of a batch:
/// the averages of `|φ><φ|` and `|φ><φ| ⊗ |φ><φ|`.
pub fn moment_check(batch: &SampleBatch) -> Result<(ComplexOperator, ComplexOperator)> {
    if batch.states.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let d = batch.dim;
    let mut first = ComplexOperator::zeros(d);
    let mut second = ComplexOperator::zeros(d * d);
    for s in &batch.states {
        let p = ComplexOperator::projector(s);
        second = &second + &tensor(&p, &p);
        first = &first + &p;
    }
    let inv = 1.0 / batch.states.len() as f64;
    Ok((first.scale(inv), second.scale(inv)))
}

/// Exact second moment of the isotropic measure, `2 P+ / (d (d + 1))`.
pub fn second_moment_reference(d: usize) -> Result<ComplexOperator> {
    Ok(sym_projector(d)?.scale(2.0 / (d * (d + 1)) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn coords_zero_is_first_basis_vector() {
        for d in 2..=5 {
            let xi = HypersphericalCoords::new(vec![0.0; d - 1], vec![0.0; d - 1]).unwrap();
            assert_eq!(coords_to_state(&xi), PureState::basis(d, 0));
        }
    }

    #[test]
    fn coords_d2_quarter_pi() {
        let xi = HypersphericalCoords::new(vec![FRAC_PI_4], vec![0.0]).unwrap();
        let s = coords_to_state(&xi);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.max_abs_diff(&PureState::from_real(&[h, h]).unwrap()) < 1e-15);
    }

    #[test]
    fn coords_d3_hand_evaluation() {
        // cos(pi/3) = 1/2; sin(pi/3) cos(pi/4) = sin(pi/3) sin(pi/4) = sqrt(6)/4
        let xi = HypersphericalCoords::new(vec![PI / 3.0, FRAC_PI_4], vec![FRAC_PI_2, 0.0]).unwrap();
        let s = coords_to_state(&xi);
        let r6 = 6f64.sqrt() / 4.0;
        let want = [Complex64::new(0.5, 0.0), Complex64::new(0.0, r6), Complex64::new(r6, 0.0)];
        for (a, b) in s.amplitudes().iter().zip(want) {
            assert!((a - b).norm() < 1e-15, "{a} vs {b}");
        }
        let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coords_range_checked() {
        assert!(HypersphericalCoords::new(vec![FRAC_PI_2], vec![0.0]).is_err());
        assert!(HypersphericalCoords::new(vec![0.1], vec![TAU]).is_err());
        assert!(HypersphericalCoords::new(vec![-0.1], vec![0.0]).is_err());
        assert!(HypersphericalCoords::new(vec![0.1, 0.2], vec![0.0]).is_err());
        assert!(HypersphericalCoords::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn volume_density_examples() {
        let xi = HypersphericalCoords::new(vec![FRAC_PI_4], vec![1.0]).unwrap();
        assert_abs_diff_eq!(volume_density(&xi, 2).unwrap(), 1.0 / PI, epsilon = 1e-15);
        let xi = HypersphericalCoords::new(vec![0.4, 0.0, 0.9], vec![0.0; 3]).unwrap();
        assert_eq!(volume_density(&xi, 4).unwrap(), 0.0);
        assert!(volume_density(&xi, 3).is_err());
    }

    #[test]
    fn exponents_match_jacobian_ordering() {
        assert_eq!(sine_exponent(2, 1), 1);
        assert_eq!(sine_exponent(3, 1), 3);
        assert_eq!(sine_exponent(3, 2), 1);
    }

    #[test]
    fn empty_batch_rejected() {
        assert!(matches!(sample_haar_angles(2, 0, 1, 1), Err(Error::EmptyBatch)));
        assert!(matches!(sample_haar_gaussian(1, 5, 1, 1), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn single_state_batch_moment_is_exact() {
        let batch = SampleBatch {
            dim: 2,
            states: vec![PureState::basis(2, 0)],
            seed: 0,
            sampler: SamplerId::Angles,
            shards: 1,
        };
        let (first, _) = moment_check(&batch).unwrap();
        assert_eq!(first, ComplexOperator::projector(&PureState::basis(2, 0)));
    }

    #[test]
    fn sampler_determinism() {
        for sampler in [SamplerId::Angles, SamplerId::Gaussian] {
            let a = sample_haar(3, 3000, 9, sampler, 1).unwrap();
            let b = sample_haar(3, 3000, 9, sampler, 1).unwrap();
            let c = sample_haar(3, 3000, 9, sampler, 3).unwrap();
            assert_eq!(a.states, b.states);
            assert_eq!(a.states, c.states);
            let other = sample_haar(3, 3000, 10, sampler, 1).unwrap();
            assert_ne!(a.states, other.states);
        }
    }

    #[test]
    fn sampler_id_parse() {
        assert_eq!("angles".parse::<SamplerId>().unwrap(), SamplerId::Angles);
        assert_eq!("gaussian".parse::<SamplerId>().unwrap(), SamplerId::Gaussian);
        assert!("Gaussian".parse::<SamplerId>().is_err());
    }
}
