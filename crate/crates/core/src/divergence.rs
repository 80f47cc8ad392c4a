//! The divergence operator `C = 1/2 Σ_i (E_A(i) ⊗ 1 − 1 ⊗ E_B(i))²` in its
//! discrete, Monte Carlo (isotropic continuous POVM) and closed forms, plus the
//! remapped variant where B's outcome is paired through a correlation map.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{sample_gaussian, sample_state, SamplerId};
use crate::hilbert::{
    antisym_projector, expectation, sym_projector, tensor, ComplexOperator, DensityMatrix, Povm,
    PureState, EXACT_TOL, NUMERIC_TOL,
};
use crate::shard::{block_rng, map_blocks};

/// Slack on the spectral bounds `[0, 1]` of discrete and closed-form operators.
pub const SPECTRAL_SLACK: f64 = 1e-9;
/// Tolerance on the mean-divergence bounds for closed-form operators.
pub const BOUND_TOL: f64 = 1e-9;
/// Singular values of a maximally entangled reshaped state must lie this close to 1.
pub const MAX_ENTANGLED_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Discrete,
    MonteCarlo,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McMeta {
    pub n_samples: usize,
    pub seed: u64,
    pub sampler: SamplerId,
    pub shards: usize,
}

/// Hermitian operator on the joint space `C^D ⊗ C^D`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceOperator {
    dim_local: usize,
    op: ComplexOperator,
    provenance: Provenance,
    mc_meta: Option<McMeta>,
}

impl DivergenceOperator {
    fn new(
        dim_local: usize,
        op: ComplexOperator,
        provenance: Provenance,
        mc_meta: Option<McMeta>,
    ) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > NUMERIC_TOL {
            return Err(Error::NotHermitian(defect));
        }
        if provenance != Provenance::MonteCarlo {
            let ev = op.eigenvalues_hermitian();
            let (lo, hi) = (ev[0], ev[ev.len() - 1]);
            if lo < -SPECTRAL_SLACK || hi > 1.0 + SPECTRAL_SLACK {
                return Err(Error::BoundViolation {
                    value: if lo < -SPECTRAL_SLACK { lo } else { hi },
                    lower: 0.0,
                    upper: 1.0,
                });
            }
        }
        Ok(Self {
            dim_local,
            op,
            provenance,
            mc_meta,
        })
    }

    pub fn dim_local(&self) -> usize {
        self.dim_local
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.op
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn mc_meta(&self) -> Option<&McMeta> {
        self.mc_meta.as_ref()
    }
}

/// `(1/2)(a ⊗ 1 − 1 ⊗ b)²`, squared literally.
fn half_square_difference(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    let id = ComplexOperator::identity(a.dim());
    let x = &tensor(a, &id) - &tensor(&id, b);
    (&x * &x).scale(0.5)
}

fn sum_in_order(parts: Vec<ComplexOperator>, dim: usize) -> ComplexOperator {
    parts
        .iter()
        .fold(ComplexOperator::zeros(dim), |acc, p| &acc + p)
}

/// Divergence operator of two POVMs paired by outcome index.
pub fn divergence_discrete(povm_a: &Povm, povm_b: &Povm) -> Result<DivergenceOperator> {
    if povm_a.dim() != povm_b.dim() {
        return Err(Error::Pairing(format!(
            "dimensions {} and {}",
            povm_a.dim(),
            povm_b.dim()
        )));
    }
    if povm_a.len() != povm_b.len() {
        return Err(Error::Pairing(format!(
            "{} and {} outcomes",
            povm_a.len(),
            povm_b.len()
        )));
    }
    let d = povm_a.dim();
    let op = povm_a
        .effects()
        .iter()
        .zip(povm_b.effects())
        .fold(ComplexOperator::zeros(d * d), |acc, (a, b)| {
            &acc + &half_square_difference(a, b)
        });
    DivergenceOperator::new(d, op, Provenance::Discrete, None)
}

/// Divergence of a rank-one POVM `E_i = w_i |φ_i><φ_i|` with the weights
/// applied outside the square:
/// `Σ_i w_i (1/2)(|φ_i><φ_i| ⊗ 1 − 1 ⊗ |φ_i><φ_i|)²`.
///
/// Equal to [`divergence_discrete`] for projective measurements (`w_i = 1`),
/// and the Riemann sum of the continuous operator when the effects
/// discretize the isotropic POVM.
pub fn divergence_rank_one(povm: &Povm) -> Result<DivergenceOperator> {
    let d = povm.dim();
    let mut acc = ComplexOperator::zeros(d * d);
    for e in povm.effects() {
        let w = e.trace().re;
        if w <= EXACT_TOL {
            continue;
        }
        let p = e.scale(1.0 / w);
        let rank_defect = (&p * &p).max_abs_diff(&p);
        if rank_defect > NUMERIC_TOL {
            return Err(Error::Pairing(format!(
                "effect is not rank one (defect {rank_defect:e})"
            )));
        }
        acc = &acc + &half_square_difference(&p, &p).scale(w);
    }
    DivergenceOperator::new(d, acc, Provenance::Discrete, None)
}

/// Monte Carlo estimate of the isotropic divergence operator:
/// `d · mean_φ (1/2)(|φ><φ| ⊗ 1 − 1 ⊗ |φ><φ|)²` over Haar samples.
pub fn divergence_isotropic_mc(
    d: usize,
    n: usize,
    seed: u64,
    sampler: SamplerId,
    shards: usize,
) -> Result<DivergenceOperator> {
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, min: 2 });
    }
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let parts = map_blocks(n, shards, |block, range| {
        let mut rng = block_rng(seed, block);
        let mut acc = ComplexOperator::zeros(d * d);
        for _ in range {
            let e = ComplexOperator::projector(&sample_state(d, sampler, &mut rng));
            acc = &acc + &half_square_difference(&e, &e);
        }
        acc
    });
    let op = sum_in_order(parts, d * d).scale(d as f64 / n as f64);
    DivergenceOperator::new(
        d,
        op,
        Provenance::MonteCarlo,
        Some(McMeta {
            n_samples: n,
            seed,
            sampler,
            shards: shards.max(1),
        }),
    )
}

/// `(d−1)/(d+1)`, the smallest eigenvalue of the isotropic divergence operator.
pub fn lower_bound(d: usize) -> f64 {
    (d as f64 - 1.0) / (d as f64 + 1.0)
}

/// Closed form `((d−1)/(d+1)) P+ + P−`.
///
/// The symmetric subspace carries the smaller weight: symmetric joint states
/// (including `|φ>|φ>`) attain the minimum, the antisymmetric ones the maximum.
pub fn divergence_isotropic_closed(d: usize) -> Result<DivergenceOperator> {
    let op = &sym_projector(d)?.scale(lower_bound(d)) + &antisym_projector(d)?;
    DivergenceOperator::new(d, op, Provenance::ClosedForm, None)
}

/// `Tr[rho C]`; for closed-form sources the value is checked against
/// `[(d−1)/(d+1), 1]`.
pub fn mean_divergence(rho: &DensityMatrix, source: &DivergenceOperator) -> Result<f64> {
    let value = expectation(rho, source.op())?;
    if source.provenance == Provenance::ClosedForm {
        let lower = lower_bound(source.dim_local);
        if value < lower - BOUND_TOL || value > 1.0 + BOUND_TOL {
            return Err(Error::BoundViolation {
                value,
                lower,
                upper: 1.0,
            });
        }
    }
    Ok(value)
}

/// Outcome pairing `φ ↦ canonicalize(K·φ)` or, when `conjugate` is set,
/// `φ ↦ canonicalize(K·conj(φ))`, with `K` proportional to a unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Remap {
    dim: usize,
    kernel: ComplexOperator,
    conjugate: bool,
}

impl Remap {
    pub fn new(kernel: ComplexOperator, conjugate: bool) -> Result<Self> {
        let d = kernel.dim();
        let gram = &kernel.adjoint() * &kernel;
        let scale = gram.trace().re / d as f64;
        if scale.is_nan() || scale <= 0.0 {
            return Err(Error::NotProportionalToUnitary(f64::INFINITY));
        }
        let dev = gram
            .scale(1.0 / scale)
            .max_abs_diff(&ComplexOperator::identity(d));
        if dev > NUMERIC_TOL {
            return Err(Error::NotProportionalToUnitary(dev));
        }
        Ok(Self {
            dim: d,
            kernel,
            conjugate,
        })
    }

    /// `f(φ) = φ`; the remapped divergence then reduces to the isotropic one.
    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            kernel: ComplexOperator::identity(d),
            conjugate: false,
        }
    }

    /// `f(φ) = conj(φ)`, the matched remap of `Σ|ii>/√d`.
    pub fn conjugation(d: usize) -> Self {
        Self {
            dim: d,
            kernel: ComplexOperator::identity(d),
            conjugate: true,
        }
    }

    /// Qubit inversion `(α, β) ↦ (β̄, −ᾱ)`: the orthogonal state, matched to the singlet.
    pub fn inversion() -> Self {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        Self {
            dim: 2,
            kernel: ComplexOperator::from_row_slice(2, &[z, -one, one, z]).unwrap(),
            conjugate: true,
        }
    }

    /// Random kernel (Gram–Schmidt on Gaussian columns) with the given conjugation flag.
    pub fn random<R: Rng + ?Sized>(d: usize, conjugate: bool, rng: &mut R) -> Self {
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
        while cols.len() < d {
            let mut v = sample_gaussian(d, rng).amplitudes().to_vec();
            for c in &cols {
                let overlap: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= overlap * y;
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        let m = DMatrix::from_fn(d, d, |j, k| cols[k][j]);
        Self::new(ComplexOperator::from_matrix(m).unwrap(), conjugate)
            .expect("Gram-Schmidt output is unitary")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernel(&self) -> &ComplexOperator {
        &self.kernel
    }

    pub fn conjugate(&self) -> bool {
        self.conjugate
    }

    pub fn apply(&self, phi: &PureState) -> Result<PureState> {
        if self.conjugate {
            phi.conj().apply(&self.kernel)
        } else {
            phi.apply(&self.kernel)
        }
    }

    /// Image of an effect under the induced map `|φ><φ| ↦ |f(φ)><f(φ)|`,
    /// extended linearly.
    pub fn apply_effect(&self, effect: &ComplexOperator) -> ComplexOperator {
        let scale = (&self.kernel.adjoint() * &self.kernel).trace().re / self.dim as f64;
        let inner = if self.conjugate {
            effect.conj()
        } else {
            effect.clone()
        };
        (&(&self.kernel * &inner) * &self.kernel.adjoint())
            .scale(1.0 / scale)
            .hermitian_part()
    }

    pub fn apply_povm(&self, povm: &Povm) -> Result<Povm> {
        if povm.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: povm.dim(),
            });
        }
        Povm::new(povm.effects().iter().map(|e| self.apply_effect(e)).collect())
    }
}

/// Matched remap of a maximally entangled joint state `psi = Σ M_ab |a>|b>`:
/// kernel `√D·Mᵀ` with conjugation, so that `|<φ, f(φ)|psi>|² = 1/D` for every `φ`.
pub fn correlation_remap(psi: &PureState) -> Result<Remap> {
    let joint = psi.dim();
    let d = (joint as f64).sqrt().round() as usize;
    if d < 2 || d * d != joint {
        return Err(Error::InvalidDimension { dim: joint, min: 4 });
    }
    let root = (d as f64).sqrt();
    let a = psi.amplitudes();
    let m = DMatrix::from_fn(d, d, |row, col| a[row * d + col] * root);
    let singular: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    if singular
        .iter()
        .any(|s| (s - 1.0).abs() > MAX_ENTANGLED_TOL)
    {
        return Err(Error::NotMaximallyEntangled(singular));
    }
    Remap::new(ComplexOperator::from_matrix(m.transpose())?, true)
}

/// Monte Carlo mean of `(d/2) Tr[rho (E(φ) ⊗ 1 − 1 ⊗ E(f(φ)))²]` over Haar `φ`.
pub fn divergence_remapped_mc(
    rho: &DensityMatrix,
    remap: &Remap,
    n: usize,
    seed: u64,
    sampler: SamplerId,
    shards: usize,
) -> Result<f64> {
    let d = remap.dim();
    if rho.dim() != d * d {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: d * d,
        });
    }
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let parts = map_blocks(n, shards, |block, range| -> Result<f64> {
        let mut rng = block_rng(seed, block);
        let mut acc = 0.0;
        for _ in range {
            let phi = sample_state(d, sampler, &mut rng);
            let e_a = ComplexOperator::projector(&phi);
            let e_b = ComplexOperator::projector(&remap.apply(&phi)?);
            acc += expectation(rho, &half_square_difference(&e_a, &e_b))?;
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(d as f64 * total / n as f64)
}

/// Exact value of the remapped operator whose mean [`divergence_remapped_mc`]
/// estimates, from the isotropic second moment.
///
/// With `U` the normalized kernel, `(1 ⊗ U)` carries the plain remap back to
/// `f(φ) = φ`, giving `(1 ⊗ U) C (1 ⊗ U†)` with `C` the closed form. For the
/// conjugating family the cross term becomes the partial transpose of the
/// second moment, `d ∮ E ⊗ Ē = (I + d Φ+)/(d + 1)`, so the operator is
/// `(1 ⊗ U) (d/(d+1)) (I − Φ+) (1 ⊗ U†)` with `Φ+` the projector on `Σ|ii>/√d`.
pub fn remapped_reference(remap: &Remap) -> Result<ComplexOperator> {
    let d = remap.dim;
    let scale = (&remap.kernel.adjoint() * &remap.kernel).trace().re / d as f64;
    let u = remap.kernel.scale(1.0 / scale.sqrt());
    let lift = tensor(&ComplexOperator::identity(d), &u);
    let inner = if remap.conjugate {
        let phi_plus = PureState::normalized(
            (0..d * d)
                .map(|i| {
                    let v = if i / d == i % d { 1.0 } else { 0.0 };
                    Complex64::new(v, 0.0)
                })
                .collect(),
        )?;
        let id = ComplexOperator::identity(d * d);
        (&id - &ComplexOperator::projector(&phi_plus)).scale(d as f64 / (d as f64 + 1.0))
    } else {
        divergence_isotropic_closed(d)?.op
    };
    Ok((&(&lift * &inner) * &lift.adjoint()).hermitian_part())
}

/// Rank-one discretization of the isotropic POVM: `K` Haar states weighted
/// `d/K`, then congruence-corrected by `S^{-1/2}` (with `S` their sum) so the
/// effects sum to the identity exactly.
pub fn discretized_isotropic_povm(
    d: usize,
    k: usize,
    seed: u64,
    sampler: SamplerId,
    shards: usize,
) -> Result<Povm> {
    let batch = crate::haar::sample_haar(d, k, seed, sampler, shards)?;
    let weight = d as f64 / k as f64;
    let raw: Vec<ComplexOperator> = batch
        .states
        .iter()
        .map(|s| ComplexOperator::projector(s).scale(weight))
        .collect();
    let sum = raw
        .iter()
        .fold(ComplexOperator::zeros(d), |acc, e| &acc + e);
    let eig = sum.hermitian_part().into_matrix().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= EXACT_TOL) {
        return Err(Error::Numerical("discretized POVM does not span the space".into()));
    }
    let inv_sqrt = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)),
    );
    let t = ComplexOperator::from_matrix(
        &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint(),
    )?;
    Povm::new(
        raw.iter()
            .map(|e| (&(&t * e) * &t).hermitian_part())
            .collect(),
    )
}
