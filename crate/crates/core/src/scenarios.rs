//! Canonical joint states and the worked scenarios: the singlet at a
//! polarizing beamsplitter, product-state factorization, pure-state random
//! bits and the adversarial prediction game.
//!
//! Labels: polarization `H -> 0`, `V -> 1`; beamsplitter outcome `transmit -> 0`
//! (projection on `|+45°>`), `reflect -> 1` (projection on `|−45°>`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divergence::Remap;
use crate::error::{Error, Result};
use crate::haar::{sample_state, SamplerId};
use crate::hilbert::{
    antisym_projector, expectation, sym_projector, tensor, ComplexOperator, DensityMatrix, Povm,
    PureState, EXACT_TOL, NUMERIC_TOL,
};
use crate::shard::{block_rng, map_blocks};
use rand::Rng;

/// Joint probabilities at or below this are treated as exactly zero before sampling.
pub const ZERO_PROBABILITY_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum JointKind {
    BellPhiPlus,
    BellPhiMinus,
    BellPsiPlus,
    BellPsiMinus,
    Product(PureState, PureState),
    /// `Σ_ab U_ab |a>|b> / √D` for unitary `U`.
    MaxEntangled(ComplexOperator),
    Custom(DensityMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointStateSpec {
    pub kind: JointKind,
    pub dim_local: usize,
}

fn bell(a: f64, b: f64, c: f64, d: f64) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_real(&[a * s, b * s, c * s, d * s]).expect("Bell states are normalized")
}

pub fn phi_plus() -> PureState {
    bell(1.0, 0.0, 0.0, 1.0)
}

pub fn phi_minus() -> PureState {
    bell(1.0, 0.0, 0.0, -1.0)
}

pub fn psi_plus() -> PureState {
    bell(0.0, 1.0, 1.0, 0.0)
}

/// `(|HV> − |VH>)/√2`
pub fn singlet() -> PureState {
    bell(0.0, 1.0, -1.0, 0.0)
}

/// `|±45°> = (|H> ± |V>)/√2`
pub fn diagonal(plus: bool) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_real(&[s, if plus { s } else { -s }]).unwrap()
}

/// Projective measurement `{|+45°><+45°|, |−45°><−45°|}` (transmit, reflect).
pub fn diagonal_povm() -> Povm {
    Povm::from_basis(&[diagonal(true), diagonal(false)]).expect("diagonal basis is orthonormal")
}

impl JointStateSpec {
    pub fn new(kind: JointKind, dim_local: usize) -> Self {
        Self { kind, dim_local }
    }

    /// The joint pure state, when the spec describes one.
    pub fn pure_state(&self) -> Result<Option<PureState>> {
        let d = self.dim_local;
        let bell_guard = || {
            if d == 2 {
                Ok(())
            } else {
                Err(Error::BellDimension(d))
            }
        };
        Ok(Some(match &self.kind {
            JointKind::BellPhiPlus => {
                bell_guard()?;
                phi_plus()
            }
            JointKind::BellPhiMinus => {
                bell_guard()?;
                phi_minus()
            }
            JointKind::BellPsiPlus => {
                bell_guard()?;
                psi_plus()
            }
            JointKind::BellPsiMinus => {
                bell_guard()?;
                singlet()
            }
            JointKind::Product(a, b) => {
                for s in [a, b] {
                    if s.dim() != d {
                        return Err(Error::DimensionMismatch {
                            left: d,
                            right: s.dim(),
                        });
                    }
                }
                a.tensor(b)
            }
            JointKind::MaxEntangled(u) => {
                if u.dim() != d {
                    return Err(Error::DimensionMismatch {
                        left: d,
                        right: u.dim(),
                    });
                }
                let unitary = Remap::new(u.clone(), false)?;
                let amps = (0..d * d)
                    .map(|i| unitary.kernel().get(i / d, i % d))
                    .collect();
                PureState::normalized(amps)?
            }
            JointKind::Custom(_) => return Ok(None),
        }))
    }

    pub fn resolve(&self) -> Result<DensityMatrix> {
        let d = self.dim_local;
        if d < 2 {
            return Err(Error::InvalidDimension { dim: d, min: 2 });
        }
        match (&self.kind, self.pure_state()?) {
            (JointKind::Custom(rho), _) => {
                if rho.dim() != d * d {
                    return Err(Error::DimensionMismatch {
                        left: d * d,
                        right: rho.dim(),
                    });
                }
                Ok(rho.clone())
            }
            (_, Some(psi)) => DensityMatrix::new(ComplexOperator::projector(&psi)),
            (_, None) => unreachable!("only custom specs lack a pure state"),
        }
    }
}

/// Joint states addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedState {
    #[serde(rename = "bell_phi_plus")]
    BellPhiPlus,
    #[serde(rename = "bell_phi_minus")]
    BellPhiMinus,
    #[serde(rename = "bell_psi_plus")]
    BellPsiPlus,
    #[serde(rename = "bell_psi_minus")]
    BellPsiMinus,
    /// `|u>|u>` with `u` the uniform superposition.
    #[serde(rename = "product-identical")]
    ProductIdentical,
    /// `|0>|0>`
    #[serde(rename = "product-basis")]
    ProductBasis,
    /// `Σ|ii>/√D`
    #[serde(rename = "max-entangled")]
    MaxEntangled,
    #[serde(rename = "maximally-mixed")]
    MaximallyMixed,
}

impl NamedState {
    pub const ALL: [NamedState; 8] = [
        NamedState::BellPhiPlus,
        NamedState::BellPhiMinus,
        NamedState::BellPsiPlus,
        NamedState::BellPsiMinus,
        NamedState::ProductIdentical,
        NamedState::ProductBasis,
        NamedState::MaxEntangled,
        NamedState::MaximallyMixed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NamedState::BellPhiPlus => "bell_phi_plus",
            NamedState::BellPhiMinus => "bell_phi_minus",
            NamedState::BellPsiPlus => "bell_psi_plus",
            NamedState::BellPsiMinus => "bell_psi_minus",
            NamedState::ProductIdentical => "product-identical",
            NamedState::ProductBasis => "product-basis",
            NamedState::MaxEntangled => "max-entangled",
            NamedState::MaximallyMixed => "maximally-mixed",
        }
    }

    pub fn spec(&self, dim_local: usize) -> JointStateSpec {
        let d = dim_local;
        let kind = match self {
            NamedState::BellPhiPlus => JointKind::BellPhiPlus,
            NamedState::BellPhiMinus => JointKind::BellPhiMinus,
            NamedState::BellPsiPlus => JointKind::BellPsiPlus,
            NamedState::BellPsiMinus => JointKind::BellPsiMinus,
            NamedState::ProductIdentical => {
                JointKind::Product(PureState::uniform(d), PureState::uniform(d))
            }
            NamedState::ProductBasis => {
                JointKind::Product(PureState::basis(d, 0), PureState::basis(d, 0))
            }
            NamedState::MaxEntangled => JointKind::MaxEntangled(ComplexOperator::identity(d)),
            NamedState::MaximallyMixed => {
                JointKind::Custom(DensityMatrix::maximally_mixed(d * d))
            }
        };
        JointStateSpec::new(kind, d)
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedState {
    type Err = String;

    /// Names match with `-` and `_` treated as the same character.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key = s.replace('-', "_");
        NamedState::ALL
            .iter()
            .find(|n| n.as_str().replace('-', "_") == key)
            .copied()
            .ok_or_else(|| {
                let names: Vec<_> = NamedState::ALL.iter().map(|n| n.as_str()).collect();
                format!("unknown state '{s}' (expected one of {})", names.join("|"))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellBasisReport {
    pub sym_deviation: f64,
    pub antisym_deviation: f64,
    pub max_idempotence_defect: f64,
    pub sym_trace: f64,
    pub passed: bool,
}

/// Checks `P+ = Φ+ + Φ− + Ψ+` and `P− = Ψ−` (as projectors) for two qubits.
pub fn bell_basis_check() -> BellBasisReport {
    let projectors: Vec<ComplexOperator> = [phi_plus(), phi_minus(), psi_plus(), singlet()]
        .iter()
        .map(ComplexOperator::projector)
        .collect();
    let sym_sum = &(&projectors[0] + &projectors[1]) + &projectors[2];
    let sym = sym_projector(2).expect("d = 2");
    let antisym = antisym_projector(2).expect("d = 2");
    let sym_deviation = sym_sum.max_abs_diff(&sym);
    let antisym_deviation = projectors[3].max_abs_diff(&antisym);
    let max_idempotence_defect = projectors
        .iter()
        .map(|p| (p * p).max_abs_diff(p))
        .fold(0.0, f64::max);
    let sym_trace = sym_sum.trace().re;
    let passed = sym_deviation <= EXACT_TOL
        && antisym_deviation <= EXACT_TOL
        && max_idempotence_defect <= EXACT_TOL
        && (sym_trace - 3.0).abs() <= EXACT_TOL;
    BellBasisReport {
        sym_deviation,
        antisym_deviation,
        max_idempotence_defect,
        sym_trace,
        passed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub outcome_a: usize,
    pub outcome_b: usize,
}

/// `P(i, j) = Tr[(A_i ⊗ B_j) rho]`, validated to sum to 1.
pub fn joint_probabilities(rho: &DensityMatrix, povm_a: &Povm, povm_b: &Povm) -> Result<Vec<Vec<f64>>> {
    if rho.dim() != povm_a.dim() * povm_b.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: povm_a.dim() * povm_b.dim(),
        });
    }
    let mut probs = Vec::with_capacity(povm_a.len());
    let mut total = 0.0;
    for a in povm_a.effects() {
        let mut row = Vec::with_capacity(povm_b.len());
        for b in povm_b.effects() {
            let p = expectation(rho, &tensor(a, b))?;
            if p < -NUMERIC_TOL {
                return Err(Error::Numerical(format!("negative probability {p:e}")));
            }
            total += p;
            row.push(if p <= ZERO_PROBABILITY_CUTOFF { 0.0 } else { p });
        }
        probs.push(row);
    }
    if (total - 1.0).abs() > NUMERIC_TOL {
        return Err(Error::Numerical(format!(
            "joint probabilities sum to {total}"
        )));
    }
    Ok(probs)
}

/// Inverse-CDF sampler over a finite distribution; cells of probability
/// exactly zero are never returned.
#[derive(Clone, Debug)]
struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let mut prev = 0.0;
        let mut last_nonzero = 0;
        for (i, &c) in self.cumulative.iter().enumerate() {
            if c > prev {
                last_nonzero = i;
                if c > u {
                    return i;
                }
            }
            prev = c;
        }
        last_nonzero
    }
}

/// Samples `n` joint outcomes from the Born-rule distribution.
pub fn measure_joint(
    rho: &DensityMatrix,
    povm_a: &Povm,
    povm_b: &Povm,
    n: usize,
    seed: u64,
    shards: usize,
) -> Result<Vec<TrialRecord>> {
    let probs = joint_probabilities(rho, povm_a, povm_b)?;
    let cols = povm_b.len();
    let flat: Vec<f64> = probs.concat();
    let dist = Categorical::new(&flat);
    Ok(map_blocks(n, shards, |block, range| {
        let mut rng = block_rng(seed, block);
        range
            .map(|trial| {
                let cell = dist.sample(&mut rng);
                TrialRecord {
                    trial,
                    outcome_a: cell / cols,
                    outcome_b: cell % cols,
                }
            })
            .collect::<Vec<_>>()
    })
    .concat())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamsplitterReport {
    pub trials: usize,
    pub same_outcome_count: usize,
    pub different_outcome_count: usize,
    /// Fraction of trials where photon A was reflected.
    pub marginal_a_reflect: f64,
    pub marginal_b_reflect: f64,
    pub anticorrelated_every_trial: bool,
}

/// Singlet pair sent through identically oriented ±45° polarizing beamsplitters.
pub fn singlet_beamsplitter(n: usize, seed: u64, shards: usize) -> Result<BeamsplitterReport> {
    let rho = DensityMatrix::from_pure(&singlet());
    let povm = diagonal_povm();
    let records = measure_joint(&rho, &povm, &povm, n, seed, shards)?;
    Ok(summarize_pairs(&records))
}

fn summarize_pairs(records: &[TrialRecord]) -> BeamsplitterReport {
    let trials = records.len();
    let same = records.iter().filter(|r| r.outcome_a == r.outcome_b).count();
    let a1 = records.iter().filter(|r| r.outcome_a == 1).count();
    let b1 = records.iter().filter(|r| r.outcome_b == 1).count();
    BeamsplitterReport {
        trials,
        same_outcome_count: same,
        different_outcome_count: trials - same,
        marginal_a_reflect: a1 as f64 / trials.max(1) as f64,
        marginal_b_reflect: b1 as f64 / trials.max(1) as f64,
        anticorrelated_every_trial: records.iter().all(|r| r.outcome_b == 1 - r.outcome_a.min(1)),
    }
}

/// `|P_AB(φ, f(φ)) − P_A(φ) P_B(f(φ))|` for a joint state, with the marginal
/// probabilities computed from the local effects `E ⊗ 1` and `1 ⊗ F`.
pub fn factorization_deviations(
    rho_ab: &DensityMatrix,
    remap: &Remap,
    phis: &[PureState],
) -> Result<Vec<f64>> {
    let d = remap.dim();
    if rho_ab.dim() != d * d {
        return Err(Error::DimensionMismatch {
            left: rho_ab.dim(),
            right: d * d,
        });
    }
    let id = ComplexOperator::identity(d);
    phis.iter()
        .map(|phi| {
            let e = ComplexOperator::projector(phi);
            let f = ComplexOperator::projector(&remap.apply(phi)?);
            let p_ab = expectation(rho_ab, &tensor(&e, &f))?;
            let p_a = expectation(rho_ab, &tensor(&e, &id))?;
            let p_b = expectation(rho_ab, &tensor(&id, &f))?;
            Ok((p_ab - p_a * p_b).abs())
        })
        .collect()
}

fn haar_states(d: usize, n: usize, seed: u64) -> Vec<PureState> {
    map_blocks(n, 1, |block, range| {
        let mut rng = block_rng(seed, block);
        range
            .map(|_| sample_state(d, SamplerId::Gaussian, &mut rng))
            .collect::<Vec<_>>()
    })
    .concat()
}

/// Largest violation of `P_AB(φ, f(φ)) = P_A(φ) P_B(f(φ))` for
/// `rho = rho_a ⊗ rho_b` over `n_states` Haar-random `φ`. Probabilities are
/// exact Born-rule values; only the test states are random.
pub fn factorization_check(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    remap: &Remap,
    n_states: usize,
    seed: u64,
) -> Result<f64> {
    let d = remap.dim();
    for r in [rho_a, rho_b] {
        if r.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: r.dim(),
            });
        }
    }
    if n_states == 0 {
        return Err(Error::EmptyBatch);
    }
    let joint = rho_a.tensor(rho_b);
    let mut worst = 0.0f64;
    for phi in haar_states(d, n_states, seed) {
        let e = ComplexOperator::projector(&phi);
        let f = ComplexOperator::projector(&remap.apply(&phi)?);
        let p_ab = expectation(&joint, &tensor(&e, &f))?;
        let p_a = expectation(rho_a, &e)?;
        let p_b = expectation(rho_b, &f)?;
        worst = worst.max((p_ab - p_a * p_b).abs());
    }
    Ok(worst)
}

/// Variant of [`factorization_check`] for an arbitrary joint state.
pub fn factorization_check_joint(
    rho_ab: &DensityMatrix,
    remap: &Remap,
    n_states: usize,
    seed: u64,
) -> Result<f64> {
    if n_states == 0 {
        return Err(Error::EmptyBatch);
    }
    let phis = haar_states(remap.dim(), n_states, seed);
    Ok(factorization_deviations(rho_ab, remap, &phis)?
        .into_iter()
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QrngOutput {
    pub bits: Vec<u8>,
    pub ones_frequency: f64,
    pub longest_run: usize,
    /// Born-rule probability of outcome 1.
    pub p_one: f64,
}

impl QrngOutput {
    /// Bits packed most-significant first; the last byte is zero-padded.
    pub fn hex(&self) -> String {
        self.bits
            .chunks(8)
            .map(|chunk| {
                let byte = chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)));
                format!("{byte:02x}")
            })
            .collect()
    }
}

pub fn longest_run(bits: &[u8]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for &b in bits {
        run = if prev == Some(b) { run + 1 } else { 1 };
        prev = Some(b);
        best = best.max(run);
    }
    best
}

/// `n` bits from Born-rule measurement of a pure state with a two-outcome POVM.
pub fn qrng_generate(
    state: &PureState,
    povm: &Povm,
    n: usize,
    seed: u64,
    shards: usize,
) -> Result<QrngOutput> {
    if povm.len() != 2 {
        return Err(Error::UnsupportedOutcomeCount {
            got: povm.len(),
            expected: 2,
        });
    }
    if povm.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            left: povm.dim(),
            right: state.dim(),
        });
    }
    let probs: Vec<f64> = povm
        .probabilities(state)
        .into_iter()
        .map(|p| if p <= ZERO_PROBABILITY_CUTOFF { 0.0 } else { p })
        .collect();
    let dist = Categorical::new(&probs);
    let bits: Vec<u8> = map_blocks(n, shards, |block, range| {
        let mut rng = block_rng(seed, block);
        range.map(|_| dist.sample(&mut rng) as u8).collect::<Vec<_>>()
    })
    .concat();
    let ones = bits.iter().filter(|&&b| b == 1).count();
    Ok(QrngOutput {
        ones_frequency: ones as f64 / n.max(1) as f64,
        longest_run: longest_run(&bits),
        p_one: probs[1] / (probs[0] + probs[1]),
        bits,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionOutcome {
    pub trials: usize,
    pub correct: usize,
    pub success_rate: f64,
    /// `Σ_i P(A = i, B = i)` under the adversary's strategy.
    pub exact_success_probability: f64,
}

/// Adversary holding B measures it in the remapped basis `{f(e_0), f(e_1)}`
/// (or the unmapped POVM when `remap` is `None`) and announces the outcome
/// paired with its result as the prediction for A.
pub fn prediction_game(
    spec: &JointStateSpec,
    remap: Option<&Remap>,
    povm: &Povm,
    n: usize,
    seed: u64,
    shards: usize,
) -> Result<PredictionOutcome> {
    if povm.len() != 2 {
        return Err(Error::UnsupportedOutcomeCount {
            got: povm.len(),
            expected: 2,
        });
    }
    if spec.dim_local != 2 || povm.dim() != 2 {
        return Err(Error::InvalidDimension {
            dim: spec.dim_local.max(povm.dim()),
            min: 2,
        });
    }
    let rho = spec.resolve()?;
    let povm_b = match remap {
        Some(r) => r.apply_povm(povm)?,
        None => povm.clone(),
    };
    let probs = joint_probabilities(&rho, povm, &povm_b)?;
    let exact: f64 = (0..2).map(|i| probs[i][i]).sum();
    let records = measure_joint(&rho, povm, &povm_b, n, seed, shards)?;
    let correct = records
        .iter()
        .filter(|r| r.outcome_a == r.outcome_b)
        .count();
    Ok(PredictionOutcome {
        trials: n,
        correct,
        success_rate: correct as f64 / n.max(1) as f64,
        exact_success_probability: exact,
    })
}

/// Helper for building qubit states from polarization labels.
pub fn polarization(label: &str) -> Option<PureState> {
    match label {
        "h" | "H" => Some(PureState::basis(2, 0)),
        "v" | "V" => Some(PureState::basis(2, 1)),
        "plus45" | "+45" => Some(diagonal(true)),
        "minus45" | "-45" => Some(diagonal(false)),
        "right" | "R" => Some(
            PureState::normalized(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap(),
        ),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn resolve_examples() {
        let s = NamedState::BellPsiMinus.spec(2).pure_state().unwrap().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = PureState::from_real(&[0.0, h, -h, 0.0]).unwrap();
        assert_eq!(s, want);

        let zz = JointStateSpec::new(
            JointKind::Product(PureState::basis(2, 0), PureState::basis(2, 0)),
            2,
        )
        .resolve()
        .unwrap();
        assert_eq!(zz, DensityMatrix::from_pure(&PureState::basis(4, 0)));

        let me = NamedState::MaxEntangled.spec(2).resolve().unwrap();
        assert!(me.op().max_abs_diff(&ComplexOperator::projector(&phi_plus())) < 1e-15);
    }

    #[test]
    fn bell_kind_requires_qubits() {
        assert!(matches!(
            NamedState::BellPhiPlus.spec(3).resolve(),
            Err(Error::BellDimension(3))
        ));
    }

    #[test]
    fn every_named_state_resolves() {
        for name in NamedState::ALL {
            let dims: &[usize] = if name.as_str().starts_with("bell") { &[2] } else { &[2, 3, 4] };
            for &d in dims {
                let rho = name.spec(d).resolve().unwrap();
                assert!(DensityMatrix::new(rho.op().clone()).is_ok());
            }
        }
    }

    #[test]
    fn named_state_parse() {
        assert_eq!("bell_psi_minus".parse::<NamedState>().unwrap(), NamedState::BellPsiMinus);
        assert_eq!("bell-psi-minus".parse::<NamedState>().unwrap(), NamedState::BellPsiMinus);
        assert_eq!("product_identical".parse::<NamedState>().unwrap(), NamedState::ProductIdentical);
        assert!("singlet!".parse::<NamedState>().is_err());
        for n in NamedState::ALL {
            assert_eq!(n.as_str().parse::<NamedState>().unwrap(), n);
        }
    }

    #[test]
    fn bell_basis() {
        let r = bell_basis_check();
        assert!(r.passed, "{r:?}");
        assert_abs_diff_eq!(r.sym_trace, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn measure_joint_deterministic_outcome() {
        let rho = DensityMatrix::from_pure(&PureState::basis(4, 0));
        let p = Povm::computational(2);
        let recs = measure_joint(&rho, &p, &p, 500, 3, 2).unwrap();
        assert!(recs.iter().all(|r| r.outcome_a == 0 && r.outcome_b == 0));
        assert_eq!(recs[499].trial, 499);
    }

    #[test]
    fn measure_joint_rejects_bad_dims() {
        let rho = DensityMatrix::maximally_mixed(4);
        let p3 = Povm::computational(3);
        assert!(measure_joint(&rho, &p3, &p3, 1, 0, 1).is_err());
    }

    #[test]
    fn singlet_never_same() {
        for seed in 0..5 {
            let r = singlet_beamsplitter(2000, seed, 1).unwrap();
            assert_eq!(r.same_outcome_count, 0);
            assert!(r.anticorrelated_every_trial);
        }
    }

    #[test]
    fn singlet_factorization_control() {
        // φ = |0>, f = inversion -> |1>; P_AB = 1/2, P_A P_B = 1/4
        let rho = DensityMatrix::from_pure(&singlet());
        let dev = factorization_deviations(&rho, &Remap::inversion(), &[PureState::basis(2, 0)]).unwrap();
        assert_abs_diff_eq!(dev[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn product_factorizes() {
        let a = DensityMatrix::from_pure(&diagonal(true));
        let b = DensityMatrix::maximally_mixed(2);
        let dev = factorization_check(&a, &b, &Remap::inversion(), 200, 1).unwrap();
        assert!(dev <= 1e-10);
    }

    #[test]
    fn qrng_examples() {
        let hv = Povm::computational(2);
        let zero = qrng_generate(&polarization("h").unwrap(), &hv, 1000, 4, 1).unwrap();
        assert!(zero.bits.iter().all(|&b| b == 0));
        assert_eq!(zero.longest_run, 1000);
        let a = qrng_generate(&diagonal(true), &hv, 10_000, 4, 1).unwrap();
        let b = qrng_generate(&diagonal(true), &hv, 10_000, 4, 3).unwrap();
        assert_eq!(a.bits, b.bits);
        assert!((a.ones_frequency - 0.5).abs() <= 0.015);
        assert!(matches!(
            qrng_generate(&PureState::basis(3, 0), &Povm::computational(3), 10, 0, 1),
            Err(Error::UnsupportedOutcomeCount { got: 3, .. })
        ));
    }

    #[test]
    fn hex_packing_and_runs() {
        let out = QrngOutput {
            bits: vec![1, 0, 1, 1, 0, 0, 0, 0, 1],
            ones_frequency: 0.0,
            longest_run: 0,
            p_one: 0.5,
        };
        assert_eq!(out.hex(), "b080");
        assert_eq!(longest_run(&out.bits), 4);
        assert_eq!(longest_run(&[]), 0);
    }

    #[test]
    fn prediction_examples() {
        let hv = Povm::computational(2);
        let singlet_spec = NamedState::BellPsiMinus.spec(2);
        let r = prediction_game(&singlet_spec, Some(&Remap::inversion()), &hv, 5000, 2, 1).unwrap();
        assert_eq!(r.success_rate, 1.0);
        assert_abs_diff_eq!(r.exact_success_probability, 1.0, epsilon = 1e-12);

        let basis = NamedState::ProductBasis.spec(2);
        let r = prediction_game(&basis, None, &hv, 1000, 2, 1).unwrap();
        assert_eq!(r.success_rate, 1.0);

        let three = Povm::computational(3);
        assert!(prediction_game(&NamedState::ProductBasis.spec(3), None, &three, 10, 0, 1).is_err());
    }
}
