//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Joint spaces use the left-factor-major convention everywhere: the basis
//! vector `|j_A>|j_B>` sits at index `j_A * d_B + j_B`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for identities that hold in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for quantities that accumulate rounding over many operations.
pub const NUMERIC_TOL: f64 = 1e-10;
/// Amplitudes smaller than this are skipped when choosing the phase reference.
pub const PHASE_REFERENCE_EPS: f64 = 1e-10;

/// Square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    m: DMatrix<Complex64>,
}

impl ComplexOperator {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self { m })
    }

    /// Builds a `dim x dim` operator from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: entries.len().checked_div(dim).unwrap_or(0),
            });
        }
        Ok(Self {
            m: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// `|psi><psi|`
    pub fn projector(state: &PureState) -> Self {
        let a = state.amplitudes();
        let d = a.len();
        Self {
            m: DMatrix::from_fn(d, d, |j, k| a[j] * a[k].conj()),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            m: self.m.map(|z| z.conj()),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            m: self.m.map(|z| z * factor),
        }
    }

    /// `(M + M^dagger) / 2`, used to strip rounding asymmetry.
    pub fn hermitian_part(&self) -> Self {
        Self {
            m: (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// `max_{jk} |M[j][k] - conj(M[k][j])|`
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for k in j..d {
                worst = worst.max((self.m[(j, k)] - self.m[(k, j)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on mismatched dims");
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .hermitian_part()
            .m
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Distinct eigenvalues (ascending) with multiplicities; values closer than
    /// `tol` to the running cluster mean are merged.
    pub fn spectrum(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut clusters: Vec<(f64, usize)> = Vec::new();
        for ev in self.eigenvalues_hermitian() {
            match clusters.last_mut() {
                Some((mean, count)) if (ev - *mean).abs() <= tol => {
                    *mean = (*mean * *count as f64 + ev) / (*count as f64 + 1.0);
                    *count += 1;
                }
                _ => clusters.push((ev, 1)),
            }
        }
        clusters
    }

    /// `<psi| M |psi>`
    pub fn sandwich(&self, state: &PureState) -> Complex64 {
        let a = state.amplitudes();
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                acc += a[j].conj() * self.m[(j, k)] * a[k];
            }
        }
        acc
    }
}

impl Add for &ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: Self) -> ComplexOperator {
        ComplexOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: Self) -> ComplexOperator {
        ComplexOperator { m: &self.m - &rhs.m }
    }
}

impl Mul for &ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: Self) -> ComplexOperator {
        ComplexOperator { m: &self.m * &rhs.m }
    }
}

/// Kronecker product `a ⊗ b` (left factor major).
pub fn tensor(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    ComplexOperator {
        m: a.m.kronecker(&b.m),
    }
}

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, min: 2 });
    }
    Ok(())
}

/// SWAP on `C^d ⊗ C^d`: `|j>|k> -> |k>|j>`.
pub fn swap_operator(d: usize) -> Result<ComplexOperator> {
    require_dim(d)?;
    let mut m = DMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for k in 0..d {
            m[(k * d + j, j * d + k)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(ComplexOperator { m })
}

/// `P+ = (I + SWAP) / 2`
pub fn sym_projector(d: usize) -> Result<ComplexOperator> {
    let swap = swap_operator(d)?;
    Ok((&ComplexOperator::identity(d * d) + &swap).scale(0.5))
}

/// `P- = (I - SWAP) / 2`
pub fn antisym_projector(d: usize) -> Result<ComplexOperator> {
    let swap = swap_operator(d)?;
    Ok((&ComplexOperator::identity(d * d) - &swap).scale(0.5))
}

/// `Tr[rho * op]` for Hermitian `op`.
pub fn expectation(rho: &DensityMatrix, op: &ComplexOperator) -> Result<f64> {
    let d = rho.dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: op.dim(),
        });
    }
    let defect = op.hermiticity_defect();
    if defect > NUMERIC_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let r = rho.op().matrix();
    let o = op.matrix();
    let mut tr = Complex64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            tr += r[(j, k)] * o[(k, j)];
        }
    }
    if tr.im.abs() > NUMERIC_TOL {
        return Err(Error::Numerical(format!(
            "expectation has imaginary part {:e}",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// Normalized state vector with canonical global phase: the first amplitude
/// of modulus above [`PHASE_REFERENCE_EPS`] is real and non-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    /// Accepts amplitudes whose norm is already 1 to within [`EXACT_TOL`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        let norm = l2(&amps);
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self::canonical(amps))
    }

    /// Rescales to unit norm; fails only on the zero vector.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        let norm = l2(&amps);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self::canonical(amps.into_iter().map(|a| a / norm).collect()))
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// `sum_j |j> / sqrt(d)`
    pub fn uniform(dim: usize) -> Self {
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            amps: vec![Complex64::new(a, 0.0); dim],
        }
    }

    fn canonical(mut amps: Vec<Complex64>) -> Self {
        if let Some(reference) = amps.iter().find(|a| a.norm() > PHASE_REFERENCE_EPS) {
            let phase = reference.conj() / reference.norm();
            for a in &mut amps {
                *a *= phase;
            }
        }
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Product state `|self>|other>`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Self { amps }
    }

    /// Applies `m` and renormalizes.
    pub fn apply(&self, m: &ComplexOperator) -> Result<PureState> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: m.dim(),
                right: self.dim(),
            });
        }
        let d = self.dim();
        let out = (0..d)
            .map(|j| (0..d).map(|k| m.get(j, k) * self.amps[k]).sum())
            .collect();
        Self::normalized(out)
    }

    pub fn conj(&self) -> PureState {
        Self::canonical(self.amps.iter().map(|a| a.conj()).collect())
    }

    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn l2(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: ComplexOperator,
}

impl DensityMatrix {
    pub fn new(op: ComplexOperator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > EXACT_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > EXACT_TOL || tr.im.abs() > EXACT_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min_ev = op.eigenvalues_hermitian()[0];
        if min_ev < -NUMERIC_TOL {
            return Err(Error::NotPositive(min_ev));
        }
        Ok(Self { op })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            op: ComplexOperator::projector(state),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: ComplexOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Convex combination `sum_i w_i |psi_i><psi_i|`; weights are normalized.
    pub fn mixture(weights: &[f64], states: &[PureState]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::DimensionMismatch {
                left: weights.len(),
                right: states.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || total.is_nan() || total <= 0.0 {
            return Err(Error::Numerical("mixture weights must be non-negative with positive sum".into()));
        }
        let dim = states[0].dim();
        let mut acc = ComplexOperator::zeros(dim);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: s.dim(),
                });
            }
            acc = &acc + &ComplexOperator::projector(s).scale(w / total);
        }
        Self::new(acc)
    }

    /// `rho_a ⊗ rho_b`
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            op: tensor(&self.op, &other.op),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.op
    }
}

/// Finite POVM: positive effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexOperator>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexOperator>) -> Result<Self> {
        let first = effects.first().ok_or(Error::EmptyPovm)?;
        let dim = first.dim();
        let mut sum = ComplexOperator::zeros(dim);
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: e.dim(),
                });
            }
            let defect = e.hermiticity_defect();
            if defect > EXACT_TOL {
                return Err(Error::NotHermitian(defect));
            }
            let min_ev = e.eigenvalues_hermitian()[0];
            if min_ev < -NUMERIC_TOL {
                return Err(Error::NotPositive(min_ev));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&ComplexOperator::identity(dim));
        if dev > NUMERIC_TOL {
            return Err(Error::Incomplete(dev));
        }
        Ok(Self { dim, effects })
    }

    /// Rank-one projective measurement onto an orthonormal basis.
    pub fn from_basis(basis: &[PureState]) -> Result<Self> {
        Self::new(basis.iter().map(ComplexOperator::projector).collect())
    }

    pub fn computational(dim: usize) -> Self {
        let basis: Vec<_> = (0..dim).map(|j| PureState::basis(dim, j)).collect();
        Self::from_basis(&basis).expect("computational basis is a valid POVM")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[ComplexOperator] {
        &self.effects
    }

    /// Born-rule outcome probabilities for a pure state.
    pub fn probabilities(&self, state: &PureState) -> Vec<f64> {
        self.effects.iter().map(|e| e.sandwich(state).re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn singlet() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::from_real(&[0.0, s, -s, 0.0]).unwrap()
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexOperator::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexOperator::identity(4));

        let p0 = ComplexOperator::projector(&PureState::basis(2, 0));
        let p1 = ComplexOperator::projector(&PureState::basis(2, 1));
        let t = tensor(&p0, &p1);
        for j in 0..4 {
            for k in 0..4 {
                let want = if (j, k) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(t.get(j, k), c(want, 0.0));
            }
        }
        assert_eq!(tensor(&i2, &ComplexOperator::identity(3)).dim(), 6);
    }

    #[test]
    fn swap_d2_is_the_expected_permutation() {
        let s = swap_operator(2).unwrap();
        let mut want = ComplexOperator::zeros(4).into_matrix();
        want[(0, 0)] = c(1.0, 0.0);
        want[(3, 3)] = c(1.0, 0.0);
        want[(1, 2)] = c(1.0, 0.0);
        want[(2, 1)] = c(1.0, 0.0);
        assert_eq!(s.matrix(), &want);
    }

    #[test]
    fn swap_properties() {
        for d in 2..=5 {
            let s = swap_operator(d).unwrap();
            assert_eq!(&s * &s, ComplexOperator::identity(d * d));
            assert_eq!(s.trace(), c(d as f64, 0.0));
            assert!(s.is_hermitian(0.0));
            let e = PureState::basis(d, 0).tensor(&PureState::basis(d, d - 1));
            let swapped = e.apply(&s).unwrap();
            assert_eq!(swapped, PureState::basis(d, d - 1).tensor(&PureState::basis(d, 0)));
        }
    }

    #[test]
    fn invalid_dimension_rejected() {
        assert!(matches!(swap_operator(1), Err(Error::InvalidDimension { dim: 1, .. })));
        assert!(sym_projector(0).is_err());
        assert!(antisym_projector(1).is_err());
    }

    #[test]
    fn projector_traces() {
        assert_abs_diff_eq!(sym_projector(2).unwrap().trace().re, 3.0);
        assert_abs_diff_eq!(antisym_projector(2).unwrap().trace().re, 1.0);
        assert_abs_diff_eq!(antisym_projector(3).unwrap().trace().re, 3.0);
        let pp = sym_projector(3).unwrap();
        let pm = antisym_projector(3).unwrap();
        assert!((&pp * &pm).max_abs_diff(&ComplexOperator::zeros(9)) == 0.0);
    }

    #[test]
    fn projectors_resolve_identity_and_are_idempotent() {
        for d in 2..=6 {
            let pp = sym_projector(d).unwrap();
            let pm = antisym_projector(d).unwrap();
            let id = ComplexOperator::identity(d * d);
            assert!((&pp + &pm).max_abs_diff(&id) <= 1e-14);
            assert!((&pp * &pp).max_abs_diff(&pp) <= EXACT_TOL);
            assert!((&pm * &pm).max_abs_diff(&pm) <= EXACT_TOL);
        }
    }

    #[test]
    fn expectation_examples() {
        let rho = DensityMatrix::from_pure(&singlet());
        assert_abs_diff_eq!(
            expectation(&rho, &ComplexOperator::identity(4)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let zz = DensityMatrix::from_pure(&PureState::basis(4, 0));
        assert_eq!(expectation(&zz, &antisym_projector(2).unwrap()).unwrap(), 0.0);
        assert_abs_diff_eq!(
            expectation(&rho, &antisym_projector(2).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn expectation_errors() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            expectation(&rho, &ComplexOperator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let skew = ComplexOperator::from_row_slice(2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(expectation(&rho, &skew), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn pure_state_canonical_phase() {
        let s = PureState::new(vec![c(0.0, 0.0), c(0.0, -0.6), c(0.8, 0.0)]).unwrap();
        assert_eq!(s.amplitudes()[1], c(0.6, 0.0));
        assert_abs_diff_eq!(s.amplitudes()[2].im, 0.8, epsilon = 1e-15);
        assert!(matches!(
            PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::NotNormalized(_))
        ));
        assert!(PureState::normalized(vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = ComplexOperator::identity(2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidTrace(_))));
        let not_psd = ComplexOperator::from_row_slice(2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]).unwrap();
        assert!(matches!(DensityMatrix::new(not_psd), Err(Error::NotPositive(_))));
        let mix = DensityMatrix::mixture(&[1.0, 3.0], &[PureState::basis(2, 0), PureState::uniform(2)]).unwrap();
        assert_abs_diff_eq!(mix.op().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn povm_validation() {
        let half = ComplexOperator::identity(2).scale(0.5);
        assert!(Povm::new(vec![half.clone(), half.clone()]).is_ok());
        assert!(matches!(Povm::new(vec![half]), Err(Error::Incomplete(_))));
        assert!(matches!(Povm::new(vec![]), Err(Error::EmptyPovm)));
        let p = Povm::computational(3);
        assert_eq!(p.len(), 3);
        assert_eq!(p.probabilities(&PureState::basis(3, 2)), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn spectrum_clusters_multiplicities() {
        let spec = swap_operator(3).unwrap().spectrum(1e-9);
        assert_eq!(spec.len(), 2);
        assert_abs_diff_eq!(spec[0].0, -1.0, epsilon = 1e-12);
        assert_eq!(spec[0].1, 3);
        assert_abs_diff_eq!(spec[1].0, 1.0, epsilon = 1e-12);
        assert_eq!(spec[1].1, 6);
    }
}
