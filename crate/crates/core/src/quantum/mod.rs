//! Finite-dimensional quantum states, POVMs and observables in double
//! precision, plus the bridge into the exact engine.
//!
//! Nothing here is exact. Probabilities leave this module only through
//! [`rationalize`] or [`psi_complete_model`], which fix a maximum denominator.

mod models;
mod rationalize;

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::ontomodel::OntoError;
use crate::probcore::{Label, ProbError};

pub use models::{
    chsh_angles, chsh_measurements, hardy_measurements, hardy_state, observable_epistemicity, psi_complete_model,
    quantum_empirical_model, remote_state, schmidt_coefficients, steering_demo, Basis, Epistemicity, SteeringBranch,
};
pub use rationalize::{rationalize, DEFAULT_MAX_DENOMINATOR};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Numerical thresholds shared by every validation in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity, positivity, POVM completeness, eigen reconstruction.
    pub structure: f64,
    /// Norms, traces and probability sums.
    pub normalization: f64,
    /// Eigenvalues closer than this are one eigenspace.
    pub eigen_tie: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structure: 1e-10,
            normalization: 1e-12,
            eigen_tie: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot tensor a {0} with a {1}")]
    KindMismatch(&'static str, &'static str),
    #[error("norm or trace off by {0:e}")]
    NotNormalized(f64),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("effects sum to identity only within {0:e}")]
    Incomplete(f64),
    #[error("POVM has no effects")]
    EmptyPovm,
    #[error("outcome {0} listed twice")]
    DuplicateOutcome(String),
    #[error("eigen-decomposition does not reconstruct the matrix (deviation {0:e})")]
    Reconstruction(f64),
    #[error("not a distribution: {0}")]
    NotADistribution(String),
    #[error("outcome label {label:?} is not an event of context {context}")]
    BadOutcomeLabel { label: String, context: String },
    #[error("rationalized response for ({state}, {context}) cannot keep its marginals")]
    RationalizationFailed { state: String, context: String },
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Onto(#[from] OntoError),
}

type Result<T> = std::result::Result<T, QuantumError>;

fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn check_hermitian(m: &CMatrix, tol: &Tolerances) -> Result<()> {
    if !m.is_square() {
        return Err(QuantumError::NotSquare);
    }
    let dev = hermiticity_error(m);
    if dev > tol.structure {
        return Err(QuantumError::NotHermitian(dev));
    }
    Ok(())
}

/// Smallest eigenvalue of a Hermitian matrix.
fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * c(0.5);
    h.symmetric_eigenvalues().min()
}

fn check_psd(m: &CMatrix, tol: &Tolerances) -> Result<()> {
    check_hermitian(m, tol)?;
    let min = min_eigenvalue(m);
    if min < -tol.structure {
        return Err(QuantumError::NotPositive(min));
    }
    Ok(())
}

/// Pure state with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: CVector,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::new_with(amps, &Tolerances::default())
    }

    pub fn new_with(amps: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        let amps = CVector::from_vec(amps);
        let dev = (amps.norm() - 1.0).abs();
        if amps.is_empty() || dev > tol.normalization {
            return Err(QuantumError::NotNormalized(dev));
        }
        Ok(Ket { amps })
    }

    /// Scales a nonzero vector to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let v = CVector::from_vec(amps);
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(QuantumError::NotNormalized(1.0));
        }
        Ok(Ket { amps: v.unscale(n) })
    }

    pub fn real(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&a| c(a)).collect())
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[i] = c(1.0);
        Ket { amps: v }
    }

    pub fn zero() -> Self {
        Self::basis(2, 0)
    }

    pub fn one() -> Self {
        Self::basis(2, 1)
    }

    pub fn plus() -> Self {
        Self::real(&[1.0, 1.0]).expect("nonzero")
    }

    pub fn minus() -> Self {
        Self::real(&[1.0, -1.0]).expect("nonzero")
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        Self::real(&[1.0, 0.0, 0.0, 1.0]).expect("nonzero")
    }

    /// `cos(θ/2)|0⟩ + sin(θ/2)|1⟩`, a point on the XZ great circle.
    pub fn xz(theta: f64) -> Self {
        Ket {
            amps: CVector::from_vec(vec![c((theta / 2.0).cos()), c((theta / 2.0).sin())]),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn fidelity(&self, other: &Ket) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { m: self.projector() }
    }
}

/// Amplitudes as `[re, im]` pairs.
impl serde::Serialize for Ket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.amps.iter().map(|z| [z.re, z.im]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::new_with(m, &Tolerances::default())
    }

    pub fn new_with(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_psd(&m, tol)?;
        let dev = (m.trace() - c(1.0)).norm();
        if dev > tol.normalization {
            return Err(QuantumError::NotNormalized(dev));
        }
        Ok(DensityMatrix { m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            m: CMatrix::identity(dim, dim) * c(1.0 / dim as f64),
        }
    }

    /// Convex combination; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or(QuantumError::NotNormalized(1.0))?;
        let d = first.1.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(QuantumError::DimensionMismatch {
                    expected: d,
                    found: rho.dim(),
                });
            }
            m += &rho.m * c(*w);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Largest entry-wise deviation.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(&self.m - &other.m))
    }
}

/// Labelled effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<(Label, CMatrix)>,
}

impl Povm {
    pub fn new(effects: Vec<(Label, CMatrix)>) -> Result<Self> {
        Self::new_with(effects, &Tolerances::default())
    }

    pub fn new_with(effects: Vec<(Label, CMatrix)>, tol: &Tolerances) -> Result<Self> {
        let d = effects.first().ok_or(QuantumError::EmptyPovm)?.1.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (i, (label, e)) in effects.iter().enumerate() {
            if effects[..i].iter().any(|(l, _)| l == label) {
                return Err(QuantumError::DuplicateOutcome(label.clone()));
            }
            if e.nrows() != d || e.ncols() != d {
                return Err(QuantumError::DimensionMismatch {
                    expected: d,
                    found: e.nrows(),
                });
            }
            check_psd(e, tol)?;
            sum += e;
        }
        let dev = max_abs(&(sum - CMatrix::identity(d, d)));
        if dev > tol.structure {
            return Err(QuantumError::Incomplete(dev));
        }
        Ok(Povm { effects })
    }

    /// Projective measurement onto the given orthonormal basis.
    pub fn projective(basis: Vec<(Label, Ket)>) -> Result<Self> {
        Self::new(basis.into_iter().map(|(l, k)| (l, k.projector())).collect())
    }

    /// Qubit measurement along angle `θ` in the XZ plane, outcomes
    /// `{m}=0` and `{m}=1`.
    pub fn xz(m: &str, theta: f64) -> Self {
        let minus = Ket {
            amps: CVector::from_vec(vec![c(-(theta / 2.0).sin()), c((theta / 2.0).cos())]),
        };
        Self::projective(vec![(format!("{m}=0"), Ket::xz(theta)), (format!("{m}=1"), minus)])
            .expect("orthonormal basis")
    }

    pub fn z(m: &str) -> Self {
        Self::xz(m, 0.0)
    }

    pub fn x(m: &str) -> Self {
        Self::xz(m, std::f64::consts::FRAC_PI_2)
    }

    pub fn dim(&self) -> usize {
        self.effects[0].1.nrows()
    }

    pub fn effects(&self) -> &[(Label, CMatrix)] {
        &self.effects
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> + '_ {
        self.effects.iter().map(|(l, _)| l)
    }
}

/// Hermitian matrix with its spectral decomposition, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    spectrum: Vec<(f64, CMatrix)>,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::default())
    }

    pub fn new_with(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_hermitian(&matrix, tol)?;
        let h = (&matrix + matrix.adjoint()) * c(0.5);
        let eig = h.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let d = matrix.nrows();
        let mut spectrum: Vec<(f64, CMatrix, usize)> = Vec::new();
        for i in order {
            let val = eig.eigenvalues[i];
            let v = eig.eigenvectors.column(i);
            let proj = v * v.adjoint();
            match spectrum.last_mut() {
                Some((head, p, n)) if (*head - val).abs() <= tol.eigen_tie => {
                    *p += proj;
                    *n += 1;
                }
                _ => spectrum.push((val, proj, 1)),
            }
        }
        let mut rebuilt = CMatrix::zeros(d, d);
        for (v, p, _) in &spectrum {
            rebuilt += p * c(*v);
        }
        let dev = max_abs(&(&rebuilt - &matrix));
        if dev > tol.structure {
            return Err(QuantumError::Reconstruction(dev));
        }
        Ok(Observable {
            matrix,
            spectrum: spectrum.into_iter().map(|(v, p, _)| (v, p)).collect(),
        })
    }

    pub fn pauli_z() -> Self {
        Self::new(CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(-1.0)]))).expect("Hermitian")
    }

    pub fn pauli_x() -> Self {
        Self::new(CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])).expect("Hermitian")
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(CMatrix::identity(dim, dim)).expect("Hermitian")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `(eigenvalue, projector)` pairs, one per distinct eigenvalue.
    pub fn spectrum(&self) -> &[(f64, CMatrix)] {
        &self.spectrum
    }
}

/// Outcome probabilities `tr(ρ E_o)`, with negative rounding noise clipped
/// and the result renormalized.
pub fn born(rho: &DensityMatrix, m: &Povm) -> Result<Vec<(Label, f64)>> {
    if rho.dim() != m.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: rho.dim(),
            found: m.dim(),
        });
    }
    let raw: Vec<(Label, f64)> = m
        .effects
        .iter()
        .map(|(l, e)| (l.clone(), (&rho.m * e).trace().re.max(0.0)))
        .collect();
    let total: f64 = raw.iter().map(|(_, p)| p).sum();
    Ok(raw.into_iter().map(|(l, p)| (l, p / total)).collect())
}

pub fn born_ket(psi: &Ket, m: &Povm) -> Result<Vec<(Label, f64)>> {
    born(&psi.density(), m)
}

/// Kronecker composition of two objects of the same kind.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for Ket {
    fn tensor(&self, other: &Ket) -> Ket {
        Ket {
            amps: self.amps.kronecker(&other.amps),
        }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            m: self.m.kronecker(&other.m),
        }
    }
}

impl Tensor for Povm {
    /// Outcome labels are joined with `,`, so `a0=0` and `b0=1` compose to the
    /// joint event `a0=0,b0=1`.
    fn tensor(&self, other: &Povm) -> Povm {
        let mut effects = Vec::new();
        for (la, ea) in &self.effects {
            for (lb, eb) in &other.effects {
                effects.push((format!("{la},{lb}"), ea.kronecker(eb)));
            }
        }
        Povm { effects }
    }
}

/// Any tensorable object, for callers that only know the kind at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumObject {
    Ket(Ket),
    Density(DensityMatrix),
    Povm(Povm),
}

impl QuantumObject {
    fn kind(&self) -> &'static str {
        match self {
            QuantumObject::Ket(_) => "ket",
            QuantumObject::Density(_) => "density matrix",
            QuantumObject::Povm(_) => "POVM",
        }
    }
}

pub fn tensor(a: &QuantumObject, b: &QuantumObject) -> Result<QuantumObject> {
    use QuantumObject::*;
    match (a, b) {
        (Ket(x), Ket(y)) => Ok(Ket(x.tensor(y))),
        (Density(x), Density(y)) => Ok(Density(x.tensor(y))),
        (Povm(x), Povm(y)) => Ok(Povm(x.tensor(y))),
        _ => Err(QuantumError::KindMismatch(a.kind(), b.kind())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn probs(v: &[(Label, f64)]) -> Vec<f64> {
        v.iter().map(|(_, p)| *p).collect()
    }

    fn close(a: &[f64], b: &[f64], eps: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
    }

    #[test]
    fn born_on_eigenstates_and_plus() {
        let z = Povm::z("m");
        assert!(close(&probs(&born_ket(&Ket::zero(), &z).unwrap()), &[1.0, 0.0], 1e-12));
        assert!(close(&probs(&born_ket(&Ket::plus(), &z).unwrap()), &[0.5, 0.5], 1e-12));
        assert!(close(
            &probs(&born_ket(&Ket::minus(), &Povm::x("m")).unwrap()),
            &[0.0, 1.0],
            1e-12
        ));
    }

    #[test]
    fn born_dimension_mismatch() {
        let zz = Povm::z("a").tensor(&Povm::z("b"));
        assert_eq!(
            born_ket(&Ket::zero(), &zz),
            Err(QuantumError::DimensionMismatch { expected: 2, found: 4 })
        );
    }

    #[test]
    fn chsh_cell_matches_closed_form() {
        let m = Povm::xz("a0", 0.0).tensor(&Povm::xz("b0", std::f64::consts::FRAC_PI_4));
        let p = born_ket(&Ket::phi_plus(), &m).unwrap();
        assert_eq!(p[0].0, "a0=0,b0=0");
        let want = (2.0 + 2f64.sqrt()) / 8.0;
        assert!((p[0].1 - want).abs() < 1e-12);
        assert!((p[0].1 - 0.426777).abs() < 1e-6);
    }

    #[test]
    fn tensor_products() {
        assert_eq!(Ket::zero().tensor(&Ket::zero()), Ket::basis(4, 0));
        let zz = Povm::z("a").tensor(&Povm::z("b"));
        assert_eq!(zz.effects().len(), 4);
        let sum = zz.effects().iter().fold(CMatrix::zeros(4, 4), |acc, (_, e)| acc + e);
        assert!(max_abs(&(sum - CMatrix::identity(4, 4))) < 1e-12);
        assert!(Povm::new(zz.effects().to_vec()).is_ok());
        let rho = Ket::plus().density().tensor(&Ket::zero().density());
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        assert!(matches!(
            tensor(&QuantumObject::Ket(Ket::zero()), &QuantumObject::Povm(Povm::z("m"))),
            Err(QuantumError::KindMismatch("ket", "POVM"))
        ));
        assert!(matches!(
            tensor(&QuantumObject::Ket(Ket::zero()), &QuantumObject::Ket(Ket::one())),
            Ok(QuantumObject::Ket(_))
        ));
    }

    #[test]
    fn validation() {
        assert!(matches!(
            Ket::new(vec![c(1.0), c(1.0)]),
            Err(QuantumError::NotNormalized(_))
        ));
        let not_herm = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.3), c(0.0), c(0.5)]);
        assert!(matches!(
            DensityMatrix::new(not_herm),
            Err(QuantumError::NotHermitian(_))
        ));
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(matches!(DensityMatrix::new(neg), Err(QuantumError::NotPositive(_))));
        let half = CMatrix::identity(2, 2) * c(0.5);
        assert!(matches!(
            Povm::new(vec![("x".into(), half.clone())]),
            Err(QuantumError::Incomplete(_))
        ));
        assert!(matches!(
            Povm::new(vec![("x".into(), half.clone()), ("x".into(), half)]),
            Err(QuantumError::DuplicateOutcome(_))
        ));
    }

    #[test]
    fn spectra() {
        let z = Observable::pauli_z();
        assert_eq!(z.spectrum().len(), 2);
        assert!((z.spectrum()[0].0 - 1.0).abs() < 1e-12);
        assert!((z.spectrum()[1].0 + 1.0).abs() < 1e-12);
        assert_eq!(Observable::identity(3).spectrum().len(), 1);
        let xx = Observable::new(Observable::pauli_x().matrix().kronecker(Observable::pauli_x().matrix())).unwrap();
        assert_eq!(xx.spectrum().len(), 2);
    }

    fn arb_ket(dim: usize) -> impl Strategy<Value = Ket> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
            .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
            .prop_map(|v| Ket::normalized(v.into_iter().map(|(a, b)| Complex::new(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn born_sums_to_one(psi in arb_ket(4), ta in 0.0f64..6.3, tb in 0.0f64..6.3) {
            let m = Povm::xz("a", ta).tensor(&Povm::xz("b", tb));
            let p = born_ket(&psi, &m).unwrap();
            let total: f64 = p.iter().map(|(_, x)| x).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|(_, x)| *x >= 0.0));
        }

        #[test]
        fn observables_reconstruct(a in -2.0f64..2.0, b in -2.0f64..2.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let m = CMatrix::from_row_slice(2, 2, &[c(a), Complex::new(re, im), Complex::new(re, -im), c(b)]);
            let o = Observable::new(m.clone()).unwrap();
            let rebuilt = o.spectrum().iter().fold(CMatrix::zeros(2, 2), |acc, (v, p)| acc + p * c(*v));
            prop_assert!(max_abs(&(rebuilt - m)) <= 1e-10);
            prop_assert!(o.spectrum().windows(2).all(|w| w[0].0 > w[1].0));
        }
    }
}
