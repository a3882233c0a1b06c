//! Observable tuples, expected values, support functions, and exposed faces.
//!
//! An `ObservableSet` holds Hermitian matrices `u_1, ..., u_r` on a common
//! space. The induced map E sends a state to its tuple of expected values;
//! the image of the state space is a compact convex body whose geometry the
//! rest of the crate analyzes.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    C64, ComplexMatrix, HermitianMatrix, OrthonormalBasis, Projection, hermitian_eig,
    real_row_rank, spectral_projection_max,
};
use crate::states::DensityMatrix;
use crate::tol;

/// Tuple of expected values, one entry per observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpectedValue(Vec<f64>);

impl ExpectedValue {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, direction: &[f64]) -> f64 {
        self.0.iter().zip(direction).map(|(a, l)| a * l).sum()
    }

    pub fn distance(&self, other: &ExpectedValue) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Tuple of Hermitian observables on a common space.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    dim: usize,
    observables: Vec<HermitianMatrix>,
}

impl ObservableSet {
    pub fn new(observables: Vec<HermitianMatrix>) -> Result<Self> {
        let first = observables
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty observable set".into()))?;
        let dim = first.dim();
        if observables.iter().any(|u| u.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "observables must share one dimension".into(),
            ));
        }
        Ok(Self { dim, observables })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of observables.
    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[HermitianMatrix] {
        &self.observables
    }

    pub fn observable(&self, i: usize) -> &HermitianMatrix {
        &self.observables[i]
    }

    /// Expected-value tuple `tr(rho u_i)`.
    pub fn expected_values(&self, rho: &DensityMatrix) -> Result<ExpectedValue> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} does not match observables of dimension {}",
                rho.dim(),
                self.dim
            )));
        }
        let coords = self
            .observables
            .iter()
            .map(|u| u.matrix().mul(rho.matrix()).map(|m| m.trace().re))
            .collect::<Result<Vec<f64>>>()?;
        Ok(ExpectedValue(coords))
    }

    /// Linear pencil `sum_i lambda_i u_i`.
    pub fn pencil(&self, lambda: &[f64]) -> Result<HermitianMatrix> {
        if lambda.len() != self.observables.len() {
            return Err(Error::DimensionMismatch(format!(
                "direction has {} coordinates for {} observables",
                lambda.len(),
                self.observables.len()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.dim);
        for (c, u) in lambda.iter().zip(&self.observables) {
            acc = acc.add(&u.matrix().scale(C64::new(*c, 0.0)))?;
        }
        HermitianMatrix::new(acc)
    }

    /// Support function of the expected-value body: the maximal eigenvalue of
    /// the pencil in the given direction. The direction must be nonzero.
    pub fn support_function(&self, lambda: &[f64]) -> Result<f64> {
        let norm: f64 = lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(
                "support function needs a nonzero direction".into(),
            ));
        }
        let pencil = self.pencil(lambda)?;
        let dec = hermitian_eig(&pencil);
        Ok(*dec.eigenvalues.last().expect("nonempty spectrum"))
    }

    /// Face of the expected-value body exposed by a nonzero direction.
    ///
    /// The support projection is the top eigenspace of the pencil, merged
    /// within `degeneracy_tol * (1 + |top eigenvalue|)`.
    pub fn exposed_face(&self, lambda: &[f64], degeneracy_tol: f64) -> Result<FaceDescriptor> {
        let norm: f64 = lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(
                "an exposing direction must be nonzero".into(),
            ));
        }
        let pencil = self.pencil(lambda)?;
        let top = *hermitian_eig(&pencil).eigenvalues.last().expect("nonempty");
        let gap = degeneracy_tol * (1.0 + top.abs());
        let projection = spectral_projection_max(&pencil, gap);
        let dim = self.face_dimension(&projection)?;
        Ok(FaceDescriptor {
            projection,
            exposing_direction: Some(lambda.to_vec()),
            dim,
            exposure_chain: vec![lambda.to_vec()],
        })
    }

    /// Descriptor of the whole body as an unexposed trivial face.
    pub fn whole_body_face(&self) -> Result<FaceDescriptor> {
        let projection = Projection::identity(self.dim);
        let dim = self.face_dimension(&projection)?;
        Ok(FaceDescriptor {
            projection,
            exposing_direction: None,
            dim,
            exposure_chain: Vec::new(),
        })
    }

    /// Affine dimension of the image of the states supported on `p`:
    /// the rank of the expected-value map on traceless Hermitian matrices of
    /// the compressed space.
    pub fn face_dimension(&self, p: &Projection) -> Result<usize> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch(
                "projection dimension does not match the observables".into(),
            ));
        }
        let k = p.rank();
        if k <= 1 {
            return Ok(0);
        }
        let basis = p.orthonormal_basis();
        let compressed: Vec<ComplexMatrix> = self
            .observables
            .iter()
            .map(|u| basis.compress(u.matrix()))
            .collect::<Result<_>>()?;
        let rows: Vec<Vec<f64>> = traceless_hermitian_basis(k)
            .iter()
            .map(|x| {
                compressed
                    .iter()
                    .map(|u| x.mul(u).map(|m| m.trace().re))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(real_row_rank(&rows, tol::RANK_SV))
    }

    /// Observables compressed to the span of an orthonormal family.
    pub fn compress(&self, basis: &OrthonormalBasis) -> Result<ObservableSet> {
        let observables = self
            .observables
            .iter()
            .map(|u| {
                basis
                    .compress(u.matrix())
                    .and_then(|m| HermitianMatrix::with_tolerance(m, 1e-10))
            })
            .collect::<Result<Vec<_>>>()?;
        ObservableSet::new(observables)
    }

    /// Affine recombination `v_i = sum_j coeffs[i][j] u_j + shifts[i] * 1`.
    ///
    /// Faces and maximum-entropy states correspond across the recombination
    /// only when the coefficient matrix is invertible.
    pub fn recombine(&self, coeffs: &[Vec<f64>], shifts: &[f64]) -> Result<ObservableSet> {
        if coeffs.len() != shifts.len() {
            return Err(Error::DimensionMismatch(
                "one shift per recombined observable".into(),
            ));
        }
        let observables = coeffs
            .iter()
            .zip(shifts)
            .map(|(row, &s)| {
                let pencil = self.pencil(row)?;
                let shifted = pencil
                    .matrix()
                    .add(&ComplexMatrix::identity(self.dim).scale(C64::new(s, 0.0)))?;
                HermitianMatrix::new(shifted)
            })
            .collect::<Result<Vec<_>>>()?;
        ObservableSet::new(observables)
    }

    /// Conjugated observables `w* u_i w` for unitary `w`, so that expected
    /// values of the new set at `rho` equal those of the old set at
    /// `w rho w*`.
    pub fn conjugate(&self, w: &ComplexMatrix) -> Result<ObservableSet> {
        if w.dim() != self.dim {
            return Err(Error::DimensionMismatch(
                "unitary dimension does not match the observables".into(),
            ));
        }
        let defect = w
            .adjoint()
            .mul(w)?
            .sub(&ComplexMatrix::identity(self.dim))?
            .max_abs_entry();
        if defect > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "conjugator is not unitary: defect {defect:e}"
            )));
        }
        let observables = self
            .observables
            .iter()
            .map(|u| {
                let m = w.adjoint().mul(u.matrix())?.mul(w)?;
                HermitianMatrix::with_tolerance(m, 1e-10)
            })
            .collect::<Result<Vec<_>>>()?;
        ObservableSet::new(observables)
    }
}

/// Face of the expected-value body: the support projection of its preimage,
/// its affine dimension, and the chain of directions that produced it when
/// the face arose from iterated compression. The exposing direction is
/// `None` for the whole body and for faces located by support detection,
/// where no single direction was certified.
#[derive(Clone, Debug)]
pub struct FaceDescriptor {
    pub(crate) projection: Projection,
    pub(crate) exposing_direction: Option<Vec<f64>>,
    pub(crate) dim: usize,
    pub(crate) exposure_chain: Vec<Vec<f64>>,
}

impl FaceDescriptor {
    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    pub fn exposing_direction(&self) -> Option<&[f64]> {
        self.exposing_direction.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exposure_chain(&self) -> &[Vec<f64>] {
        &self.exposure_chain
    }

    pub fn is_whole_body(&self) -> bool {
        self.projection.rank() == self.projection.dim()
    }
}

/// Orthonormal basis of traceless Hermitian matrices on `C^k`, Frobenius
/// inner product: off-diagonal symmetric and antisymmetric pairs, then the
/// diagonal ladder.
pub fn traceless_hermitian_basis(k: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(k * k - 1);
    for j in 0..k {
        for l in (j + 1)..k {
            let mut x = ComplexMatrix::zeros(k);
            x.set(j, l, C64::new(s, 0.0));
            x.set(l, j, C64::new(s, 0.0));
            out.push(x);
            let mut y = ComplexMatrix::zeros(k);
            y.set(j, l, C64::new(0.0, -s));
            y.set(l, j, C64::new(0.0, s));
            out.push(y);
        }
    }
    for l in 1..k {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut d = ComplexMatrix::zeros(k);
        for j in 0..l {
            d.set(j, j, C64::new(norm, 0.0));
        }
        d.set(l, l, C64::new(-(l as f64) * norm, 0.0));
        out.push(d);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct RawObservableSet {
    d: usize,
    observables: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TryFrom<RawObservableSet> for ObservableSet {
    type Error = Error;

    fn try_from(raw: RawObservableSet) -> Result<Self> {
        let observables = raw
            .observables
            .iter()
            .map(|rows| {
                if rows.len() != raw.d || rows.iter().any(|r| r.len() != raw.d) {
                    return Err(Error::MalformedInput(format!(
                        "observable is not a {d} x {d} matrix",
                        d = raw.d
                    )));
                }
                let entries: Vec<C64> = rows
                    .iter()
                    .flatten()
                    .map(|&[re, im]| C64::new(re, im))
                    .collect();
                HermitianMatrix::new(ComplexMatrix::new(raw.d, entries)?)
            })
            .collect::<Result<Vec<_>>>()?;
        ObservableSet::new(observables)
    }
}

impl From<&ObservableSet> for RawObservableSet {
    fn from(set: &ObservableSet) -> Self {
        let d = set.dim;
        let observables = set
            .observables
            .iter()
            .map(|u| {
                (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let e = u.matrix().get(i, j);
                                [e.re, e.im]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        RawObservableSet { d, observables }
    }
}

impl Serialize for ObservableSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawObservableSet::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ObservableSet {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = RawObservableSet::deserialize(deserializer)?;
        ObservableSet::try_from(raw).map_err(D::Error::custom)
    }
}
