//! Affine maps with additive Gaussian noise, `x ↦ A x + b + N(0, Σ)`.

use std::fmt;
use std::marker::PhantomData;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::markov::{Instance, MarkovCategory};
use crate::scalar::Real;
use crate::support::SupportObject;

/// Object of the Gaussian instance: a tensor word of Euclidean factors.
///
/// Zero-dimensional factors are dropped, so `X ⊗ I = X` on the nose.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussObject {
    atoms: Vec<usize>,
}

impl GaussObject {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn new(dim: usize) -> Self {
        Self::from_atoms([dim])
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = usize>) -> Self {
        Self {
            atoms: atoms.into_iter().filter(|&d| d > 0).collect(),
        }
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms.iter().sum()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_atoms(self.atoms.iter().chain(&other.atoms).copied())
    }
}

impl fmt::Debug for GaussObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "R^0");
        }
        let words: Vec<String> = self.atoms.iter().map(|d| format!("R^{d}")).collect();
        write!(f, "{}", words.join("⊗"))
    }
}

/// The covariance is carried together with a square root `F`, `Σ = F Fᵀ`.
/// Ranks and inverses are read off `F`, which keeps their accuracy at the
/// square root of the condition number of `Σ`.
#[derive(Clone)]
pub struct GaussMap<T: Real> {
    dom: GaussObject,
    cod: GaussObject,
    a: DMatrix<T>,
    b: DVector<T>,
    sigma: DMatrix<T>,
    factor: DMatrix<T>,
}

impl<T: Real> PartialEq for GaussMap<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dom == other.dom
            && self.cod == other.cod
            && self.a == other.a
            && self.b == other.b
            && self.sigma == other.sigma
    }
}

impl<T: Real> fmt::Debug for GaussMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaussMap")
            .field("dom", &self.dom)
            .field("cod", &self.cod)
            .field("a", &self.a.as_slice())
            .field("b", &self.b.as_slice())
            .field("sigma", &self.sigma.as_slice())
            .finish()
    }
}

/// Knobs for [`GaussMap::invert_with`].
#[derive(Debug, Clone, Copy)]
pub struct InvertOptions<T> {
    /// Relative singular-value cutoff for the pseudoinverse.
    pub tol: T,
    /// Replace the posterior covariance by its symmetric part.
    pub symmetrize: bool,
}

impl<T: Real> Default for InvertOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::support_tol(),
            symmetrize: true,
        }
    }
}

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

fn symmetric_part<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::from_f64_lossy(0.5)
}

/// Moore–Penrose pseudoinverse of a symmetric PSD matrix, dropping
/// eigenvalues at or below `tol · λ_max`. Uses the same eigenbasis as
/// [`GaussMap::support`], so inversion and supports agree on the rank.
pub fn pseudo_inverse<T: Real>(m: &DMatrix<T>, tol: T) -> DMatrix<T> {
    let (basis, values) = range_basis(m, tol);
    let mut scaled = basis.clone();
    for (mut col, v) in scaled.column_iter_mut().zip(&values) {
        col /= *v;
    }
    scaled * basis.transpose()
}

/// `F` with `F Fᵀ = sigma`, one column per retained eigenvalue.
fn psd_factor<T: Real>(sigma: &DMatrix<T>, tol: T) -> DMatrix<T> {
    let (mut basis, values) = range_basis(sigma, tol);
    for (mut col, v) in basis.column_iter_mut().zip(&values) {
        col *= v.sqrt();
    }
    basis
}

/// An equivalent factor with at most as many columns as rows.
fn compress<T: Real>(f: DMatrix<T>) -> DMatrix<T> {
    if f.ncols() <= f.nrows() {
        return f;
    }
    f.transpose().qr().r().transpose()
}

fn hstack<T: Real>(left: &DMatrix<T>, right: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

fn block_diag<T: Real>(top: &DMatrix<T>, bottom: &DMatrix<T>) -> DMatrix<T> {
    let (r1, c1) = top.shape();
    let (r2, c2) = bottom.shape();
    let mut out = DMatrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(top);
    out.view_mut((r1, c1), (r2, c2)).copy_from(bottom);
    out
}

/// Orthonormal basis of the column space of a factor, with the squared
/// singular values, dropping those at or below `tol · largest`.
fn factor_range<T: Real>(f: &DMatrix<T>, tol: T) -> (DMatrix<T>, Vec<T>) {
    let (mut u, s, _) = thin_svd(f, tol.sqrt());
    for mut col in u.column_iter_mut() {
        orient(&mut col);
    }
    (u, s.iter().map(|v| *v * *v).collect())
}

/// Flip `v` so its largest-magnitude coordinate (lowest index on ties) is positive.
fn orient<T: Real, S>(v: &mut nalgebra::Matrix<T, nalgebra::Dyn, nalgebra::U1, S>)
where
    S: nalgebra::StorageMut<T, nalgebra::Dyn, nalgebra::U1>,
{
    let tie = T::from_f64_lossy(1e-9);
    let peak = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    let pivot = v.iter().position(|x| x.abs() >= peak - tie).unwrap_or(0);
    if v[pivot] < T::zero() {
        v.neg_mut();
    }
}

/// Thin SVD `m = U diag(s) Vᵀ` keeping singular values above `tol · s_max`,
/// read off the eigenpairs `(±s, (u, ±v)/√2)` of `[[0, m], [mᵀ, 0]]`.
fn thin_svd<T: Real>(m: &DMatrix<T>, tol: T) -> (DMatrix<T>, Vec<T>, DMatrix<T>) {
    let (rows, cols) = m.shape();
    let mut h = DMatrix::zeros(rows + cols, rows + cols);
    h.view_mut((0, rows), (rows, cols)).copy_from(m);
    h.view_mut((rows, 0), (cols, rows)).copy_from(&m.transpose());
    let (basis, values) = range_basis(&h, tol);
    let root2 = T::from_f64_lossy(2.0).sqrt();
    let u = basis.rows(0, rows) * root2;
    let v = basis.rows(rows, cols) * root2;
    (u, values, v)
}

/// Orthonormal basis of the complement of the span of the orthonormal
/// columns of `v`: eigenvectors of `I − V Vᵀ` with eigenvalue near one.
fn complement<T: Real>(v: &DMatrix<T>) -> DMatrix<T> {
    let n = v.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = (DMatrix::identity(n, n) - v * v.transpose()).symmetric_eigen();
    let half = T::from_f64_lossy(0.5);
    let kept: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > half).collect();
    let mut w = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        w.set_column(col, &eig.eigenvectors.column(i));
    }
    w
}

/// Orthonormal eigenbasis of the range of a PSD matrix, largest eigenvalue first.
///
/// Each eigenvector is oriented so its largest-magnitude coordinate (lowest
/// index on ties) is positive.
pub(crate) fn range_basis<T: Real>(sigma: &DMatrix<T>, tol: T) -> (DMatrix<T>, Vec<T>) {
    let n = sigma.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), Vec::new());
    }
    let eig = symmetric_part(sigma).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let largest = eig.eigenvalues[order[0]];
    let kept: Vec<usize> = if largest > T::zero() {
        order
            .into_iter()
            .filter(|&i| eig.eigenvalues[i] > tol * largest)
            .collect()
    } else {
        Vec::new()
    };
    let mut basis = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        basis.set_column(col, &eig.eigenvectors.column(i));
        orient(&mut basis.column_mut(col));
    }
    let values = kept.iter().map(|&i| eig.eigenvalues[i]).collect();
    (basis, values)
}

impl<T: Real> GaussMap<T> {
    /// Validated construction: shapes agree with the objects and `sigma` is
    /// symmetric positive semidefinite.
    pub fn new(
        dom: GaussObject,
        cod: GaussObject,
        a: DMatrix<T>,
        b: DVector<T>,
        sigma: DMatrix<T>,
    ) -> Result<Self> {
        let map = Self::from_parts_unchecked(dom, cod, a, b, sigma)?;
        map.validate()?;
        Ok(map)
    }

    /// Shape-checked construction without the covariance checks.
    pub fn from_parts_unchecked(
        dom: GaussObject,
        cod: GaussObject,
        a: DMatrix<T>,
        b: DVector<T>,
        sigma: DMatrix<T>,
    ) -> Result<Self> {
        let (m, n) = (dom.dim(), cod.dim());
        if a.shape() != (n, m) {
            return Err(Error::DimMismatch(format!(
                "A is {}x{}, expected {n}x{m}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != n {
            return Err(Error::DimMismatch(format!(
                "b has length {}, expected {n}",
                b.len()
            )));
        }
        if sigma.shape() != (n, n) {
            return Err(Error::DimMismatch(format!(
                "Sigma is {}x{}, expected {n}x{n}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let factor = psd_factor(&sigma, T::zero());
        Ok(Self {
            dom,
            cod,
            a,
            b,
            sigma,
            factor,
        })
    }

    /// Construction from a square root of the covariance, `Σ = F Fᵀ`.
    pub fn from_factor(
        dom: GaussObject,
        cod: GaussObject,
        a: DMatrix<T>,
        b: DVector<T>,
        factor: DMatrix<T>,
    ) -> Result<Self> {
        let n = cod.dim();
        if factor.nrows() != n {
            return Err(Error::DimMismatch(format!(
                "covariance factor has {} rows, expected {n}",
                factor.nrows()
            )));
        }
        let sigma = symmetric_part(&(&factor * factor.transpose()));
        let mut map = Self::from_parts_unchecked(dom, cod, a, b, DMatrix::zeros(n, n))?;
        map.sigma = sigma;
        map.factor = compress(factor);
        Ok(map)
    }

    /// Same noise with a different affine part.
    pub fn with_affine_part(&self, a: DMatrix<T>, b: DVector<T>) -> Result<Self> {
        let mut map = Self::deterministic(self.dom.clone(), self.cod.clone(), a, b)?;
        map.sigma = self.sigma.clone();
        map.factor = self.factor.clone();
        Ok(map)
    }

    pub fn state(mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        let n = mean.len();
        Self::new(
            GaussObject::unit(),
            GaussObject::new(n),
            DMatrix::zeros(n, 0),
            mean,
            cov,
        )
    }

    /// A state on a given (possibly multi-factor) object.
    pub fn state_on(cod: GaussObject, mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        let n = cod.dim();
        Self::new(GaussObject::unit(), cod, DMatrix::zeros(n, 0), mean, cov)
    }

    /// Noise-free affine map.
    pub fn deterministic(
        dom: GaussObject,
        cod: GaussObject,
        a: DMatrix<T>,
        b: DVector<T>,
    ) -> Result<Self> {
        let n = cod.dim();
        Self::from_parts_unchecked(dom, cod, a, b, DMatrix::zeros(n, n))
    }

    pub fn dirac(cod: GaussObject, point: DVector<T>) -> Result<Self> {
        Self::deterministic(GaussObject::unit(), cod.clone(), DMatrix::zeros(cod.dim(), 0), point)
    }

    pub fn identity(x: &GaussObject) -> Self {
        let n = x.dim();
        Self::deterministic(x.clone(), x.clone(), DMatrix::identity(n, n), DVector::zeros(n))
            .expect("identity shapes agree")
    }

    pub fn copy(x: &GaussObject) -> Self {
        let n = x.dim();
        let mut a = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            a[(i, i)] = T::one();
            a[(n + i, i)] = T::one();
        }
        Self::deterministic(x.clone(), x.tensor(x), a, DVector::zeros(2 * n))
            .expect("copy shapes agree")
    }

    pub fn delete(x: &GaussObject) -> Self {
        Self::deterministic(
            x.clone(),
            GaussObject::unit(),
            DMatrix::zeros(0, x.dim()),
            DVector::zeros(0),
        )
        .expect("delete shapes agree")
    }

    pub fn swap(x: &GaussObject, y: &GaussObject) -> Self {
        let (m, n) = (x.dim(), y.dim());
        let mut a = DMatrix::zeros(m + n, m + n);
        for j in 0..n {
            a[(j, m + j)] = T::one();
        }
        for i in 0..m {
            a[(n + i, i)] = T::one();
        }
        Self::deterministic(x.tensor(y), y.tensor(x), a, DVector::zeros(m + n))
            .expect("swap shapes agree")
    }

    pub fn dom(&self) -> &GaussObject {
        &self.dom
    }

    pub fn cod(&self) -> &GaussObject {
        &self.cod
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DVector<T> {
        &self.b
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }

    /// Mean of a state.
    pub fn mean(&self) -> &DVector<T> {
        &self.b
    }

    /// Covariance of a state.
    pub fn cov(&self) -> &DMatrix<T> {
        &self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        let scale = T::one().max(max_abs(&self.sigma));
        let asym = max_abs(&(&self.sigma - self.sigma.transpose()));
        if asym > T::symmetry_tol() * scale {
            return Err(Error::validation(
                "gaussian map",
                format!("Sigma is not symmetric (max asymmetry {asym:?})"),
            ));
        }
        if self.sigma.nrows() > 0 {
            let eig = symmetric_part(&self.sigma).symmetric_eigen();
            let min = eig
                .eigenvalues
                .iter()
                .fold(eig.eigenvalues[0], |acc, &v| acc.min(v));
            if min < -T::psd_tol() * scale {
                return Err(Error::validation(
                    "gaussian map",
                    format!("Sigma has negative eigenvalue {min:?}"),
                ));
            }
        }
        Ok(())
    }

    pub fn compose(&self, g: &Self) -> Result<Self> {
        if self.cod != g.dom {
            return Err(Error::DomainMismatch {
                left: format!("{:?}", self.cod),
                right: format!("{:?}", g.dom),
            });
        }
        Ok(Self {
            dom: self.dom.clone(),
            cod: g.cod.clone(),
            a: &g.a * &self.a,
            b: &g.a * &self.b + &g.b,
            sigma: &g.a * &self.sigma * g.a.transpose() + &g.sigma,
            factor: compress(hstack(&(&g.a * &self.factor), &g.factor)),
        })
    }

    pub fn tensor(&self, g: &Self) -> Self {
        let n = self.b.len() + g.b.len();
        let b = DVector::from_iterator(n, self.b.iter().chain(g.b.iter()).copied());
        Self {
            dom: self.dom.tensor(&g.dom),
            cod: self.cod.tensor(&g.cod),
            a: block_diag(&self.a, &g.a),
            b,
            sigma: block_diag(&self.sigma, &g.sigma),
            factor: block_diag(&self.factor, &g.factor),
        }
    }

    /// Bayesian inverse at the prior `pi` by Gaussian conditioning.
    pub fn invert(&self, pi: &Self, tol: T) -> Result<Self> {
        self.invert_with(
            pi,
            InvertOptions {
                tol,
                symmetrize: true,
            },
        )
    }

    pub fn invert_with(&self, pi: &Self, opts: InvertOptions<T>) -> Result<Self> {
        if pi.dom.dim() != 0 {
            return Err(Error::DimMismatch("prior must be a state".into()));
        }
        if pi.cod != self.dom {
            return Err(Error::DimMismatch(format!(
                "prior on {:?} for a map out of {:?}",
                pi.cod, self.dom
            )));
        }
        let mu0 = &pi.b;
        let predictive = pi.compose(self)?;
        let prior_factor = &pi.factor;
        let stacked = hstack(&(&self.a * prior_factor), &self.factor);
        let (u, s, v) = thin_svd(&stacked, opts.tol.sqrt());
        let v1 = v.rows(0, prior_factor.ncols()).into_owned();
        let mut scaled = prior_factor * &v1;
        for (mut col, value) in scaled.column_iter_mut().zip(s.iter()) {
            col /= *value;
        }
        let gain = scaled * u.transpose();
        let b = mu0 - &gain * &predictive.b;
        // With W an orthonormal complement of V, I − V₁V₁ᵀ = W₁W₁ᵀ, so
        // L W₁ is a square root of the posterior covariance.
        let k = prior_factor.ncols();
        let w1 = complement(&v).rows(0, k).into_owned();
        let posterior_factor = prior_factor * &w1;
        let raw = (prior_factor * (&w1 * w1.transpose())) * prior_factor.transpose();
        let sigma = if opts.symmetrize {
            symmetric_part(&raw)
        } else {
            raw
        };
        Ok(Self {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            a: gain,
            b,
            sigma,
            factor: compress(posterior_factor),
        })
    }

    /// Support of a state: `i(z) = μ + E z`, `r(x) = Eᵀ (x − μ)` with `E` an
    /// orthonormal basis of the range of the covariance, ordered by decreasing
    /// variance. A full-rank state is its own support with identity section
    /// and retraction.
    pub fn support(&self, tol: T) -> Result<SupportObject<Gauss<T>>> {
        if self.dom.dim() != 0 {
            return Err(Error::DimMismatch("support of a non-state".into()));
        }
        let n = self.cod.dim();
        let (basis, _) = factor_range(&self.factor, tol);
        let k = basis.ncols();
        if k == n {
            let id = Self::identity(&self.cod);
            return Ok(SupportObject {
                base: self.cod.clone(),
                state: self.clone(),
                carrier: self.cod.clone(),
                section: id.clone(),
                retraction: id,
            });
        }
        let carrier = GaussObject::new(k);
        let section =
            Self::deterministic(carrier.clone(), self.cod.clone(), basis.clone(), self.b.clone())?;
        let retraction = Self::deterministic(
            self.cod.clone(),
            carrier.clone(),
            basis.transpose(),
            -(basis.transpose() * &self.b),
        )?;
        Ok(SupportObject {
            base: self.cod.clone(),
            state: self.clone(),
            carrier,
            section,
            retraction,
        })
    }

    /// Log-density of `point` under a state, on the state's affine support.
    pub fn log_density(&self, point: &DVector<T>, tol: T) -> Result<T> {
        let n = self.cod.dim();
        if point.len() != n {
            return Err(Error::DimMismatch(format!(
                "point of length {} for a state of dimension {n}",
                point.len()
            )));
        }
        let (basis, values) = factor_range(&self.factor, tol);
        let centred = point - &self.b;
        let coords = basis.transpose() * &centred;
        let off = (&centred - &basis * &coords).norm();
        let scale = T::one().max(centred.norm()).max(self.b.norm());
        if off > T::from_f64_lossy(1e-8) * scale {
            return Err(Error::UnsupportedObservation {
                observation: format!("{:?}", point.as_slice()),
                mass: 0.0,
            });
        }
        let two_pi = T::two_pi();
        let mut acc = T::zero();
        for (z, lambda) in coords.iter().zip(&values) {
            acc += two_pi.ln() + lambda.ln() + *z * *z / *lambda;
        }
        Ok(-acc * T::from_f64_lossy(0.5))
    }
}

/// The Gaussian instance over the real field `T`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gauss<T>(PhantomData<T>);

const FINGERPRINT_QUANTUM: f64 = 1e-12;

impl<T: Real> MarkovCategory for Gauss<T> {
    type Scalar = T;
    type Object = GaussObject;
    type Morphism = GaussMap<T>;

    const INSTANCE: Instance = Instance::Gaussian;

    fn unit() -> GaussObject {
        GaussObject::unit()
    }

    fn tensor_objects(x: &GaussObject, y: &GaussObject) -> GaussObject {
        x.tensor(y)
    }

    fn split_left(obj: &GaussObject, left: &GaussObject) -> Result<GaussObject> {
        let k = left.atoms.len();
        if obj.atoms.len() < k || obj.atoms[..k] != left.atoms[..] {
            return Err(Error::NotAProduct(format!("{obj:?}")));
        }
        Ok(GaussObject {
            atoms: obj.atoms[k..].to_vec(),
        })
    }

    fn dom(f: &GaussMap<T>) -> &GaussObject {
        &f.dom
    }

    fn cod(f: &GaussMap<T>) -> &GaussObject {
        &f.cod
    }

    fn identity(x: &GaussObject) -> GaussMap<T> {
        GaussMap::identity(x)
    }

    fn compose(f: &GaussMap<T>, g: &GaussMap<T>) -> Result<GaussMap<T>> {
        f.compose(g)
    }

    fn tensor(f: &GaussMap<T>, g: &GaussMap<T>) -> GaussMap<T> {
        f.tensor(g)
    }

    fn copy(x: &GaussObject) -> GaussMap<T> {
        GaussMap::copy(x)
    }

    fn delete(x: &GaussObject) -> GaussMap<T> {
        GaussMap::delete(x)
    }

    fn swap(x: &GaussObject, y: &GaussObject) -> GaussMap<T> {
        GaussMap::swap(x, y)
    }

    fn distance(f: &GaussMap<T>, g: &GaussMap<T>) -> Result<T> {
        crate::markov::require_parallel::<Self>(f, g)?;
        let db = (&f.b - &g.b).iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        Ok(max_abs(&(&f.a - &g.a))
            .max(db)
            .max(max_abs(&(&f.sigma - &g.sigma))))
    }

    fn fingerprint(f: &GaussMap<T>) -> Vec<u64> {
        let mut key = vec![f.dom.dim() as u64, f.cod.dim() as u64];
        key.extend(
            f.a.iter()
                .chain(f.b.iter())
                .chain(f.sigma.iter())
                .map(|v| (v.to_f64_lossy() / FINGERPRINT_QUANTUM).round().to_bits()),
        );
        key
    }
}
