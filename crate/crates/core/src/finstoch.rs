//! Finite sets and row-stochastic matrices.

use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::markov::{Instance, MarkovCategory};
use crate::scalar::Scalar;

/// A finite set with named points. Labels are pairwise distinct and there is
/// at least one of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinAtom {
    labels: Vec<String>,
}

impl FinAtom {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::validation("finite object", "no labels"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::validation(
                    "finite object",
                    format!("duplicate label `{l}` at index {i}"),
                ));
            }
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Object of the finite instance: a tensor word of atoms.
///
/// Points of a word are indexed row-major, the last factor varying fastest.
/// The empty word is the unit and has exactly one point.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FinObject {
    atoms: Vec<Arc<FinAtom>>,
}

impl FinObject {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Ok(Self::from_atom(FinAtom::new(labels)?))
    }

    pub fn from_atom(atom: FinAtom) -> Self {
        Self {
            atoms: vec![Arc::new(atom)],
        }
    }

    /// An atom labelled `0..n`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn atoms(&self) -> &[Arc<FinAtom>] {
        &self.atoms
    }

    pub fn is_unit(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn size(&self) -> usize {
        self.atoms.iter().map(|a| a.len()).product()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self { atoms }
    }

    /// Label of point `index`; tuples for multi-factor words.
    pub fn label(&self, index: usize) -> String {
        match self.atoms.len() {
            0 => "*".to_string(),
            1 => self.atoms[0].labels[index].clone(),
            _ => {
                let parts: Vec<&str> = self
                    .coordinates(index)
                    .into_iter()
                    .zip(&self.atoms)
                    .map(|(c, a)| a.labels[c].as_str())
                    .collect();
                format!("({})", parts.join(","))
            }
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.size()).map(|i| self.label(i)).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        (0..self.size()).find(|&i| self.label(i) == label)
    }

    fn coordinates(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.atoms.len()];
        for (slot, atom) in coords.iter_mut().zip(&self.atoms).rev() {
            *slot = index % atom.len();
            index /= atom.len();
        }
        coords
    }
}

impl fmt::Debug for FinObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "I");
        }
        let words: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("{{{}}}", a.labels.join(",")))
            .collect();
        write!(f, "{}", words.join("⊗"))
    }
}

/// A row-stochastic matrix between finite objects.
///
/// Operations never renormalise; use [`StochMap::validate`] to check drift.
#[derive(Clone, PartialEq)]
pub struct StochMap<S: Scalar> {
    dom: FinObject,
    cod: FinObject,
    entries: Vec<S>,
}

impl<S: Scalar> fmt::Debug for StochMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StochMap")
            .field("dom", &self.dom)
            .field("cod", &self.cod)
            .field("rows", &self.rows())
            .finish()
    }
}

impl<S: Scalar> StochMap<S> {
    /// Build from row-major entries, checking nonnegativity and row sums.
    pub fn new(dom: FinObject, cod: FinObject, entries: Vec<S>) -> Result<Self> {
        let map = Self::from_entries_unchecked(dom, cod, entries)?;
        map.validate(&S::validation_tol())?;
        Ok(map)
    }

    pub fn from_rows(dom: FinObject, cod: FinObject, rows: Vec<Vec<S>>) -> Result<Self> {
        if rows.len() != dom.size() {
            return Err(Error::validation(
                "stochastic map",
                format!("expected {} rows, found {}", dom.size(), rows.len()),
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cod.size() {
                return Err(Error::validation(
                    "stochastic map",
                    format!("row {i} has {} entries, expected {}", row.len(), cod.size()),
                ));
            }
        }
        Self::new(dom, cod, rows.into_iter().flatten().collect())
    }

    /// Shape-checked construction without the stochasticity check.
    pub fn from_entries_unchecked(dom: FinObject, cod: FinObject, entries: Vec<S>) -> Result<Self> {
        if entries.len() != dom.size() * cod.size() {
            return Err(Error::validation(
                "stochastic map",
                format!(
                    "expected {}x{} entries, found {}",
                    dom.size(),
                    cod.size(),
                    entries.len()
                ),
            ));
        }
        Ok(Self { dom, cod, entries })
    }

    /// A state on `cod` from a probability vector.
    pub fn state(cod: FinObject, probs: Vec<S>) -> Result<Self> {
        Self::new(FinObject::unit(), cod, probs)
    }

    /// 0/1 matrix sending `x` to `mapping(x)`.
    pub fn deterministic(
        dom: FinObject,
        cod: FinObject,
        mapping: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let (m, n) = (dom.size(), cod.size());
        let mut entries = vec![S::zero(); m * n];
        for x in 0..m {
            let y = mapping(x);
            if y >= n {
                return Err(Error::IndexOutOfRange { index: y, size: n });
            }
            entries[x * n + y] = S::one();
        }
        Ok(Self { dom, cod, entries })
    }

    pub fn point(cod: FinObject, index: usize) -> Result<Self> {
        Self::deterministic(FinObject::unit(), cod, |_| index)
    }

    pub fn identity(x: &FinObject) -> Self {
        Self::deterministic(x.clone(), x.clone(), |i| i).expect("identity is in range")
    }

    pub fn copy(x: &FinObject) -> Self {
        let n = x.size();
        Self::deterministic(x.clone(), x.tensor(x), |i| i * n + i).expect("diagonal is in range")
    }

    pub fn delete(x: &FinObject) -> Self {
        Self::deterministic(x.clone(), FinObject::unit(), |_| 0).expect("unit has one point")
    }

    pub fn swap(x: &FinObject, y: &FinObject) -> Self {
        let (m, n) = (x.size(), y.size());
        Self::deterministic(x.tensor(y), y.tensor(x), |k| (k % n) * m + k / n)
            .expect("swap is in range")
    }

    pub fn dom(&self) -> &FinObject {
        &self.dom
    }

    pub fn cod(&self) -> &FinObject {
        &self.cod
    }

    pub fn n_rows(&self) -> usize {
        self.dom.size()
    }

    pub fn n_cols(&self) -> usize {
        self.cod.size()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn get(&self, x: usize, y: usize) -> &S {
        &self.entries[x * self.n_cols() + y]
    }

    pub fn row(&self, x: usize) -> &[S] {
        let n = self.n_cols();
        &self.entries[x * n..(x + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        (0..self.n_rows()).map(|x| self.row(x).to_vec()).collect()
    }

    /// Probability vector of a state.
    pub fn probs(&self) -> &[S] {
        self.row(0)
    }

    /// Replace one row, leaving validation to the caller.
    pub fn with_row(&self, x: usize, row: &[S]) -> Result<Self> {
        if x >= self.n_rows() {
            return Err(Error::IndexOutOfRange {
                index: x,
                size: self.n_rows(),
            });
        }
        if row.len() != self.n_cols() {
            return Err(Error::DimMismatch(format!(
                "row of length {} for a map with {} columns",
                row.len(),
                self.n_cols()
            )));
        }
        let mut out = self.clone();
        let n = self.n_cols();
        out.entries[x * n..(x + 1) * n].clone_from_slice(row);
        Ok(out)
    }

    /// Check entries are nonnegative and rows sum to one within `tol`.
    pub fn validate(&self, tol: &S) -> Result<()> {
        for x in 0..self.n_rows() {
            let mut sum = S::zero();
            for (y, v) in self.row(x).iter().enumerate() {
                if *v < S::zero() {
                    return Err(Error::validation(
                        "stochastic map",
                        format!("entry ({x}, {y}) is negative: {v:?}"),
                    ));
                }
                sum = sum + v.clone();
            }
            if (sum.clone() - S::one()).abs() > *tol {
                return Err(Error::validation(
                    "stochastic map",
                    format!("row {x} sums to {sum:?}"),
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
        let (m, k, n) = (self.n_rows(), self.n_cols(), g.n_cols());
        let mut entries = vec![S::zero(); m * n];
        for x in 0..m {
            for y in 0..k {
                let p = &self.entries[x * k + y];
                if p.is_zero() {
                    continue;
                }
                for z in 0..n {
                    let q = &g.entries[y * n + z];
                    if !q.is_zero() {
                        let slot = &mut entries[x * n + z];
                        *slot = slot.clone() + p.clone() * q.clone();
                    }
                }
            }
        }
        Ok(Self {
            dom: self.dom.clone(),
            cod: g.cod.clone(),
            entries,
        })
    }

    /// Kronecker product, row-major in the pair index.
    pub fn tensor(&self, g: &Self) -> Self {
        let (m1, n1) = (self.n_rows(), self.n_cols());
        let (m2, n2) = (g.n_rows(), g.n_cols());
        let mut entries = Vec::with_capacity(m1 * m2 * n1 * n2);
        for x1 in 0..m1 {
            for x2 in 0..m2 {
                for y1 in 0..n1 {
                    for y2 in 0..n2 {
                        entries.push(self.get(x1, y1).clone() * g.get(x2, y2).clone());
                    }
                }
            }
        }
        Self {
            dom: self.dom.tensor(&g.dom),
            cod: self.cod.tensor(&g.cod),
            entries,
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> StochMap<T> {
        StochMap {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            entries: self.entries.iter().map(f).collect(),
        }
    }
}

/// The category of finite sets and stochastic matrices over `S`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FinStoch<S>(PhantomData<S>);

const FINGERPRINT_QUANTUM: f64 = 1e-12;

impl<S: Scalar> MarkovCategory for FinStoch<S> {
    type Scalar = S;
    type Object = FinObject;
    type Morphism = StochMap<S>;

    const INSTANCE: Instance = Instance::Finite;

    fn unit() -> FinObject {
        FinObject::unit()
    }

    fn tensor_objects(x: &FinObject, y: &FinObject) -> FinObject {
        x.tensor(y)
    }

    fn split_left(obj: &FinObject, left: &FinObject) -> Result<FinObject> {
        let k = left.atoms.len();
        if obj.atoms.len() < k || obj.atoms[..k] != left.atoms[..] {
            return Err(Error::NotAProduct(format!("{obj:?}")));
        }
        Ok(FinObject {
            atoms: obj.atoms[k..].to_vec(),
        })
    }

    fn dom(f: &StochMap<S>) -> &FinObject {
        &f.dom
    }

    fn cod(f: &StochMap<S>) -> &FinObject {
        &f.cod
    }

    fn identity(x: &FinObject) -> StochMap<S> {
        StochMap::identity(x)
    }

    fn compose(f: &StochMap<S>, g: &StochMap<S>) -> Result<StochMap<S>> {
        f.compose(g)
    }

    fn tensor(f: &StochMap<S>, g: &StochMap<S>) -> StochMap<S> {
        f.tensor(g)
    }

    fn copy(x: &FinObject) -> StochMap<S> {
        StochMap::copy(x)
    }

    fn delete(x: &FinObject) -> StochMap<S> {
        StochMap::delete(x)
    }

    fn swap(x: &FinObject, y: &FinObject) -> StochMap<S> {
        StochMap::swap(x, y)
    }

    fn distance(f: &StochMap<S>, g: &StochMap<S>) -> Result<S> {
        crate::markov::require_parallel::<Self>(f, g)?;
        Ok(crate::markov::max_scalar(
            f.entries
                .iter()
                .zip(&g.entries)
                .map(|(a, b)| (a.clone() - b.clone()).abs()),
        ))
    }

    fn fingerprint(f: &StochMap<S>) -> Vec<u64> {
        let mut key = vec![f.n_rows() as u64, f.n_cols() as u64];
        key.extend(
            f.entries
                .iter()
                .map(|v| (v.to_f64_lossy() / FINGERPRINT_QUANTUM).round().to_bits()),
        );
        key
    }

    fn describe(x: &FinObject) -> String {
        format!("{x:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{as_equal, marginals};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    type F = FinStoch<f64>;

    fn ab() -> FinObject {
        FinObject::new(["a", "b"]).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn pushforward_worked_example() {
        let cd = FinObject::new(["c", "d"]).unwrap();
        let pi = StochMap::state(ab(), vec![0.25f64, 0.75]).unwrap();
        let f = StochMap::from_rows(ab(), cd, vec![vec![0.8, 0.2], vec![0.4, 0.6]]).unwrap();
        let q = pi.compose(&f).unwrap();
        // 0.25*0.8 + 0.75*0.4 and 0.25*0.2 + 0.75*0.6
        assert!((q.probs()[0] - 0.5).abs() < 1e-15);
        assert!((q.probs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_and_delete_laws() {
        let f = StochMap::from_rows(
            ab(),
            FinObject::indexed(3).unwrap(),
            vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0]],
        )
        .unwrap();
        assert_eq!(StochMap::identity(&ab()).compose(&f).unwrap(), f);
        assert_eq!(f.compose(&StochMap::identity(f.cod())).unwrap(), f);
        let del = f.compose(&StochMap::delete(f.cod())).unwrap();
        assert_eq!(F::distance(&del, &StochMap::delete(&ab())).unwrap(), 0.0);
    }

    #[test]
    fn permutations_compose_as_permutations() {
        let x = FinObject::indexed(4).unwrap();
        let p = StochMap::<f64>::deterministic(x.clone(), x.clone(), |i| (i + 1) % 4).unwrap();
        let q = StochMap::<f64>::deterministic(x.clone(), x.clone(), |i| (i * 3) % 4).unwrap();
        let pq = StochMap::<f64>::deterministic(x.clone(), x, |i| ((i + 1) % 4 * 3) % 4).unwrap();
        assert_eq!(p.compose(&q).unwrap(), pq);
    }

    #[test]
    fn tensor_shapes_and_labels() {
        let x = ab();
        let y = FinObject::new(["c", "d", "e"]).unwrap();
        let id6 = StochMap::<f64>::identity(&x).tensor(&StochMap::identity(&y));
        assert_eq!(id6, StochMap::identity(&x.tensor(&y)));
        assert_eq!(x.tensor(&y).size(), 6);
        assert_eq!(
            x.tensor(&y).labels(),
            ["(a,c)", "(a,d)", "(a,e)", "(b,c)", "(b,d)", "(b,e)"]
        );
        let pa = StochMap::<f64>::point(x.clone(), 0).unwrap();
        let pc = StochMap::<f64>::point(y.clone(), 2).unwrap();
        assert_eq!(pa.tensor(&pc), StochMap::point(x.tensor(&y), 2).unwrap());
    }

    #[test]
    fn tensor_with_unit_is_strict() {
        let f = StochMap::from_rows(ab(), ab(), vec![vec![0.5, 0.5], vec![0.1, 0.9]]).unwrap();
        assert_eq!(f.tensor(&StochMap::identity(&FinObject::unit())), f);
    }

    #[test]
    fn copy_is_the_diagonal() {
        let c = StochMap::<f64>::copy(&ab());
        assert_eq!(c.rows(), vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]);
        let via_mapping =
            StochMap::<f64>::deterministic(ab(), ab().tensor(&ab()), |x| x * 2 + x).unwrap();
        assert_eq!(c, via_mapping);
    }

    #[test]
    fn swap_is_an_involution() {
        let x = ab();
        let y = FinObject::indexed(3).unwrap();
        let s = StochMap::<f64>::swap(&x, &y).compose(&StochMap::swap(&y, &x)).unwrap();
        assert_eq!(s, StochMap::identity(&x.tensor(&y)));
    }

    #[test]
    fn deterministic_rejects_out_of_range() {
        let err = StochMap::<f64>::deterministic(ab(), ab(), |_| 2).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { index: 2, size: 2 });
        let constant = StochMap::<f64>::deterministic(
            FinObject::indexed(3).unwrap(),
            FinObject::indexed(4).unwrap(),
            |_| 0,
        )
        .unwrap();
        assert!((0..3).all(|x| constant.row(x) == [1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn validation_names_the_offending_row() {
        let err = StochMap::from_rows(ab(), ab(), vec![vec![0.5, 0.5], vec![0.3, 0.3]]).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        let err = StochMap::from_rows(ab(), ab(), vec![vec![1.5, -0.5], vec![0.3, 0.7]]).unwrap_err();
        assert!(err.to_string().contains("entry (0, 1)"), "{err}");
        assert!(FinObject::new(["a", "a"]).is_err());
        assert!(FinObject::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn marginal_worked_example() {
        let pi = StochMap::state(ab().tensor(&ab()), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let (l, r) = marginals::<F>(&pi, &ab(), &ab()).unwrap();
        // rows: 0.1+0.2, 0.3+0.4; columns: 0.1+0.3, 0.2+0.4
        assert!((l.probs()[0] - 0.3).abs() < 1e-15 && (l.probs()[1] - 0.7).abs() < 1e-15);
        assert!((r.probs()[0] - 0.4).abs() < 1e-15 && (r.probs()[1] - 0.6).abs() < 1e-15);
        assert!(matches!(
            marginals::<F>(&pi, &ab(), &FinObject::indexed(3).unwrap()),
            Err(Error::NotAProduct(_))
        ));
    }

    #[test]
    fn exact_marginals_of_a_product() {
        type Q = FinStoch<BigRational>;
        let l = StochMap::state(ab(), vec![rat(1, 3), rat(2, 3)]).unwrap();
        let r = StochMap::state(FinObject::indexed(3).unwrap(), vec![rat(1, 2), rat(1, 4), rat(1, 4)])
            .unwrap();
        let (ml, mr) = marginals::<Q>(&l.tensor(&r), l.cod(), r.cod()).unwrap();
        assert_eq!(ml, l);
        assert_eq!(mr, r);
    }

    #[test]
    fn off_support_rows_are_invisible() {
        let pi = StochMap::state(ab(), vec![1.0, 0.0]).unwrap();
        let f = StochMap::from_rows(ab(), ab(), vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let g = StochMap::from_rows(ab(), ab(), vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(as_equal::<F>(&f, &g, &pi, &0.0).unwrap());
        let full = StochMap::state(ab(), vec![0.5, 0.5]).unwrap();
        assert!(!as_equal::<F>(&f, &g, &full, &1e-9).unwrap());
        assert!(as_equal::<F>(&f, &f, &full, &0.0).unwrap());
        let wrong = StochMap::state(FinObject::indexed(3).unwrap(), vec![0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(
            as_equal::<F>(&f, &g, &wrong, &0.0),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn compose_rejects_mismatched_domains() {
        let f = StochMap::<f64>::identity(&ab());
        let g = StochMap::<f64>::identity(&FinObject::indexed(2).unwrap());
        assert!(matches!(f.compose(&g), Err(Error::DomainMismatch { .. })));
    }
}
