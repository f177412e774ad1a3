//! Seeded random instances for the law harness.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::finstoch::{FinObject, FinStoch, StochMap};
use crate::gauss::{Gauss, GaussMap, GaussObject, InvertOptions};
use crate::lenses::PointObservation;
use crate::markov::Instance;
use crate::support::{SupportCategory, SupportObject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceMix {
    Finite,
    Gaussian,
    Both,
}

impl InstanceMix {
    pub fn instances(self) -> Vec<Instance> {
        match self {
            InstanceMix::Finite => vec![Instance::Finite],
            InstanceMix::Gaussian => vec![Instance::Gaussian],
            InstanceMix::Both => vec![Instance::Finite, Instance::Gaussian],
        }
    }
}

impl std::str::FromStr for InstanceMix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "finite" => Ok(InstanceMix::Finite),
            "gaussian" => Ok(InstanceMix::Gaussian),
            "both" => Ok(InstanceMix::Both),
            other => Err(format!("unknown instance `{other}`")),
        }
    }
}

/// Deliberate defects the harness can inject to check that it notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Leave the Gaussian posterior covariance unsymmetrised.
    SkipSymmetrization,
}

/// Parameters of a reproducible case stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseGen {
    pub seed: u64,
    pub max_dim: usize,
    /// Probability that a generated entry is forced to zero.
    pub sparsity: f64,
    pub instance_mix: InstanceMix,
    /// Cases per instance.
    pub cases: usize,
    /// Priors sampled per case by the family-level laws.
    pub priors_per_case: usize,
    pub mutation: Option<Mutation>,
}

impl Default for CaseGen {
    fn default() -> Self {
        Self {
            seed: 1,
            max_dim: 6,
            sparsity: 0.3,
            instance_mix: InstanceMix::Both,
            cases: 100,
            priors_per_case: 50,
            mutation: None,
        }
    }
}

/// Random objects, states and morphisms for an instance over `f64`.
pub trait Sampler: PointObservation<Scalar = f64> {
    fn random_object(rng: &mut ChaCha8Rng, max_dim: usize) -> Self::Object;

    fn random_state(rng: &mut ChaCha8Rng, x: &Self::Object, sparsity: f64) -> Self::Morphism;

    /// Dirac (`kind == 0`) or maximally spread (`kind == 1`) states.
    fn special_state(rng: &mut ChaCha8Rng, x: &Self::Object, kind: usize) -> Self::Morphism;

    fn random_morphism(
        rng: &mut ChaCha8Rng,
        dom: &Self::Object,
        cod: &Self::Object,
        sparsity: f64,
    ) -> Self::Morphism;

    fn random_deterministic(
        rng: &mut ChaCha8Rng,
        dom: &Self::Object,
        cod: &Self::Object,
    ) -> Self::Morphism;

    /// A morphism almost surely equal to `f` under the support's state that
    /// differs from `f` off the support wherever that is possible.
    fn perturb_off_support(
        rng: &mut ChaCha8Rng,
        f: &Self::Morphism,
        support: &SupportObject<Self>,
    ) -> Self::Morphism;

    /// Ordinary inverse as used by the harness, honouring injected mutations.
    fn harness_invert(
        f: &Self::Morphism,
        pi: &Self::Morphism,
        mutation: Option<Mutation>,
    ) -> Result<Self::Morphism> {
        let _ = mutation;
        Self::bayes_invert(f, pi, &Self::default_tol())
    }

    /// 1.0 when an inverse breaks an exact structural postcondition, else 0.0.
    fn inverse_defect(h: &Self::Morphism) -> f64 {
        let _ = h;
        0.0
    }

    fn default_law_tol() -> f64;
}

fn dirichlet_row(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < sparsity {
                0.0
            } else {
                Exp1.sample(rng)
            }
        })
        .collect();
    if row.iter().all(|&v| v == 0.0) {
        row[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= total);
    row
}

impl Sampler for FinStoch<f64> {
    fn random_object(rng: &mut ChaCha8Rng, max_dim: usize) -> FinObject {
        let n = rng.random_range(2..=max_dim.max(2));
        FinObject::indexed(n).expect("nonempty")
    }

    fn random_state(rng: &mut ChaCha8Rng, x: &FinObject, sparsity: f64) -> StochMap<f64> {
        let row = dirichlet_row(rng, x.size(), sparsity);
        StochMap::from_entries_unchecked(FinObject::unit(), x.clone(), row).expect("shape")
    }

    fn special_state(rng: &mut ChaCha8Rng, x: &FinObject, kind: usize) -> StochMap<f64> {
        let n = x.size();
        if kind == 0 {
            StochMap::point(x.clone(), rng.random_range(0..n)).expect("in range")
        } else {
            StochMap::from_entries_unchecked(FinObject::unit(), x.clone(), vec![1.0 / n as f64; n])
                .expect("shape")
        }
    }

    fn random_morphism(
        rng: &mut ChaCha8Rng,
        dom: &FinObject,
        cod: &FinObject,
        sparsity: f64,
    ) -> StochMap<f64> {
        let entries = (0..dom.size())
            .flat_map(|_| dirichlet_row(rng, cod.size(), sparsity))
            .collect();
        StochMap::from_entries_unchecked(dom.clone(), cod.clone(), entries).expect("shape")
    }

    fn random_deterministic(rng: &mut ChaCha8Rng, dom: &FinObject, cod: &FinObject) -> StochMap<f64> {
        let targets: Vec<usize> = (0..dom.size()).map(|_| rng.random_range(0..cod.size())).collect();
        StochMap::deterministic(dom.clone(), cod.clone(), |i| targets[i]).expect("in range")
    }

    fn perturb_off_support(
        rng: &mut ChaCha8Rng,
        f: &StochMap<f64>,
        support: &SupportObject<Self>,
    ) -> StochMap<f64> {
        let mut out = f.clone();
        let on_support: Vec<bool> = (0..f.n_rows())
            .map(|x| support.retraction.compose(&support.section).expect("endo").get(x, x) == &1.0)
            .collect();
        for (x, keep) in on_support.into_iter().enumerate() {
            if !keep {
                let row = dirichlet_row(rng, f.n_cols(), 0.0);
                out = out.with_row(x, &row).expect("row shape");
            }
        }
        out
    }

    fn default_law_tol() -> f64 {
        1e-9
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `G` with `Σ = G Gᵀ`; each column is dropped with probability `sparsity`.
fn random_factor(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> DMatrix<f64> {
    let mut g = normal_matrix(rng, n, n);
    for j in 0..n {
        if rng.random::<f64>() < sparsity {
            g.column_mut(j).fill(0.0);
        }
    }
    g
}

impl Sampler for Gauss<f64> {
    fn random_object(rng: &mut ChaCha8Rng, max_dim: usize) -> GaussObject {
        GaussObject::new(rng.random_range(1..=max_dim.max(1)))
    }

    fn random_state(rng: &mut ChaCha8Rng, x: &GaussObject, sparsity: f64) -> GaussMap<f64> {
        let n = x.dim();
        let mean = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        GaussMap::from_factor(
            GaussObject::unit(),
            x.clone(),
            DMatrix::zeros(n, 0),
            mean,
            random_factor(rng, n, sparsity),
        )
        .expect("shape")
    }

    fn special_state(rng: &mut ChaCha8Rng, x: &GaussObject, kind: usize) -> GaussMap<f64> {
        let n = x.dim();
        let mean = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let cov = if kind == 0 {
            DMatrix::zeros(n, n)
        } else {
            DMatrix::identity(n, n)
        };
        GaussMap::from_parts_unchecked(GaussObject::unit(), x.clone(), DMatrix::zeros(n, 0), mean, cov)
            .expect("shape")
    }

    fn random_morphism(
        rng: &mut ChaCha8Rng,
        dom: &GaussObject,
        cod: &GaussObject,
        sparsity: f64,
    ) -> GaussMap<f64> {
        let (m, n) = (dom.dim(), cod.dim());
        GaussMap::from_factor(
            dom.clone(),
            cod.clone(),
            normal_matrix(rng, n, m),
            DVector::from_fn(n, |_, _| StandardNormal.sample(rng)),
            random_factor(rng, n, sparsity),
        )
        .expect("shape")
    }

    fn random_deterministic(rng: &mut ChaCha8Rng, dom: &GaussObject, cod: &GaussObject) -> GaussMap<f64> {
        let (m, n) = (dom.dim(), cod.dim());
        GaussMap::from_parts_unchecked(
            dom.clone(),
            cod.clone(),
            normal_matrix(rng, n, m),
            DVector::from_fn(n, |_, _| StandardNormal.sample(rng)),
            DMatrix::zeros(n, n),
        )
        .expect("shape")
    }

    fn perturb_off_support(
        rng: &mut ChaCha8Rng,
        f: &GaussMap<f64>,
        support: &SupportObject<Self>,
    ) -> GaussMap<f64> {
        let basis = support.section.a();
        let centre = support.section.b();
        let m = basis.nrows();
        let complement = DMatrix::identity(m, m) - basis * basis.transpose();
        let shift = normal_matrix(rng, f.cod().dim(), m) * complement;
        f.with_affine_part(f.a() + &shift, f.b() - &shift * centre)
            .expect("shape")
    }

    fn harness_invert(
        f: &GaussMap<f64>,
        pi: &GaussMap<f64>,
        mutation: Option<Mutation>,
    ) -> Result<GaussMap<f64>> {
        f.invert_with(
            pi,
            InvertOptions {
                tol: <Self as SupportCategory>::default_tol(),
                symmetrize: mutation != Some(Mutation::SkipSymmetrization),
            },
        )
    }

    fn inverse_defect(h: &GaussMap<f64>) -> f64 {
        if h.sigma() == &h.sigma().transpose() {
            0.0
        } else {
            1.0
        }
    }

    fn default_law_tol() -> f64 {
        1e-8
    }
}
