//! Randomised checks of the categorical laws on both instances.
//!
//! Every law is run on `cases` seeded random cases per instance. A case's
//! residual is the largest sup-norm discrepancy it finds; structural
//! disagreements (a boolean that should match but does not) score `1.0`.

mod cases;
mod gen;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finstoch::FinStoch;
use crate::gauss::Gauss;
use crate::markov::Instance;

pub use gen::{CaseGen, InstanceMix, Mutation, Sampler};

macro_rules! laws {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Law {
            $($variant),*
        }

        impl Law {
            pub const ALL: &'static [Law] = &[$(Law::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Law::$variant => $name),*
                }
            }
        }
    };
}

laws! {
    Comonoid => "comonoid",
    BayesJoint => "bayes-joint",
    InverseUniqueness => "inverse-uniqueness",
    BijectionPsi => "bijection-psi",
    SupportRepresentability => "support-representability",
    SectionRetraction => "section-retraction",
    RestrictFunctorial => "restrict-functorial",
    SFunctorial => "S-functorial",
    TFunctorial => "T-functorial",
    GammaNatural => "gamma-natural",
    GammaAssoc => "gamma-assoc",
    GammaUnitor => "gamma-unitor",
    CopyInverse => "copy-inverse",
    MarginalNatural => "marginal-natural",
    LensAssoc => "lens-assoc",
    AsEqualBaseChangeForward => "as-equal-base-change-forward",
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Law::ALL
            .iter()
            .copied()
            .find(|law| law.name() == s)
            .ok_or_else(|| Error::UnknownLaw(s.to_string()))
    }
}

impl Law {
    /// Default tolerance for this law on an instance.
    pub fn tolerance(self, instance: Instance) -> f64 {
        match (self, instance) {
            (Law::Comonoid, _) => 0.0,
            (_, Instance::Finite) => FinStoch::<f64>::default_law_tol(),
            (_, Instance::Gaussian) => Gauss::<f64>::default_law_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: Instance,
    pub case: u64,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Smallest failing case found by re-running with lower dimension caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shrunk {
    pub max_dim: usize,
    pub case: u64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub instance: Instance,
    pub cases_run: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub failures: Vec<Failure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrunk: Option<Shrunk>,
}

/// Outcome of one law. `passed` holds exactly when `failures` is empty, and
/// each instance segment fails exactly when its residual exceeds its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub cases_run: usize,
    pub max_residual: f64,
    pub passed: bool,
    pub failures: Vec<Failure>,
    pub instances: Vec<InstanceReport>,
}

const SHRINK_ATTEMPTS: u64 = 100;

fn case_seed(seed: u64, law: Law, instance: Instance, case: u64) -> u64 {
    let law_index = Law::ALL.iter().position(|l| *l == law).unwrap_or(0) as u64;
    let mut z = seed
        ^ law_index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (instance as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ case.wrapping_mul(0x1656_67B1_9E37_79F9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn eval_case<C: Sampler>(
    law: Law,
    gen: &CaseGen,
    instance: Instance,
    tol: f64,
    case: u64,
    max_dim: usize,
) -> std::result::Result<f64, (f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed(gen.seed, law, instance, case));
    let ctx = cases::Case {
        gen,
        max_dim,
        tol,
        index: case,
    };
    match cases::run_case::<C>(law, &mut rng, &ctx) {
        Ok(r) if r.is_nan() => Err((f64::MAX, "residual is NaN".into())),
        Ok(r) => Ok(r),
        Err(e) => Err((f64::MAX, e.to_string())),
    }
}

fn run_instance<C: Sampler>(law: Law, gen: &CaseGen, tol: f64) -> InstanceReport {
    let instance = C::INSTANCE;
    let max_dim = gen.max_dim.max(2);
    let outcomes: Vec<_> = (0..gen.cases as u64)
        .into_par_iter()
        .map(|case| (case, eval_case::<C>(law, gen, instance, tol, case, max_dim)))
        .collect();
    let mut failures = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (case, outcome) in outcomes {
        let (residual, error) = match outcome {
            Ok(r) => (r, None),
            Err((r, e)) => (r, Some(e)),
        };
        max_residual = max_residual.max(residual);
        if residual > tol || error.is_some() {
            failures.push(Failure {
                instance,
                case,
                residual,
                error,
            });
        }
    }
    let shrunk = (!failures.is_empty()).then(|| shrink::<C>(law, gen, tol, max_dim)).flatten();
    InstanceReport {
        instance,
        cases_run: gen.cases,
        tolerance: tol,
        max_residual,
        failures,
        shrunk,
    }
}

fn shrink<C: Sampler>(law: Law, gen: &CaseGen, tol: f64, max_dim: usize) -> Option<Shrunk> {
    let per_dim = (SHRINK_ATTEMPTS / max_dim.saturating_sub(1).max(1) as u64).max(1);
    let mut attempts = 0;
    for dim in 2..=max_dim {
        for case in 0..per_dim {
            if attempts == SHRINK_ATTEMPTS {
                return None;
            }
            attempts += 1;
            let residual = match eval_case::<C>(law, gen, C::INSTANCE, tol, case, dim) {
                Ok(r) => r,
                Err((r, _)) => r,
            };
            if residual > tol {
                return Some(Shrunk {
                    max_dim: dim,
                    case,
                    residual,
                });
            }
        }
    }
    None
}

/// Run one law by name on the instances selected by `gen`.
pub fn run_law(name: &str, gen: &CaseGen, tol: Option<f64>) -> Result<LawReport> {
    let law: Law = name.parse()?;
    let instances: Vec<InstanceReport> = gen
        .instance_mix
        .instances()
        .into_iter()
        .map(|instance| {
            let tol = tol.unwrap_or_else(|| law.tolerance(instance));
            match instance {
                Instance::Finite => run_instance::<FinStoch<f64>>(law, gen, tol),
                Instance::Gaussian => run_instance::<Gauss<f64>>(law, gen, tol),
            }
        })
        .collect();
    let failures: Vec<Failure> = instances.iter().flat_map(|r| r.failures.clone()).collect();
    Ok(LawReport {
        law: law.name().to_string(),
        cases_run: instances.iter().map(|r| r.cases_run).sum(),
        max_residual: instances.iter().fold(0.0, |m, r| m.max(r.max_residual)),
        passed: failures.is_empty(),
        failures,
        instances,
    })
}

pub fn run_all(gen: &CaseGen) -> Vec<LawReport> {
    Law::ALL
        .iter()
        .map(|law| run_law(law.name(), gen, None).expect("catalogue names parse"))
        .collect()
}
