//! Runtime-tagged objects and morphisms, for callers (such as a model file)
//! that mix both instances and only learn the instance at run time.

use crate::error::{Error, Result};
use crate::finstoch::{FinObject, StochMap};
use crate::gauss::{GaussMap, GaussObject};
use crate::markov::Instance;

#[derive(Debug, Clone, PartialEq)]
pub enum AnyObject {
    Finite(FinObject),
    Gaussian(GaussObject),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyMorphism {
    Finite(StochMap<f64>),
    Gaussian(GaussMap<f64>),
}

impl AnyObject {
    pub fn instance(&self) -> Instance {
        match self {
            AnyObject::Finite(_) => Instance::Finite,
            AnyObject::Gaussian(_) => Instance::Gaussian,
        }
    }

    /// Number of points (finite) or dimension (Gaussian).
    pub fn size(&self) -> usize {
        match self {
            AnyObject::Finite(x) => x.size(),
            AnyObject::Gaussian(x) => x.dim(),
        }
    }
}

fn mismatch(left: Instance, right: Instance) -> Error {
    Error::InstanceMismatch {
        left: left.name(),
        right: right.name(),
    }
}

impl AnyMorphism {
    pub fn instance(&self) -> Instance {
        match self {
            AnyMorphism::Finite(_) => Instance::Finite,
            AnyMorphism::Gaussian(_) => Instance::Gaussian,
        }
    }

    pub fn dom(&self) -> AnyObject {
        match self {
            AnyMorphism::Finite(f) => AnyObject::Finite(f.dom().clone()),
            AnyMorphism::Gaussian(f) => AnyObject::Gaussian(f.dom().clone()),
        }
    }

    pub fn cod(&self) -> AnyObject {
        match self {
            AnyMorphism::Finite(f) => AnyObject::Finite(f.cod().clone()),
            AnyMorphism::Gaussian(f) => AnyObject::Gaussian(f.cod().clone()),
        }
    }

    pub fn identity(x: &AnyObject) -> Self {
        match x {
            AnyObject::Finite(x) => AnyMorphism::Finite(StochMap::identity(x)),
            AnyObject::Gaussian(x) => AnyMorphism::Gaussian(GaussMap::identity(x)),
        }
    }

    pub fn compose(&self, g: &Self) -> Result<Self> {
        match (self, g) {
            (AnyMorphism::Finite(f), AnyMorphism::Finite(g)) => Ok(AnyMorphism::Finite(f.compose(g)?)),
            (AnyMorphism::Gaussian(f), AnyMorphism::Gaussian(g)) => {
                Ok(AnyMorphism::Gaussian(f.compose(g)?))
            }
            _ => Err(mismatch(self.instance(), g.instance())),
        }
    }

    pub fn tensor(&self, g: &Self) -> Result<Self> {
        match (self, g) {
            (AnyMorphism::Finite(f), AnyMorphism::Finite(g)) => Ok(AnyMorphism::Finite(f.tensor(g))),
            (AnyMorphism::Gaussian(f), AnyMorphism::Gaussian(g)) => {
                Ok(AnyMorphism::Gaussian(f.tensor(g)))
            }
            _ => Err(mismatch(self.instance(), g.instance())),
        }
    }

    pub fn as_finite(&self) -> Result<&StochMap<f64>> {
        match self {
            AnyMorphism::Finite(f) => Ok(f),
            other => Err(mismatch(Instance::Finite, other.instance())),
        }
    }

    pub fn as_gaussian(&self) -> Result<&GaussMap<f64>> {
        match self {
            AnyMorphism::Gaussian(f) => Ok(f),
            other => Err(mismatch(Instance::Gaussian, other.instance())),
        }
    }
}
