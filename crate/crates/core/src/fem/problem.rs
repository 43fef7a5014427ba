use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::geometry2d::{SpdTensor, Vec2};

pub type ScalarField = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type TensorField = Arc<dyn Fn(Vec2) -> Result<SpdTensor> + Send + Sync>;

#[derive(Clone)]
pub enum Diffusion {
    Constant(SpdTensor),
    /// Pointwise tensor; may fail with `NotSpd` where the field is invalid.
    Field(TensorField),
}

impl Diffusion {
    pub fn at(&self, p: Vec2) -> Result<SpdTensor> {
        match self {
            Diffusion::Constant(d) => Ok(*d),
            Diffusion::Field(f) => f(p),
        }
    }

    pub fn as_constant(&self) -> Option<SpdTensor> {
        match self {
            Diffusion::Constant(d) => Some(*d),
            Diffusion::Field(_) => None,
        }
    }
}

impl fmt::Debug for Diffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diffusion::Constant(d) => f.debug_tuple("Constant").field(d).finish(),
            Diffusion::Field(_) => f.write_str("Field(..)"),
        }
    }
}

/// Boundary value problem `-div(D grad u) = f` in the domain, `u = g` on
/// its boundary.
#[derive(Clone)]
pub struct ProblemSpec {
    pub diffusion: Diffusion,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
}

impl ProblemSpec {
    /// Constant diffusion with `f = 0` and `g = 0`.
    pub fn constant(d: SpdTensor) -> Self {
        Self::with_diffusion(Diffusion::Constant(d))
    }

    pub fn with_diffusion(diffusion: Diffusion) -> Self {
        Self {
            diffusion,
            source: Arc::new(|_| 0.0),
            dirichlet: Arc::new(|_| 0.0),
        }
    }

    pub fn field(f: impl Fn(Vec2) -> Result<SpdTensor> + Send + Sync + 'static) -> Self {
        Self::with_diffusion(Diffusion::Field(Arc::new(f)))
    }

    pub fn source(mut self, f: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn dirichlet(mut self, g: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        self.dirichlet = Arc::new(g);
        self
    }

    /// Same problem with the diffusion multiplied by `c > 0`.
    pub fn scaled_diffusion(&self, c: f64) -> Result<Self> {
        let diffusion = match &self.diffusion {
            Diffusion::Constant(d) => Diffusion::Constant(d.scaled(c)?),
            Diffusion::Field(f) => {
                let f = f.clone();
                Diffusion::Field(Arc::new(move |p| f(p)?.scaled(c)))
            }
        };
        Ok(Self {
            diffusion,
            ..self.clone()
        })
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("diffusion", &self.diffusion)
            .finish_non_exhaustive()
    }
}
