//! Scalar functions on the four domains that appear throughout: the
//! boundary plane `R^{n-1}`, the half-space `R^n_+`, the sphere `S^{n-1}`
//! and the ball `B_n`.

use alloc::sync::Arc;
use core::fmt;

/// Which domain a function or a quadrature rule lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `R^{n-1}`, points have `n - 1` coordinates.
    Plane,
    /// `R^n_+ = R^{n-1} × (0, ∞)`, points are `(X, x_n)`.
    HalfSpace,
    /// `S^{n-1} ⊂ R^n`.
    Sphere,
    /// The open unit ball `B_n`.
    Ball,
}

impl Domain {
    /// Length of a point vector on this domain for ambient dimension `n`.
    pub fn point_dim(self, n: usize) -> usize {
        match self {
            Domain::Plane => n - 1,
            _ => n,
        }
    }

    /// Topological dimension of the domain.
    pub fn measure_dim(self, n: usize) -> usize {
        match self {
            Domain::Plane | Domain::Sphere => n - 1,
            Domain::HalfSpace | Domain::Ball => n,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Domain::Plane | Domain::HalfSpace)
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Plane => "plane",
            Domain::HalfSpace => "halfspace",
            Domain::Sphere => "sphere",
            Domain::Ball => "ball",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Real-analytic or at least many times differentiable.
    Smooth,
    /// Bounded with possible kinks or jumps.
    Rough,
}

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// An evaluable scalar function together with the metadata quadrature needs.
///
/// `decay` is the exponent `β` in `|f(x)| = O(|x|^{-β})` and is only
/// meaningful on unbounded domains.
#[derive(Clone)]
pub struct FieldFunction {
    domain: Domain,
    n: usize,
    eval: Arc<Evaluator>,
    decay: Option<f64>,
    smoothness: Smoothness,
}

impl FieldFunction {
    pub fn new<F>(domain: Domain, n: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        FieldFunction {
            domain,
            n,
            eval: Arc::new(f),
            decay: None,
            smoothness: Smoothness::Smooth,
        }
    }

    pub fn constant(domain: Domain, n: usize, c: f64) -> Self {
        FieldFunction::new(domain, n, move |_| c)
    }

    pub fn with_decay(mut self, beta: f64) -> Self {
        self.decay = Some(beta);
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.domain.point_dim(self.n));
        (self.eval)(x)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Ambient dimension `n` of the problem the function belongs to.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn decay(&self) -> Option<f64> {
        self.decay
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// `c · f`, keeping the metadata.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        FieldFunction {
            eval: Arc::new(move |x| c * inner(x)),
            ..self.clone()
        }
    }

    /// Pointwise `g(f(x))`; decay metadata is dropped.
    pub fn map<G>(&self, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        FieldFunction {
            eval: Arc::new(move |x| g(inner(x))),
            decay: None,
            ..self.clone()
        }
    }
}

impl fmt::Debug for FieldFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldFunction")
            .field("domain", &self.domain)
            .field("n", &self.n)
            .field("decay", &self.decay)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}
