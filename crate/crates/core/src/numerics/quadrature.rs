//! Adaptive Gauss-Legendre quadrature with user breakpoints, plus a
//! semi-infinite variant for algebraically decaying integrands on `[1, inf)`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Tolerances and refinement limits for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Gauss-Legendre nodes per panel.
    pub base_order: usize,
    pub max_panels: usize,
    /// Points at which the interval is always split.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            base_order: 32,
            max_panels: 4096,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_breakpoints(mut self, breakpoints: impl Into<Vec<f64>>) -> Self {
        self.breakpoints = breakpoints.into();
        self
    }

    pub fn with_tolerance(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.base_order < 2 {
            return Err(Error::Domain(
                "quadrature base order must be at least 2".into(),
            ));
        }
        if self.max_panels == 0 {
            return Err(Error::Domain("max_panels must be positive".into()));
        }
        Ok(())
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let theta = std::f64::consts::PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared cached rule of order `n`.
    pub fn cached(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(Self::new(n)))
            .clone()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fixed-rule estimate of `int_a^b f`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

struct Panel {
    a: f64,
    b: f64,
    estimate: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn make_panel<F: Fn(f64) -> f64>(rule: &GaussLegendre, f: &F, a: f64, b: f64) -> Result<Panel> {
    let whole = rule.apply(f, a, b);
    let mid = 0.5 * (a + b);
    let refined = rule.apply(f, a, mid) + rule.apply(f, mid, b);
    if !refined.is_finite() || !whole.is_finite() {
        return Err(Error::Domain(format!(
            "integrand is not finite on panel [{a}, {b}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        estimate: refined,
        error: (whole - refined).abs(),
    })
}

/// Adaptive estimate of `int_a^b f(x) dx`.
///
/// The interval is split at every breakpoint in `(a, b)`; the panel with the
/// largest error estimate is bisected until the summed error meets
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!(
            "invalid integration interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussLegendre::cached(spec.base_order);

    let mut cuts = vec![a];
    let mut interior: Vec<f64> = spec
        .breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    cuts.extend(interior);
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        heap.push(make_panel(&rule, &f, w[0], w[1])?);
    }

    loop {
        let (total, error) = heap
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.estimate, e + p.error));
        if error <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        if heap.len() >= spec.max_panels {
            return Err(Error::NonConvergence {
                estimate: total,
                error_bound: error,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            return Err(Error::NonConvergence {
                estimate: total,
                error_bound: error,
                panels: heap.len() + 1,
            });
        }
        heap.push(make_panel(&rule, &f, worst.a, mid)?);
        heap.push(make_panel(&rule, &f, mid, worst.b)?);
    }
}

/// Estimate of `int_1^inf f(t) dt` via `t = 1 / w^2`, `w` in `(0, 1]`.
///
/// Breakpoints are given in `t` and mapped to `w`. The integrand should decay
/// at least like `t^(-3/2)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    let mapped: Vec<f64> = spec
        .breakpoints
        .iter()
        .filter(|&&t| t > 1.0 && t.is_finite())
        .map(|&t| 1.0 / t.sqrt())
        .collect();
    let inner = QuadratureSpec {
        breakpoints: mapped,
        ..spec.clone()
    };
    integrate(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let t = 1.0 / (w * w);
            2.0 * f(t) / (w * w * w)
        },
        0.0,
        1.0,
        &inner,
    )
}
