//! LCHS kernels `g(k) = f(k)/(1 - ik)`, truncation, sampling and quadrature.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};

use rand::Rng;

use crate::error::{input, Error, Result};
use crate::quad::{gauss_legendre, Integrator};
use crate::C64;

/// Points of the tabulated inverse CDF used for the β family.
pub const TABLE_POINTS: usize = 65_536;
const TABLE_MAX_POINTS: usize = 1 << 22;
const TABLE_MASS_RTOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// `g(k) = 1/(π(1+k²))`.
    Cauchy,
    /// `f(k) = exp(-(1+ik)^β)/C_β` with `C_β = 2π e^{-2^β}`.
    Beta(f64),
}

impl KernelFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelFamily::Cauchy => Ok(()),
            KernelFamily::Beta(b) if b > 0.0 && b < 1.0 => Ok(()),
            KernelFamily::Beta(b) => input(format!("β must lie in (0, 1), got {b}")),
        }
    }

    /// Normalization constant entering the quadrature node count.
    pub fn constant(&self) -> f64 {
        match *self {
            KernelFamily::Cauchy => PI,
            KernelFamily::Beta(b) => beta_constant(b),
        }
    }

    pub fn g(&self, k: f64) -> C64 {
        match *self {
            KernelFamily::Cauchy => C64::new(1.0 / (PI * (1.0 + k * k)), 0.0),
            KernelFamily::Beta(b) => {
                let f = (-C64::new(1.0, k).powf(b)).exp() / beta_constant(b);
                f / C64::new(1.0, -k)
            }
        }
    }

    pub fn abs_g(&self, k: f64) -> f64 {
        self.g(k).norm()
    }
}

/// `C_β = 2π e^{-2^β}`.
pub fn beta_constant(beta: f64) -> f64 {
    2.0 * PI * libm::exp(-libm::pow(2.0, beta))
}

/// Piecewise-linear tabulation of `|g|` on a uniform grid over `[-k_c, k_c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub k_min: f64,
    pub spacing: f64,
    pub abs_g: Vec<f64>,
    /// Cumulative trapezoid mass, starting at 0.
    pub cumulative: Vec<f64>,
}

impl KernelTable {
    fn build(family: KernelFamily, k_c: f64, points: usize) -> Self {
        let spacing = 2.0 * k_c / (points - 1) as f64;
        let abs_g: Vec<f64> = (0..points).map(|i| family.abs_g(-k_c + spacing * i as f64)).collect();
        let mut cumulative = Vec::with_capacity(points);
        cumulative.push(0.0);
        for w in abs_g.windows(2) {
            let last = *cumulative.last().expect("nonempty");
            cumulative.push(last + 0.5 * spacing * (w[0] + w[1]));
        }
        Self { k_min: -k_c, spacing, abs_g, cumulative }
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative.last().expect("nonempty")
    }

    /// Normalized tabulated density at `k`.
    pub fn density(&self, k: f64) -> f64 {
        let x = (k - self.k_min) / self.spacing;
        let i = (libm::floor(x) as usize).min(self.abs_g.len() - 2);
        let w = x - i as f64;
        (self.abs_g[i] * (1.0 - w) + self.abs_g[i + 1] * w) / self.mass()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let target = rng.random::<f64>() * self.mass();
        let i = self.cumulative.partition_point(|&c| c <= target).clamp(1, self.cumulative.len() - 1) - 1;
        let (fa, fb) = (self.abs_g[i], self.abs_g[i + 1]);
        let u = (target - self.cumulative[i]) / self.spacing;
        // invert fa·x + (fb - fa)·x²/2 = u on [0, 1]
        let disc = (fa * fa + 2.0 * (fb - fa) * u).max(0.0);
        let denom = fa + libm::sqrt(disc);
        let x = if denom > 0.0 { (2.0 * u / denom).clamp(0.0, 1.0) } else { 0.5 };
        self.k_min + self.spacing * (i as f64 + x)
    }
}

/// A truncated kernel ready for sampling and quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub eps: f64,
    pub k_c: f64,
    /// Full-line `‖g‖₁`.
    pub l1: f64,
    /// `∫_{-k_c}^{k_c} |g|`.
    pub mass: f64,
    pub table: Option<KernelTable>,
}

/// One drawn kernel sample; `weight · phase · X(k)` is an unbiased estimate of `∫ g X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSample {
    pub k: f64,
    pub phase: C64,
    /// Density the sample was drawn from, at `k`.
    pub pd: f64,
    /// `|g(k)| / pd`; equals the truncated mass for exact inverse-CDF sampling.
    pub weight: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, eps: f64) -> Result<Self> {
        family.validate()?;
        if !(eps > 0.0 && eps < 1.0) {
            return input(format!("truncation ε must lie in (0, 1), got {eps}"));
        }
        let l1 = l1_norm(family)?;
        let k_c = truncation_kc(family, eps)?;
        let (mass, table) = match family {
            KernelFamily::Cauchy => (2.0 * libm::atan(k_c) / PI, None),
            KernelFamily::Beta(_) => {
                let mass = truncated_mass(family, k_c)?;
                let mut points = TABLE_POINTS;
                let mut table = KernelTable::build(family, k_c, points);
                while (table.mass() - mass).abs() > TABLE_MASS_RTOL * mass && points < TABLE_MAX_POINTS {
                    points *= 2;
                    table = KernelTable::build(family, k_c, points);
                }
                (mass, Some(table))
            }
        };
        Ok(Self { family, eps, k_c, l1, mass, table })
    }

    pub fn cauchy(eps: f64) -> Result<Self> {
        Self::new(KernelFamily::Cauchy, eps)
    }

    pub fn beta(beta: f64, eps: f64) -> Result<Self> {
        Self::new(KernelFamily::Beta(beta), eps)
    }

    pub fn g_value(&self, k: f64) -> C64 {
        self.family.g(k)
    }

    /// Density the sampler draws from.
    pub fn density(&self, k: f64) -> f64 {
        if k.abs() > self.k_c {
            return 0.0;
        }
        match &self.table {
            Some(t) => t.density(k),
            None => self.family.abs_g(k) / self.mass,
        }
    }

    pub fn sample_k<R: Rng + ?Sized>(&self, rng: &mut R) -> KSample {
        let k = match &self.table {
            Some(t) => t.sample(rng),
            None => {
                let a = libm::atan(self.k_c);
                libm::tan(-a + 2.0 * a * rng.random::<f64>()).clamp(-self.k_c, self.k_c)
            }
        };
        let g = self.g_value(k);
        let pd = self.density(k);
        let (phase, weight) = match self.family {
            KernelFamily::Cauchy => (C64::new(1.0, 0.0), self.mass),
            KernelFamily::Beta(_) => (g / g.norm(), g.norm() / pd),
        };
        KSample { k, phase, pd, weight }
    }
}

/// Full-line `‖g‖₁`, extending the range until the tail is below 1e-12 relative.
pub fn l1_norm(family: KernelFamily) -> Result<f64> {
    family.validate()?;
    if family == KernelFamily::Cauchy {
        return Ok(1.0);
    }
    let q = Integrator::default();
    let f = |k: f64| 2.0 * family.abs_g(k);
    let mut total = q.integrate(f, 0.0, 8.0, 1e-14)?;
    let mut edge = 8.0;
    loop {
        let piece = q.integrate(f, edge, 2.0 * edge, 1e-15 * total)?;
        total += piece;
        edge *= 2.0;
        if piece < 1e-13 * total || edge > 1e12 {
            break;
        }
    }
    if !total.is_finite() {
        return Err(Error::Numerical("kernel L1 norm diverged".into()));
    }
    Ok(total)
}

/// `∫_{-k_c}^{k_c} |g|`.
pub fn truncated_mass(family: KernelFamily, k_c: f64) -> Result<f64> {
    match family {
        KernelFamily::Cauchy => Ok(2.0 * libm::atan(k_c) / PI),
        KernelFamily::Beta(_) => {
            let q = Integrator::default();
            let f = |k: f64| 2.0 * family.abs_g(k);
            // split on a doubling grid so the integrator sees a smooth range
            let (mut total, mut a) = (0.0, 0.0);
            let mut b = k_c.min(4.0);
            while a < k_c {
                total += q.integrate(f, a, b, 1e-15)?;
                a = b;
                b = (2.0 * b).min(k_c);
            }
            Ok(total)
        }
    }
}

/// `k_c` with `∫_{-k_c}^{k_c}|g| = (1 - ε)‖g‖₁`.
pub fn truncation_kc(family: KernelFamily, eps: f64) -> Result<f64> {
    family.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return input(format!("truncation ε must lie in (0, 1), got {eps}"));
    }
    if family == KernelFamily::Cauchy {
        return Ok(1.0 / libm::tan(0.5 * PI * eps));
    }
    let target = (1.0 - eps) * l1_norm(family)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    while truncated_mass(family, hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numerical("truncation length search diverged".into()));
        }
    }
    while hi - lo > 1e-11 * hi {
        let mid = 0.5 * (lo + hi);
        if truncated_mass(family, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Composite Gauss–Legendre rule over `[-k_c, k_c]` with weights `c = w·g(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<(f64, C64)>,
    /// Panel width actually used (coverage of `[-k_c, k_c]` is exact).
    pub h: f64,
    pub q: usize,
    pub panels: usize,
    /// Total node count `panels · Q`.
    pub m: usize,
}

impl QuadratureRule {
    /// Panels of width at most `h`, `q` nodes each.
    pub fn composite(spec: &KernelSpec, h: f64, q: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || q == 0 {
            return input(format!("quadrature needs h > 0 and Q ≥ 1, got h = {h}, Q = {q}"));
        }
        let span = 2.0 * spec.k_c;
        let panels = libm::ceil(span / h - 1e-9).max(1.0) as usize;
        let width = span / panels as f64;
        let (x, w) = gauss_legendre(q);
        let mut nodes = Vec::with_capacity(panels * q);
        for p in 0..panels {
            let mid = -spec.k_c + width * (p as f64 + 0.5);
            for (xi, wi) in x.iter().zip(&w) {
                let k = mid + 0.5 * width * xi;
                nodes.push((k, spec.g_value(k) * (0.5 * width * wi)));
            }
        }
        Ok(Self { nodes, h: width, q, panels, m: panels * q })
    }

    pub fn weight_sum(&self) -> C64 {
        self.nodes.iter().map(|(_, c)| c).sum()
    }

    pub fn abs_weight_sum(&self) -> f64 {
        self.nodes.iter().map(|(_, c)| c.norm()).sum()
    }
}

/// Planner parameters `h = 1/(e T max_norm)` and `Q = ⌈log(8k_c/(3Cε))/log 4⌉`.
pub fn quadrature_parameters(spec: &KernelSpec, horizon: f64, max_norm: f64) -> Result<(f64, usize)> {
    if !(horizon > 0.0 && max_norm > 0.0) {
        return input("quadrature planning needs T > 0 and a positive generator norm");
    }
    let h = 1.0 / (E * horizon * max_norm);
    let ratio = 8.0 * spec.k_c / (3.0 * spec.family.constant() * spec.eps);
    let q = libm::ceil(libm::log(ratio) / libm::log(4.0)).max(1.0) as usize;
    Ok((h, q))
}

pub fn quadrature_rule(spec: &KernelSpec, horizon: f64, max_norm: f64) -> Result<QuadratureRule> {
    let (h, q) = quadrature_parameters(spec, horizon, max_norm)?;
    QuadratureRule::composite(spec, h, q)
}
