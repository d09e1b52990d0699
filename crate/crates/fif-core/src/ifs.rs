//! Interpolation iterated function systems.
//!
//! An interpolation IFS over data nodes `(x_0, y_0), ..., (x_N, y_N)` is a
//! family of maps `w_n(x, y) = (L_n(x), F_n(x, y))`, `n = 1..N`, where each
//! `L_n` is an affine contraction taking the whole data interval onto the
//! n-th subinterval and each `F_n` contracts vertically. When the endpoint
//! matching conditions hold, the attractor of the family is the graph of a
//! continuous function through the nodes.
//!
//! Three branch-map families are supported: affine (`c x + d y + e`),
//! sinusoidal (`xi y ± sin(pi x)`), and analytic conjugates built by
//! [`ifs_from_analytic`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::ScalarFn;

/// Tolerance scale for the endpoint condition residuals reported by
/// [`InterpolationIFS::validate`].
const CONDITION_TOL: f64 = 1e-12;

/// Grid resolution for sampled derivative bounds of non-affine branches.
const BOUND_GRID: usize = 256;

/// Safety inflation applied to sampled (non-exact) derivative bounds.
const BOUND_INFLATION: f64 = 1.10;

/// Grid resolution used by [`ifs_from_analytic`] for monotonicity and
/// contraction-ratio checks.
const ANALYTIC_GRID: usize = 1024;

/// Largest shear coefficient tried before giving up on the analytic
/// construction.
const MAX_SHEAR: f64 = (1u64 << 30) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::DegenerateInterval(lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    /// Closed interval with possibly infinite endpoints, for validity strips.
    pub fn unbounded(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// `count` evenly spaced points including both endpoints.
    pub fn linspace(&self, count: usize) -> Vec<f64> {
        if count == 1 {
            return vec![self.midpoint()];
        }
        let step = self.len() / (count - 1) as f64;
        (0..count).map(|i| self.lo + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataNode {
    pub x: f64,
    pub y: f64,
}

impl DataNode {
    pub fn new(x: f64, y: f64) -> Self {
        DataNode { x, y }
    }
}

/// The map `x -> a x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap1D {
    pub a: f64,
    pub b: f64,
}

impl AffineMap1D {
    pub fn new(a: f64, b: f64) -> Self {
        AffineMap1D { a, b }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    pub fn invert(&self, x: f64) -> f64 {
        (x - self.b) / self.a
    }

    /// `self` after `other`: x -> self(other(x)).
    pub fn compose(&self, other: &AffineMap1D) -> AffineMap1D {
        AffineMap1D {
            a: self.a * other.a,
            b: self.a * other.b + self.b,
        }
    }

    pub fn inverse_map(&self) -> AffineMap1D {
        AffineMap1D {
            a: 1.0 / self.a,
            b: -self.b / self.a,
        }
    }

    pub fn fixed_point(&self) -> f64 {
        self.b / (1.0 - self.a)
    }

    /// Image of an interval under an orientation-preserving map.
    pub fn map_interval(&self, iv: &Interval) -> Interval {
        Interval {
            lo: self.apply(iv.lo),
            hi: self.apply(iv.hi),
        }
    }

    pub fn invert_interval(&self, iv: &Interval) -> Interval {
        Interval {
            lo: self.invert(iv.lo),
            hi: self.invert(iv.hi),
        }
    }
}

/// Conjugate branch produced by the analytic construction. With shear
/// coefficients `(c, d, e)` the branch value is
/// `F(x, y) = (v(c x + d y + e) - c L(x) - e) / d` and its inverse in y is
/// `F*(x, y) = (v_inv(c x + d y + e) - c L^{-1}(x) - e) / d`.
/// The unsheared construction has `(c, d, e) = (0, 1, 0)`, i.e. `F = v(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateBranch {
    pub v: ScalarFn,
    pub v_inv: ScalarFn,
    pub shear_c: f64,
    pub shear_d: f64,
    pub shear_e: f64,
    pub l: AffineMap1D,
    /// Admissible values of the sheared ordinate `c x + d y + e`.
    pub strip: Interval,
}

impl ConjugateBranch {
    fn ordinate(&self, x: f64, y: f64) -> f64 {
        self.shear_c * x + self.shear_d * y + self.shear_e
    }

    fn check_strip(&self, u: f64) -> Result<f64> {
        if self.strip.contains(u) {
            Ok(u)
        } else {
            Err(Error::OutsideValidityStrip {
                value: u,
                lo: self.strip.lo,
                hi: self.strip.hi,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchMap {
    /// `F(x, y) = c x + d y + e`
    Affine {
        c: f64,
        d: f64,
        e: f64,
    },
    /// `F(x, y) = xi y + sign sin(pi x)`
    Sinusoidal {
        xi: f64,
        sign: f64,
    },
    Conjugate(ConjugateBranch),
}

impl BranchMap {
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            BranchMap::Affine { c, d, e } => Ok(c * x + d * y + e),
            BranchMap::Sinusoidal { xi, sign } => {
                Ok(xi * y + sign * (std::f64::consts::PI * x).sin())
            }
            BranchMap::Conjugate(cj) => {
                let u = cj.check_strip(cj.ordinate(x, y))?;
                Ok((cj.v.eval(u) - cj.shear_c * cj.l.apply(x) - cj.shear_e) / cj.shear_d)
            }
        }
    }

    /// Inverse in the second coordinate: solves `F(L^{-1}(x), t) = y` for t.
    /// `x_preimage` must be `L^{-1}(x)`; passing it in avoids recomputing the
    /// inverse x-chain during continuation unwinding.
    pub fn invert_y(&self, branch_index: usize, x: f64, x_preimage: f64, y: f64) -> Result<f64> {
        match self {
            BranchMap::Affine { c, d, e } => {
                if *d == 0.0 {
                    return Err(Error::NotInvertibleInY(branch_index));
                }
                Ok((y - e - c * x_preimage) / d)
            }
            BranchMap::Sinusoidal { xi, sign } => {
                if *xi == 0.0 {
                    return Err(Error::NotInvertibleInY(branch_index));
                }
                Ok((y - sign * (std::f64::consts::PI * x_preimage).sin()) / xi)
            }
            BranchMap::Conjugate(cj) => {
                let u = cj.check_strip(cj.ordinate(x, y))?;
                Ok((cj.v_inv.eval(u) - cj.shear_c * x_preimage - cj.shear_e) / cj.shear_d)
            }
        }
    }

    pub fn dx(&self, x: f64, y: f64) -> f64 {
        match self {
            BranchMap::Affine { c, .. } => *c,
            BranchMap::Sinusoidal { sign, .. } => {
                sign * std::f64::consts::PI * (std::f64::consts::PI * x).cos()
            }
            BranchMap::Conjugate(cj) => {
                let u = cj.ordinate(x, y);
                cj.shear_c * (cj.v.derivative(u) - cj.l.a) / cj.shear_d
            }
        }
    }

    pub fn dy(&self, x: f64, y: f64) -> f64 {
        match self {
            BranchMap::Affine { d, .. } => *d,
            BranchMap::Sinusoidal { xi, .. } => *xi,
            BranchMap::Conjugate(cj) => cj.v.derivative(cj.ordinate(x, y)),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, BranchMap::Affine { .. })
    }
}

/// Sup bounds of `|dF/dx|` and `|dF/dy|` for one branch over the strip
/// `x in domain`, `y in y_range`. The bool is true when the bound is exact.
fn branch_bounds(branch: &BranchMap, domain: &Interval, y_range: &Interval) -> (f64, f64, bool) {
    match branch {
        BranchMap::Affine { c, d, .. } => (c.abs(), d.abs(), true),
        BranchMap::Sinusoidal { xi, .. } => {
            // sup |pi cos(pi x)| over the domain: exactly pi when the domain
            // contains an integer, otherwise attained at an endpoint.
            let m = if domain.lo.ceil() <= domain.hi.floor() {
                std::f64::consts::PI
            } else {
                let pi = std::f64::consts::PI;
                pi * (pi * domain.lo)
                    .cos()
                    .abs()
                    .max((pi * domain.hi).cos().abs())
            };
            (m, xi.abs(), true)
        }
        BranchMap::Conjugate(_) => {
            let xs = domain.linspace(BOUND_GRID);
            let ys = y_range.linspace(64);
            let (mut mx, mut my) = (0.0f64, 0.0f64);
            for &x in &xs {
                for &y in &ys {
                    let gx = branch.dx(x, y).abs();
                    let gy = branch.dy(x, y).abs();
                    if gx.is_finite() {
                        mx = mx.max(gx);
                    }
                    if gy.is_finite() {
                        my = my.max(gy);
                    }
                }
            }
            (mx * BOUND_INFLATION, my * BOUND_INFLATION, false)
        }
    }
}

/// Triangular affine plane map `(x, y) -> (a x + b, c x + d y + e)`, the
/// closed composition algebra behind affine interpolation branches.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TriAffine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl TriAffine {
    pub fn identity() -> TriAffine {
        TriAffine {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
            e: 0.0,
        }
    }

    /// The plane map of one affine branch. Panics on non-affine branches;
    /// callers check `is_affine` first.
    pub fn of(l: &AffineMap1D, f: &BranchMap) -> TriAffine {
        match *f {
            BranchMap::Affine { c, d, e } => TriAffine {
                a: l.a,
                b: l.b,
                c,
                d,
                e,
            },
            _ => unreachable!("caller guarantees an affine branch"),
        }
    }

    /// self after other.
    pub fn compose(&self, o: &TriAffine) -> TriAffine {
        TriAffine {
            a: self.a * o.a,
            b: self.a * o.b + self.b,
            c: self.c * o.a + self.d * o.c,
            d: self.d * o.d,
            e: self.c * o.b + self.d * o.e + self.e,
        }
    }

    pub fn inverse(&self) -> TriAffine {
        let a = 1.0 / self.a;
        let d = 1.0 / self.d;
        TriAffine {
            a,
            b: -self.b * a,
            c: -self.c * a * d,
            d,
            e: (self.c * self.b * a - self.e) * d,
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a * x + self.b, self.c * x + self.d * y + self.e)
    }
}

/// Validation outcome: endpoint condition residuals, derivative bounds and
/// the taxicab-metric contraction certificate.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// Worst residual of the x-endpoint conditions `L_n(x_0) = x_{n-1}`,
    /// `L_n(x_N) = x_n`.
    pub residual_a: f64,
    /// Worst residual of `F_1(x_0, y_0) = y_0`, `F_N(x_N, y_N) = y_N`.
    pub residual_b: f64,
    /// Worst residual of the branch-join condition
    /// `F_{n+1}(x_0, y_0) = F_n(x_N, y_N)`.
    pub residual_c: f64,
    pub conditions_pass: bool,
    /// Sup of `|dF_n/dx|` over all branches.
    pub m_bound: f64,
    /// Sup of `|dF_n/dy|` over all branches; must be below 1.
    pub s_bound: f64,
    /// Weight of the metric `d = e |x - x'| + |y - y'|` that certifies the
    /// branches as contractions, chosen as `2 M / (1 - max a_n)`.
    pub metric_e: f64,
    /// Contraction factor under that metric: `max(max a_n + M/e, s)`.
    pub metric_contraction: f64,
    pub invertible_in_y: Vec<bool>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.conditions_pass && self.s_bound < 1.0 && self.m_bound.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationIFS {
    nodes: Vec<DataNode>,
    l_maps: Vec<AffineMap1D>,
    branches: Vec<BranchMap>,
}

impl InterpolationIFS {
    /// Structural construction. Endpoint conditions are reported by
    /// [`validate`](Self::validate), not enforced here, so that slightly
    /// perturbed systems remain representable.
    pub fn new(
        nodes: Vec<DataNode>,
        l_maps: Vec<AffineMap1D>,
        branches: Vec<BranchMap>,
    ) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::LengthMismatch(format!(
                "need at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        let n = nodes.len() - 1;
        if l_maps.len() != n || branches.len() != n {
            return Err(Error::LengthMismatch(format!(
                "{} nodes require {n} maps, got {} x-maps and {} branch maps",
                nodes.len(),
                l_maps.len(),
                branches.len()
            )));
        }
        if nodes.windows(2).any(|w| w[0].x >= w[1].x) {
            return Err(Error::NonIncreasingNodes);
        }
        for l in &l_maps {
            if !(l.a > 0.0 && l.a <= 1.0) {
                return Err(Error::NotContractive(format!(
                    "x-map slope {} outside (0, 1]",
                    l.a
                )));
            }
        }
        Ok(InterpolationIFS {
            nodes,
            l_maps,
            branches,
        })
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn nodes(&self) -> &[DataNode] {
        &self.nodes
    }

    pub fn l_map(&self, n: usize) -> &AffineMap1D {
        &self.l_maps[n - 1]
    }

    pub fn branch(&self, n: usize) -> &BranchMap {
        &self.branches[n - 1]
    }

    pub fn domain(&self) -> Interval {
        Interval {
            lo: self.nodes[0].x,
            hi: self.nodes[self.nodes.len() - 1].x,
        }
    }

    /// Bounding y-range of the data nodes, the invariant strip on which
    /// non-affine derivative bounds are sampled. Conjugate branches map this
    /// range into itself, and for steep functions the vertical contraction
    /// can genuinely fail outside it, so no padding is applied.
    fn sample_strip(&self) -> Interval {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.nodes {
            lo = lo.min(p.y);
            hi = hi.max(p.y);
        }
        if hi - lo <= 0.0 {
            lo -= 0.5;
            hi += 0.5;
        }
        Interval { lo, hi }
    }

    /// 1-based index of the branch whose subinterval contains x. Interior
    /// nodes resolve to the lower branch; inputs outside the domain clamp to
    /// the extreme branches.
    pub fn branch_containing(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|p| p.x < x);
        i.clamp(1, self.branches.len())
    }

    fn check_branch_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.branches.len() {
            return Err(Error::BranchOutOfRange {
                index: n,
                count: self.branches.len(),
            });
        }
        Ok(())
    }

    /// Applies `w_n(x, y) = (L_n(x), F_n(x, y))`. Branch indices are 1-based
    /// throughout, matching the usual IFS notation.
    pub fn apply_branch(&self, n: usize, x: f64, y: f64) -> Result<(f64, f64)> {
        self.check_branch_index(n)?;
        let fx = self.l_maps[n - 1].apply(x);
        let fy = self.branches[n - 1].value(x, y)?;
        Ok((fx, fy))
    }

    /// Applies `w_n^{-1}(x, y) = (L_n^{-1}(x), F_n^*(x, y))` where `F_n^*`
    /// solves `F_n(L_n^{-1}(x), F_n^*(x, y)) = y`.
    pub fn invert_branch(&self, n: usize, x: f64, y: f64) -> Result<(f64, f64)> {
        self.check_branch_index(n)?;
        let xp = self.l_maps[n - 1].invert(x);
        let yp = self.branches[n - 1].invert_y(n, x, xp, y)?;
        Ok((xp, yp))
    }

    /// Largest x-map slope; below 1 except for the degenerate one-branch
    /// straight-line system.
    pub fn max_a(&self) -> f64 {
        self.l_maps.iter().fold(0.0, |m, l| m.max(l.a))
    }

    pub fn min_a(&self) -> f64 {
        self.l_maps.iter().fold(f64::INFINITY, |m, l| m.min(l.a))
    }

    /// `(M, s)` sup bounds of the branch partial derivatives over the
    /// sampling strip.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        let domain = self.domain();
        let strip = self.sample_strip();
        let (mut m, mut s) = (0.0f64, 0.0f64);
        for b in &self.branches {
            let (bm, bs, _) = branch_bounds(b, &domain, &strip);
            m = m.max(bm);
            s = s.max(bs);
        }
        (m, s)
    }

    /// Sup bounds `(|dF_n/dx|, |dF_n/dy|)` for a single branch, exact for
    /// affine and sinusoidal branches, sampled and inflated otherwise.
    pub fn branch_derivative_bounds(&self, n: usize) -> (f64, f64) {
        let (m, s, _) = branch_bounds(&self.branches[n - 1], &self.domain(), &self.sample_strip());
        (m, s)
    }

    /// Checks the endpoint conditions and certifies contractivity in the
    /// taxicab metric `d = e |x - x'| + |y - y'|`.
    pub fn validate(&self) -> Result<ValidationReport> {
        let n = self.n_branches();
        let first = self.nodes[0];
        let last = self.nodes[n];
        let scale_x = 1.0f64.max(first.x.abs()).max(last.x.abs());
        let scale_y = self.nodes.iter().fold(1.0f64, |m, p| m.max(p.y.abs()));

        let mut residual_a = 0.0f64;
        for (i, l) in self.l_maps.iter().enumerate() {
            residual_a = residual_a
                .max((l.apply(first.x) - self.nodes[i].x).abs())
                .max((l.apply(last.x) - self.nodes[i + 1].x).abs());
        }

        let f_at = |n1: usize, x: f64, y: f64| self.branches[n1 - 1].value(x, y);
        let mut residual_b = 0.0f64;
        let mut residual_c = 0.0f64;
        let mut strip_failures = Vec::new();
        match f_at(1, first.x, first.y) {
            Ok(v) => residual_b = residual_b.max((v - first.y).abs()),
            Err(e) => strip_failures.push(e.to_string()),
        }
        match f_at(n, last.x, last.y) {
            Ok(v) => residual_b = residual_b.max((v - last.y).abs()),
            Err(e) => strip_failures.push(e.to_string()),
        }
        for i in 1..n {
            match (f_at(i + 1, first.x, first.y), f_at(i, last.x, last.y)) {
                (Ok(lo), Ok(hi)) => residual_c = residual_c.max((lo - hi).abs()),
                (a, b) => {
                    for r in [a, b] {
                        if let Err(e) = r {
                            strip_failures.push(e.to_string());
                        }
                    }
                }
            }
        }

        let conditions_pass = strip_failures.is_empty()
            && residual_a <= CONDITION_TOL * scale_x
            && residual_b <= CONDITION_TOL * scale_y
            && residual_c <= CONDITION_TOL * scale_y;

        let (m_bound, s_bound) = self.derivative_bounds();
        if s_bound >= 1.0 {
            return Err(Error::NotContractive(format!(
                "vertical contraction bound s = {s_bound} is not below 1"
            )));
        }

        let mut warnings = strip_failures;
        let a_max = self.max_a();
        let (metric_e, metric_contraction) = if a_max < 1.0 {
            let e = if m_bound > 0.0 {
                2.0 * m_bound / (1.0 - a_max)
            } else {
                // Pure vertical shear: any positive weight certifies; report
                // a neutral one.
                1.0
            };
            let factor = if m_bound > 0.0 {
                (a_max + m_bound / e).max(s_bound)
            } else {
                a_max.max(s_bound)
            };
            (e, factor)
        } else {
            warnings.push(
                "x-maps are not strict contractions (max slope = 1); no joint metric certificate"
                    .to_string(),
            );
            (f64::INFINITY, a_max.max(s_bound))
        };

        let domain = self.domain();
        let strip = self.sample_strip();
        let invertible_in_y = self
            .branches
            .iter()
            .map(|b| match b {
                BranchMap::Affine { d, .. } => *d != 0.0,
                BranchMap::Sinusoidal { xi, .. } => *xi != 0.0,
                BranchMap::Conjugate(_) => {
                    // Invertible when dF/dy keeps one sign on the strip.
                    let xs = domain.linspace(33);
                    let ys = strip.linspace(17);
                    let mut pos = false;
                    let mut neg = false;
                    for &x in &xs {
                        for &y in &ys {
                            let g = b.dy(x, y);
                            pos |= g > 0.0;
                            neg |= g < 0.0;
                        }
                    }
                    pos != neg
                }
            })
            .collect();

        Ok(ValidationReport {
            residual_a,
            residual_b,
            residual_c,
            conditions_pass,
            m_bound,
            s_bound,
            metric_e,
            metric_contraction,
            invertible_in_y,
            warnings,
        })
    }
}

/// Builds the affine interpolation IFS through the given nodes with the
/// given vertical scaling factors, one per subinterval:
///
/// ```text
/// a_n = (x_n - x_{n-1}) / (x_N - x_0)      b_n = x_{n-1} - a_n x_0
/// c_n = (y_n - y_{n-1} - d_n (y_N - y_0)) / (x_N - x_0)
/// e_n = y_{n-1} - c_n x_0 - d_n y_0
/// ```
pub fn ifs_from_data(nodes: &[DataNode], scalings: &[f64]) -> Result<InterpolationIFS> {
    if nodes.len() < 2 {
        return Err(Error::LengthMismatch(format!(
            "need at least 2 nodes, got {}",
            nodes.len()
        )));
    }
    if scalings.len() != nodes.len() - 1 {
        return Err(Error::LengthMismatch(format!(
            "{} nodes require {} scaling factors, got {}",
            nodes.len(),
            nodes.len() - 1,
            scalings.len()
        )));
    }
    if nodes.windows(2).any(|w| w[0].x >= w[1].x) {
        return Err(Error::NonIncreasingNodes);
    }
    for &d in scalings {
        if !d.is_finite() || d.abs() >= 1.0 {
            return Err(Error::ScalingOutOfRange(d));
        }
    }

    let x0 = nodes[0].x;
    let y0 = nodes[0].y;
    let xn = nodes[nodes.len() - 1].x;
    let yn = nodes[nodes.len() - 1].y;
    let span = xn - x0;

    let mut l_maps = Vec::with_capacity(scalings.len());
    let mut branches = Vec::with_capacity(scalings.len());
    for (i, &d) in scalings.iter().enumerate() {
        let a = (nodes[i + 1].x - nodes[i].x) / span;
        let b = nodes[i].x - a * x0;
        let c = (nodes[i + 1].y - nodes[i].y - d * (yn - y0)) / span;
        let e = nodes[i].y - c * x0 - d * y0;
        l_maps.push(AffineMap1D::new(a, b));
        branches.push(BranchMap::Affine { c, d, e });
    }

    InterpolationIFS::new(nodes.to_vec(), l_maps, branches)
}

/// Result of the doubling search for a shear coefficient, together with the
/// two half-interval maps of the unit interval.
struct ShearSetup {
    g: ScalarFn,
    c: f64,
}

/// Builds a two-branch IFS whose attractor is the graph of an analytic,
/// strictly monotone `f` with non-vanishing derivative.
///
/// When `max |f'(mid(x))/f'(x)| < 2` on both halves of the domain, the
/// direct construction applies: branch maps are `y`-conjugates
/// `F_n(y) = f(L_n(f^{-1}(y)))`. Otherwise the graph is sheared by
/// `(x, y) -> (x, y + c x)` in normalized coordinates with `c` found by a
/// doubling search, the construction is applied to the sheared function,
/// and the branch maps carry the shear so that the attractor is the graph
/// of the original `f`.
pub fn ifs_from_analytic(f: &ScalarFn, domain: Interval) -> Result<InterpolationIFS> {
    let xs = domain.linspace(ANALYTIC_GRID + 1);
    let derivs: Vec<f64> = xs.iter().map(|&x| f.derivative(x)).collect();
    let mut min_abs = f64::INFINITY;
    let mut pos = false;
    let mut neg = false;
    for &d in &derivs {
        if !d.is_finite() {
            return Err(Error::NotMonotone);
        }
        pos |= d > 0.0;
        neg |= d < 0.0;
        min_abs = min_abs.min(d.abs());
    }
    if pos && neg {
        return Err(Error::NotMonotone);
    }
    let scale = derivs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if min_abs <= 1e-12 * scale.max(1.0) {
        return Err(Error::DerivativeVanishes(min_abs));
    }

    let l1 = AffineMap1D::new(0.5, 0.5 * domain.lo);
    let l2 = AffineMap1D::new(0.5, 0.5 * domain.hi);

    let ratio_ok = |l: &AffineMap1D| {
        xs.iter()
            .zip(&derivs)
            .all(|(&x, &d)| (f.derivative(l.apply(x)) / d).abs() < 2.0)
    };

    if ratio_ok(&l1) && ratio_ok(&l2) {
        return conjugate_ifs_direct(f, domain, l1, l2);
    }

    let setup = find_shear(f, &domain, &xs)?;
    sheared_ifs(f, domain, l1, l2, setup)
}

/// Largest interval containing `seed` on which the sampled derivative of
/// `g` keeps one sign, probed outward in steps of `span / 64` up to 16
/// spans on each side. Numeric inverses bracketed on this interval let
/// inverse branch maps reach beyond the original domain, which is what
/// continuation needs.
fn monotone_bracket(g: &ScalarFn, seed: Interval) -> (f64, f64) {
    let span = seed.len();
    let sign = if g.derivative(seed.midpoint()) >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let step = span / 64.0;
    let keeps_sign = |x: f64| {
        let d = g.derivative(x);
        d.is_finite() && sign * d > 0.0
    };
    let mut lo = seed.lo;
    while lo > seed.lo - 16.0 * span && keeps_sign(lo - step) {
        lo -= step;
    }
    let mut hi = seed.hi;
    while hi < seed.hi + 16.0 * span && keeps_sign(hi + step) {
        hi += step;
    }
    (lo, hi)
}

/// Inverse of `f` plus the interval of ordinates on which branch inversion
/// is admissible. With a symbolic inverse the whole natural range works;
/// a numeric inverse is restricted to the image of its monotone bracket.
fn inverse_and_strip(f: &ScalarFn, seed: Interval) -> (ScalarFn, Interval) {
    match f.inverse_fn() {
        Some(inv) => {
            let (a, b) = f.natural_range();
            (inv, Interval::unbounded(a, b))
        }
        None => {
            let (lo, hi) = monotone_bracket(f, seed);
            let (ya, yb) = (f.eval(lo), f.eval(hi));
            (
                ScalarFn::Inverse(Box::new(f.clone()), (lo, hi)),
                Interval::unbounded(ya.min(yb), ya.max(yb)),
            )
        }
    }
}

/// Direct construction: `F_n = f ∘ L_n ∘ f^{-1}` acting on y alone.
fn conjugate_ifs_direct(
    f: &ScalarFn,
    domain: Interval,
    l1: AffineMap1D,
    l2: AffineMap1D,
) -> Result<InterpolationIFS> {
    let (f_inv, strip) = inverse_and_strip(f, domain);

    let make = |l: AffineMap1D| -> BranchMap {
        let lm = ScalarFn::affine(l.a, l.b);
        let lm_inv = ScalarFn::affine(1.0 / l.a, -l.b / l.a);
        BranchMap::Conjugate(ConjugateBranch {
            v: ScalarFn::compose(f.clone(), ScalarFn::compose(lm, f_inv.clone())),
            v_inv: ScalarFn::compose(f.clone(), ScalarFn::compose(lm_inv, f_inv.clone())),
            shear_c: 0.0,
            shear_d: 1.0,
            shear_e: 0.0,
            l,
            strip,
        })
    };

    let nodes = vec![
        DataNode::new(domain.lo, f.eval(domain.lo)),
        DataNode::new(domain.midpoint(), f.eval(domain.midpoint())),
        DataNode::new(domain.hi, f.eval(domain.hi)),
    ];
    InterpolationIFS::new(nodes, vec![l1, l2], vec![make(l1), make(l2)])
}

/// Doubling search for a shear making the contraction ratios attainable on
/// the normalized domain [0, 1], where `g(t) = f(lo + span t) + c t`.
fn find_shear(f: &ScalarFn, domain: &Interval, xs: &[f64]) -> Result<ShearSetup> {
    let span = domain.len();
    let to_unit = |x: f64| (x - domain.lo) / span;
    let sign: f64 = if f.derivative(domain.midpoint()) >= 0.0 {
        1.0
    } else {
        -1.0
    };

    let mut c = sign;
    while c.abs() <= MAX_SHEAR {
        // g'(t) = span f'(x(t)) + c with t = to_unit(x)
        let gp = |x: f64| span * f.derivative(x) + c;
        let ok = xs.iter().all(|&x| {
            let t = to_unit(x);
            let x_half1 = domain.lo + span * (0.5 * t);
            let x_half2 = domain.lo + span * (0.5 * t + 0.5);
            (gp(x_half1) / gp(x)).abs() < 2.0 && (gp(x_half2) / gp(x)).abs() < 2.0
        });
        if ok {
            let u = ScalarFn::affine(span, domain.lo);
            let g = ScalarFn::Sum(
                Box::new(ScalarFn::compose(f.clone(), u)),
                Box::new(ScalarFn::Scaled(c, Box::new(ScalarFn::Identity))),
            );
            return Ok(ShearSetup { g, c });
        }
        c *= 2.0;
    }
    Err(Error::ConditionUnattainable(MAX_SHEAR))
}

/// Assembles the sheared branches. In normalized coordinates the sheared
/// ordinate is `u = y + c (x - lo)/span = (c/span) x + y - c lo/span`.
fn sheared_ifs(
    f: &ScalarFn,
    domain: Interval,
    l1: AffineMap1D,
    l2: AffineMap1D,
    setup: ShearSetup,
) -> Result<InterpolationIFS> {
    let span = domain.len();
    let g = setup.g;
    let (g_inv, strip) = inverse_and_strip(&g, Interval::unbounded(0.0, 1.0));
    let shear_c = setup.c / span;
    let shear_e = -setup.c * domain.lo / span;

    let make = |l: AffineMap1D, half: AffineMap1D| -> BranchMap {
        let hm = ScalarFn::affine(half.a, half.b);
        let hm_inv = ScalarFn::affine(1.0 / half.a, -half.b / half.a);
        BranchMap::Conjugate(ConjugateBranch {
            v: ScalarFn::compose(g.clone(), ScalarFn::compose(hm, g_inv.clone())),
            v_inv: ScalarFn::compose(g.clone(), ScalarFn::compose(hm_inv, g_inv.clone())),
            shear_c,
            shear_d: 1.0,
            shear_e,
            l,
            strip,
        })
    };

    // Half-interval maps of [0, 1] corresponding to l1, l2 on the domain.
    let h1 = AffineMap1D::new(0.5, 0.0);
    let h2 = AffineMap1D::new(0.5, 0.5);

    let nodes = vec![
        DataNode::new(domain.lo, f.eval(domain.lo)),
        DataNode::new(domain.midpoint(), f.eval(domain.midpoint())),
        DataNode::new(domain.hi, f.eval(domain.hi)),
    ];
    InterpolationIFS::new(nodes, vec![l1, l2], vec![make(l1, h1), make(l2, h2)])
}

/// Full planar affine map `(x, y) -> A (x, y) + t`. Unlike [`BranchMap`],
/// the first coordinate may depend on y, so attractors of these systems are
/// curves rather than function graphs in general.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine2D {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Affine2D {
    pub fn new(a: [[f64; 2]; 2], t: [f64; 2]) -> Self {
        Affine2D {
            a11: a[0][0],
            a12: a[0][1],
            a21: a[1][0],
            a22: a[1][1],
            tx: t[0],
            ty: t[1],
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a11 * x + self.a12 * y + self.tx,
            self.a21 * x + self.a22 * y + self.ty,
        )
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// Largest singular value of the linear part, in closed form.
    pub fn spectral_norm(&self) -> f64 {
        self.scaled_norm(1.0)
    }

    /// Spectral norm of `S A S^{-1}` with `S = diag(1, w)`, i.e. the
    /// operator norm of the map in the norm `|(x, y)| = sqrt(x^2 + w^2 y^2)`.
    fn scaled_norm(&self, w: f64) -> f64 {
        let (a, b, c, d) = (self.a11, self.a12 / w, self.a21 * w, self.a22);
        let t = a * a + b * b + c * c + d * d;
        let det = (a * d - b * c).abs();
        let disc = (t * t - 4.0 * det * det).max(0.0);
        (0.5 * (t + disc.sqrt())).sqrt()
    }
}

/// Report for [`GeneralAffineIFS2D::validate`].
#[derive(Debug, Clone, Serialize)]
pub struct Affine2DReport {
    /// Plain spectral norm of each map's linear part.
    pub norms: Vec<f64>,
    /// Weight w of the diagonal norm certifying contraction, if one was
    /// found among powers of two.
    pub certified_weight: Option<f64>,
    /// Worst operator norm under the certified weight.
    pub contraction: f64,
}

impl Affine2DReport {
    pub fn is_contractive(&self) -> bool {
        self.certified_weight.is_some() && self.contraction < 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralAffineIFS2D {
    maps: Vec<Affine2D>,
}

impl GeneralAffineIFS2D {
    pub fn new(maps: Vec<Affine2D>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::LengthMismatch("need at least one map".into()));
        }
        if maps.iter().any(|m| m.det() == 0.0) {
            return Err(Error::SingularMap);
        }
        Ok(GeneralAffineIFS2D { maps })
    }

    pub fn n_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn map(&self, n: usize) -> &Affine2D {
        &self.maps[n - 1]
    }

    pub fn apply(&self, n: usize, x: f64, y: f64) -> Result<(f64, f64)> {
        if n == 0 || n > self.maps.len() {
            return Err(Error::BranchOutOfRange {
                index: n,
                count: self.maps.len(),
            });
        }
        Ok(self.maps[n - 1].apply(x, y))
    }

    /// Searches diagonal norms `sqrt(x^2 + w^2 y^2)`, w a power of two, for
    /// one in which every map is a strict contraction.
    pub fn validate(&self) -> Result<Affine2DReport> {
        let norms: Vec<f64> = self.maps.iter().map(|m| m.spectral_norm()).collect();
        let mut best: Option<(f64, f64)> = None;
        for k in -16..=16 {
            let w = (k as f64).exp2();
            let worst = self
                .maps
                .iter()
                .map(|m| m.scaled_norm(w))
                .fold(0.0f64, f64::max);
            let improves = match best {
                None => true,
                Some((_, b)) => worst < b,
            };
            if improves {
                best = Some((w, worst));
            }
        }
        let (w, contraction) = best.unwrap();
        if contraction >= 1.0 {
            return Err(Error::NotContractive(format!(
                "no diagonal norm among weights 2^-16..2^16 certifies contraction \
                 (best factor {contraction} at weight {w})"
            )));
        }
        Ok(Affine2DReport {
            norms,
            certified_weight: Some(w),
            contraction,
        })
    }
}
